#pragma once

#include <memory>
#include <string>

#include "quizpipe/policy.hpp"
#include "quizpipe/segmentation.hpp"

namespace quizpipe {

// Speech-to-text port. Input is an audio window standing in for real audio;
// the adapter returns the transcript for that window. May throw BackendError.
class SttPort {
public:
    virtual ~SttPort() = default;
    virtual TimedSegment transcribe(const TimedSegment& audio) = 0;
};

struct TtsResult {
    std::string audio_handle;
    double latency_s = 0.0;
};

// Text-to-speech port. May throw BackendError.
class TtsPort {
public:
    virtual ~TtsPort() = default;
    virtual TtsResult speak(const std::string& text) = 0;
};

// One of each port, wired into a pipeline run.
struct AdapterSuite {
    std::shared_ptr<SttPort> stt;
    std::shared_ptr<ClueClassifier> classifier;
    std::shared_ptr<QaPort> qa;
    std::shared_ptr<TtsPort> tts;

    void validate() const; // throws ConfigError when any port is missing
};

} // namespace quizpipe
