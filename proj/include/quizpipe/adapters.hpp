#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "quizpipe/dataset.hpp"
#include "quizpipe/ports.hpp"

namespace quizpipe {

// STT stand-in that replays the source transcript, optionally injecting
// word-level corruption: each word is replaced with probability error_prob
// (seeded, independent per chunk so replay order does not matter), and any
// word listed in rewrites is always replaced by its mapped form. The rewrite
// table reproduces specific mistranscriptions on demand.
class ReplaySttAdapter : public SttPort {
public:
    ReplaySttAdapter() = default;
    ReplaySttAdapter(double error_prob, uint64_t seed,
                     std::map<std::string, std::string> rewrites = {});

    TimedSegment transcribe(const TimedSegment& audio) override;

private:
    double error_prob_ = 0.0;
    uint64_t seed_ = 0;
    std::map<std::string, std::string> rewrites_;
};

// TTS stand-in: returns a synthetic audio handle and a fixed latency.
class StubTtsAdapter : public TtsPort {
public:
    explicit StubTtsAdapter(double latency_s = 1.05) : latency_s_(latency_s) {}

    TtsResult speak(const std::string& text) override;

    int calls = 0;

private:
    double latency_s_;
};

// QA backend that answers the same thing every time.
class ConstantQa : public QaPort {
public:
    explicit ConstantQa(std::string answer) : answer_(std::move(answer)) {}
    std::vector<std::string> answers(const std::string& input_text, int n_samples) override;

private:
    std::string answer_;
};

// QA backend that never repeats itself: sample n gets "guess-<n>". With any
// threshold >= 2 no tally can reach it, so no attempt is ever made.
class DistinctQa : public QaPort {
public:
    std::vector<std::string> answers(const std::string& input_text, int n_samples) override;

private:
    long counter_ = 0;
};

// QA backend driven by an explicit per-call script. Call k returns script[k]
// verbatim; running past the end raises BackendError.
class ScriptedQa : public QaPort {
public:
    explicit ScriptedQa(std::vector<std::vector<std::string>> script)
        : script_(std::move(script)) {}

    std::vector<std::string> answers(const std::string& input_text, int n_samples) override;

    size_t calls = 0;

private:
    std::vector<std::vector<std::string>> script_;
};

// QA backend that always fails, for exercising error paths.
class FailingQa : public QaPort {
public:
    std::vector<std::string> answers(const std::string& input_text, int n_samples) override;
};

// Dataset-backed oracle. Identifies which riddle the input text is about by
// scanning for whole clues (token subsequence match, so interleaved list
// numbering or chunk seams do not break it), then answers correctly once at
// least min_clues of that riddle's clues are fully present, and with a fixed
// wrong answer before that. min_clues=1 is the perfect oracle under the
// all-clues protocol. The consistently wrong early answer is what makes
// premature attempts score zero.
class OracleQa : public QaPort {
public:
    OracleQa(const RiddleDataset& dataset, int min_clues, std::string wrong_answer = "unknown");

    std::vector<std::string> answers(const std::string& input_text, int n_samples) override;

    // Index into the dataset, or -1 when no riddle (or more than one riddle
    // equally well) matches.
    int identify_riddle(const std::string& input_text, int* clues_present = nullptr) const;

private:
    const RiddleDataset& dataset_;
    int min_clues_;
    std::string wrong_answer_;
    std::vector<std::vector<std::vector<std::string>>> clue_tokens_; // [riddle][clue][token]
};

// Out-of-process QA backend speaking line-delimited JSON over stdin/stdout:
// request {"input_text": ..., "n_samples": k} per line, response
// {"answers": [k strings]} per line. The child is spawned once and reused.
class ProcessQa : public QaPort {
public:
    explicit ProcessQa(const std::string& command);
    ~ProcessQa() override;

    ProcessQa(const ProcessQa&) = delete;
    ProcessQa& operator=(const ProcessQa&) = delete;

    std::vector<std::string> answers(const std::string& input_text, int n_samples) override;

private:
    int child_pid_ = -1;
    FILE* to_child_ = nullptr;
    FILE* from_child_ = nullptr;
};

// Parse a backend selector string:
//   perfect | oracle_after_k:<k> | constant:<text> | distinct | failing |
//   process:<command>
// Oracle selectors need a dataset. Unknown selectors raise ConfigError.
std::shared_ptr<QaPort> make_qa_backend(const std::string& selector, const RiddleDataset* dataset);

} // namespace quizpipe
