#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quizpipe/dataset.hpp"
#include "quizpipe/matching.hpp"
#include "quizpipe/policy.hpp"
#include "quizpipe/ports.hpp"
#include "quizpipe/segmentation.hpp"
#include "quizpipe/timing.hpp"

namespace quizpipe {

// Regroup a timed transcript into fixed-duration windows. Window w covers
// [w*chunk_seconds, (w+1)*chunk_seconds); a source segment lands in the
// window containing its midpoint, so no text is dropped or duplicated.
// Windows with no text are still emitted to keep stream time contiguous;
// the final window may be partial. Source segments must have non-decreasing
// start times and end >= start.
std::vector<TimedSegment> chunk_timed_stream(const std::vector<TimedSegment>& segments,
                                             const ChunkPlan& plan);

// Split text into consecutive groups of words_per_chunk whitespace words;
// the final group may be shorter. Joining the groups with single spaces
// reproduces the token sequence.
std::vector<std::string> chunk_words(const std::string& text, const ChunkPlan& plan);

// Replay transcript CSV: columns start_s, end_s, text, one row per segment.
std::vector<TimedSegment> load_transcript_csv(const std::string& path);

enum class RunClock { virtual_clock, wall_clock };

struct PipelineOptions {
    ChunkPlan chunk;
    DetectorConfig detector;
    int threshold = 3;
    int samples_per_step = 3;
    PromptTemplate prompt;
    StagePlan plan;
    RunClock clock = RunClock::virtual_clock;
    uint64_t seed = 0;
    int abort_after_failures = 5; // consecutive failures of one stage
    const RiddleDataset* truth = nullptr; // when set, attempts are scored

    PipelineOptions() : prompt(default_prompt_template()) {
        detector = default_detector_config();
        plan = default_stage_plan();
    }
};

struct PipelineEvent {
    double ts_s = 0.0;
    long chunk_seq = 0;
    StageName stage = StageName::stt;
    std::string kind;
    nlohmann::ordered_json payload;
};

std::string to_json_line(const PipelineEvent& ev);

struct RunResult {
    std::vector<PipelineEvent> events;
    std::vector<AttemptRecord> records; // one per attempted riddle
    TimingReport timing;
    bool aborted = false;
    std::string diagnostic;
};

// Drive the four-stage graph over a timed transcript: stt, then riddle
// segmentation, then (for chunks that yielded new clues, while no attempt is
// pending for the current riddle) one confidence-vote step, then tts for the
// attempt. Stage failures mark the chunk failed and skip its downstream
// stages; abort_after_failures consecutive failures of one stage abort the
// run with a diagnostic instead of throwing.
//
// Event content depends only on inputs, config, and seed. With the virtual
// clock, timestamps come from the latency simulation and re-runs are
// byte-identical; with the wall clock, stages execute as real workers
// (bounded queues in pipelined mode) and timestamps are measured.
//
// When options.truth is set, each attempt is matched back to the dataset
// riddle whose clues best cover the detected clue text and scored; attempts
// over unrecognizable riddles are logged and dropped. step_index in the
// returned records is the clue number at the attempt.
RunResult run_pipeline(const std::vector<TimedSegment>& source, const AdapterSuite& suite,
                       const PipelineOptions& options);

} // namespace quizpipe
