#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quizpipe {

// A transcript fragment with stream-time boundaries; the unit flowing
// through the pipeline.
struct TimedSegment {
    std::string text;
    double start_s = 0.0;
    double end_s = 0.0;
    long seq = 0;
};

enum class Phase { idle, active };

enum class SegKind { riddle_started, clue, non_clue, riddle_ended };

std::string_view seg_kind_name(SegKind k);

struct SegmentationEvent {
    SegKind kind = SegKind::non_clue;
    int riddle_index = 0;
    std::optional<int> clue_number; // clue events only; 1-based
    std::string text;
};

// One line of the line-delimited JSON event log.
std::string to_json_line(const SegmentationEvent& ev);

// Port for the clue/non-clue classifier. Implementations must be safe for
// concurrent read-only use.
class ClueClassifier {
public:
    virtual ~ClueClassifier() = default;
    // May throw BackendError.
    virtual bool is_clue(const std::string& text) const = 0;
};

// Keyword rules standing in for the learned classifier: first-person riddle
// markers vote clue, quiz-administration markers vote non-clue, ties lose.
bool rule_baseline_is_clue(std::string_view text);

class RuleBaselineClassifier final : public ClueClassifier {
public:
    bool is_clue(const std::string& text) const override { return rule_baseline_is_clue(text); }
};

std::unique_ptr<ClueClassifier> make_classifier(std::string_view selector);

struct DetectorConfig {
    std::vector<std::string> start_phrases;
    std::vector<std::string> end_phrases;
    bool lenient_keyword = false;
    std::string classifier = "rule_baseline";
};

DetectorConfig default_detector_config();

struct SessionState {
    Phase phase = Phase::idle;
    int riddle_index = 0;  // active riddle ordinal; 0 while idle
    int riddles_seen = 0;  // total riddles started on this stream
    std::vector<std::string> clues;
    long last_seq = -1;
};

bool detect_riddle_start(std::string_view text, const DetectorConfig& config);
bool detect_riddle_end(std::string_view text, const DetectorConfig& config);

enum class SegClass { clue, non_clue };

// Delegates to the classifier port; text must be nonempty.
SegClass classify_segment(const std::string& text, const ClueClassifier& classifier);

// Feed one segment through the state machine. Start phrases open a riddle
// (closing any active one); end phrases close it; segments inside an active
// riddle are classified into clue / non-clue events. The state is untouched
// when the classifier throws, so the segment can be retried or skipped.
std::vector<SegmentationEvent> advance(SessionState& state, const TimedSegment& segment,
                                       const DetectorConfig& config,
                                       const ClueClassifier& classifier);

// Explicit stream end: closes the active riddle, if any.
std::vector<SegmentationEvent> finish(SessionState& state);

} // namespace quizpipe
