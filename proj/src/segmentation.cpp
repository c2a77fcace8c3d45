#include "quizpipe/segmentation.hpp"

#include <json.hpp>

#include "quizpipe/errors.hpp"
#include "quizpipe/text.hpp"

namespace quizpipe {

std::string_view seg_kind_name(SegKind k) {
    switch (k) {
    case SegKind::riddle_started: return "riddle_started";
    case SegKind::clue: return "clue";
    case SegKind::non_clue: return "non_clue";
    case SegKind::riddle_ended: return "riddle_ended";
    }
    return "non_clue";
}

std::string to_json_line(const SegmentationEvent& ev) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(seg_kind_name(ev.kind));
    j["riddle_index"] = ev.riddle_index;
    if (ev.clue_number) j["clue_number"] = *ev.clue_number;
    j["text"] = ev.text;
    return j.dump();
}

namespace {

const char* kClueMarkers[] = {"i am", "i was", "i describe", "my", "who am i"};
const char* kAdminMarkers[] = {"points", "school", "bell", "we begin", "correct answer"};

bool any_phrase(const std::vector<std::string>& tokens, const char* const* phrases, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        if (contains_phrase(tokens, normalize_tokens(phrases[i]))) return true;
    }
    return false;
}

} // namespace

bool rule_baseline_is_clue(std::string_view text) {
    auto tokens = normalize_tokens(text);
    bool first_person = any_phrase(tokens, kClueMarkers, std::size(kClueMarkers));
    bool admin = any_phrase(tokens, kAdminMarkers, std::size(kAdminMarkers));
    return first_person && !admin;
}

std::unique_ptr<ClueClassifier> make_classifier(std::string_view selector) {
    if (selector == "rule_baseline") return std::make_unique<RuleBaselineClassifier>();
    throw ConfigError("unknown classifier selector '" + std::string(selector) + "'");
}

DetectorConfig default_detector_config() {
    DetectorConfig cfg;
    cfg.start_phrases = {"first riddle", "second riddle", "third riddle",
                         "fourth riddle", "next riddle", "we begin"};
    cfg.end_phrases = {"that is the end of the riddle", "the answer is"};
    return cfg;
}

bool detect_riddle_start(std::string_view text, const DetectorConfig& config) {
    if (config.start_phrases.empty())
        throw ConfigError("detector: start_phrases must be nonempty");
    auto tokens = normalize_tokens(text);
    for (const auto& phrase : config.start_phrases) {
        if (contains_phrase(tokens, normalize_tokens(phrase))) return true;
    }
    if (config.lenient_keyword && contains_token(tokens, "riddle")) return true;
    return false;
}

bool detect_riddle_end(std::string_view text, const DetectorConfig& config) {
    auto tokens = normalize_tokens(text);
    for (const auto& phrase : config.end_phrases) {
        if (contains_phrase(tokens, normalize_tokens(phrase))) return true;
    }
    return false;
}

SegClass classify_segment(const std::string& text, const ClueClassifier& classifier) {
    if (trim(text).empty())
        throw ValidationError("classify_segment: empty text");
    return classifier.is_clue(text) ? SegClass::clue : SegClass::non_clue;
}

std::vector<SegmentationEvent> advance(SessionState& state, const TimedSegment& segment,
                                       const DetectorConfig& config,
                                       const ClueClassifier& classifier) {
    if (segment.seq <= state.last_seq)
        throw ValidationError("advance: segment seq " + std::to_string(segment.seq) +
                              " not greater than last seq " + std::to_string(state.last_seq));

    std::vector<SegmentationEvent> events;
    const bool blank = trim(segment.text).empty();

    if (!blank && detect_riddle_start(segment.text, config)) {
        if (state.phase == Phase::active)
            events.push_back({SegKind::riddle_ended, state.riddle_index, std::nullopt, segment.text});
        state.riddles_seen += 1;
        state.riddle_index = state.riddles_seen;
        state.clues.clear();
        state.phase = Phase::active;
        events.push_back({SegKind::riddle_started, state.riddle_index, std::nullopt, segment.text});
    } else if (!blank && state.phase == Phase::active && detect_riddle_end(segment.text, config)) {
        events.push_back({SegKind::riddle_ended, state.riddle_index, std::nullopt, segment.text});
        state.phase = Phase::idle;
        state.riddle_index = 0;
        state.clues.clear();
    } else if (!blank && state.phase == Phase::active) {
        // Classify before mutating: a throwing port must leave the state intact.
        SegClass cls = classify_segment(segment.text, classifier);
        if (cls == SegClass::clue) {
            state.clues.push_back(segment.text);
            events.push_back({SegKind::clue, state.riddle_index,
                              static_cast<int>(state.clues.size()), segment.text});
        } else {
            events.push_back({SegKind::non_clue, state.riddle_index, std::nullopt, segment.text});
        }
    }
    // Idle non-start segments and blank segments pass through silently.

    state.last_seq = segment.seq;
    return events;
}

std::vector<SegmentationEvent> finish(SessionState& state) {
    std::vector<SegmentationEvent> events;
    if (state.phase == Phase::active) {
        events.push_back({SegKind::riddle_ended, state.riddle_index, std::nullopt, ""});
        state.phase = Phase::idle;
        state.riddle_index = 0;
        state.clues.clear();
    }
    return events;
}

} // namespace quizpipe
