#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quizpipe/dataset.hpp"

namespace quizpipe {

struct MatchResult {
    bool em = false;
    bool fm = false;
    std::optional<std::string> matched_truth; // which ground-truth string matched
};

struct AttemptRecord {
    std::string riddle_id;
    bool attempted = false;
    std::optional<std::string> answer;
    int step_index = 0; // clue or chunk ordinal at attempt; 0 when unattempted
    MatchResult match;
    int points = 0; // {0, 3, 4, 5}
};

struct SubjectStats {
    double em_pct = 0.0;
    double fm_pct = 0.0;
};

struct EvalReport {
    size_t n_riddles = 0;
    size_t n_attempted = 0;
    double em_pct = 0.0; // percentages carry 2 decimals, matching the reports
    double fm_pct = 0.0;
    bool fm_valid = true; // false for the human benchmark (FM not computed)
    long total_points = 0;
    std::map<Subject, SubjectStats> per_subject;
    std::vector<AttemptRecord> records; // sorted by riddle_id
};

// Normalized candidate equals a normalized ground truth (answer or alternate).
// A truth that normalizes to the empty string matches nothing.
bool exact_match(std::string_view candidate, const Riddle& riddle);

// A normalized ground truth is a contiguous substring of the normalized
// candidate. Exact match implies fuzzy match.
bool fuzzy_match(std::string_view candidate, const Riddle& riddle);

MatchResult match_answer(std::string_view candidate, const Riddle& riddle);

// Word-level edit distance over whitespace tokens (case-insensitive) divided
// by the reference word count. Throws ValidationError on an empty reference.
double word_error_rate(std::string_view reference, std::string_view hypothesis);

// 5 points on clue 1, 4 on clue 2, 3 from clue 3 on.
int points_for_clue(int clue_number);

// Builds the report over the whole dataset: riddles without a record are
// counted as unattempted incorrect. Duplicate or unknown riddle ids are
// errors. Record order in the report is normalized by riddle_id.
EvalReport aggregate_report(std::vector<AttemptRecord> records, const RiddleDataset& dataset);

} // namespace quizpipe
