#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quizpipe {

enum class Subject { biology, chemistry, physics, math };

std::string_view subject_name(Subject s);
std::optional<Subject> subject_from_name(std::string_view name);

// One quiz riddle: ordered clues plus the ground-truth answer set.
struct Riddle {
    std::string id;
    int year = 0;
    std::string contest;
    Subject subject = Subject::biology;
    std::vector<std::string> clues; // 1..9 entries, each nonempty after trimming
    std::string answer;
    std::vector<std::string> alt_answers; // 0..4 entries, nonempty, distinct

    // {answer} followed by alternates.
    std::vector<std::string> truths() const;
    std::string all_clues_text() const;
};

struct RiddleDataset {
    std::vector<Riddle> riddles;
    std::string source_path;

    const Riddle* find(std::string_view id) const;
};

struct HumanAnnotation {
    std::string riddle_id;
    bool answered = false;
    std::optional<int> clue_number;
    bool correct = false;
};

// Lowercase, drop punctuation, collapse whitespace, remove standalone
// articles ("the", "a", "an"). Idempotent.
std::string normalize_answer(std::string_view text);

// Throws ValidationError when a type invariant does not hold.
void validate_riddle(const Riddle& r);

// CSV schema: header "Clue 1".."Clue 9", "Answer", "Answer 1".."Answer 4";
// optional "Subject", "Contest", "Year". `default_year` fills rows without a
// Year column/cell. When Subject is absent the four subjects are assigned
// round-robin in row order (each contest covers all four).
RiddleDataset load_riddle_dataset(const std::string& path, int default_year);

// Canonical writer: always emits all columns; load(write(load(x))) == load(x).
void write_riddle_dataset(const RiddleDataset& ds, const std::string& path);

// CSV columns: riddle_id, answered, clue_number, correct.
std::vector<HumanAnnotation> load_annotations(const std::string& path);
void write_annotations(const std::vector<HumanAnnotation>& anns, const std::string& path);

} // namespace quizpipe
