#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace quizpipe {

struct FewShotExample {
    std::string clues;
    std::string answer;
};

struct PromptTemplate {
    std::string role_preamble;
    std::string reasoning_instruction;
    std::string penalty_clause;
    FewShotExample few_shot_example;
    std::string output_format_instruction;
};

PromptTemplate default_prompt_template();

// Throws ValidationError when any template part is empty.
void validate_template(const PromptTemplate& tmpl);

// Assembles, in order: role preamble, reasoning instruction, penalty clause,
// few-shot example, numbered clues, output-format instruction.
std::string build_prompt(const std::vector<std::string>& clues, const PromptTemplate& tmpl);

// Port: return k answers for one input. May throw BackendError.
class QaPort {
public:
    virtual ~QaPort() = default;
    virtual std::vector<std::string> answers(const std::string& input_text, int n_samples) = 0;
};

// Running per-answer tallies keyed on normalized answers.
struct VoteState {
    struct Tally {
        int count = 0;
        int first_step = 0;   // 0-based step of first occurrence
        int first_sample = 0; // sample index within that step
        std::string first_raw;
    };

    std::map<std::string, Tally> tallies;
    int threshold = 3;
    int samples_per_step = 3;
    bool attempted = false;
    int steps_taken = 0;
};

struct QaSampleSet {
    std::string input_text;
    std::vector<std::string> candidates; // exactly samples_per_step entries
};

// Tally one step of samples. Returns the attempt answer (raw form at its
// first occurrence) once any tally reaches the threshold; ties are broken by
// earliest first occurrence across steps, then sample order within a step.
std::optional<std::string> vote_step(VoteState& state, const QaSampleSet& samples);

struct PolicyOutcome {
    bool attempted = false;
    std::optional<std::string> answer;
    int step_index = 0; // 1-based input step of the attempt; 0 when none
    std::vector<std::string> log;
};

// Drive the vote over monotonically growing inputs: each entry is the list
// of input units (clues or chunks) received so far. A QA failure on a step
// contributes zero tallies and the policy moves on.
PolicyOutcome run_policy(const std::vector<std::vector<std::string>>& input_steps, QaPort& qa,
                         int threshold, const PromptTemplate& tmpl, int samples_per_step = 3);

} // namespace quizpipe
