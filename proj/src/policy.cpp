#include "quizpipe/policy.hpp"

#include "quizpipe/dataset.hpp"
#include "quizpipe/errors.hpp"

namespace quizpipe {

PromptTemplate default_prompt_template() {
    PromptTemplate t;
    t.role_preamble =
        "You are a science prodigy competing in a national science and maths quiz.";
    t.reasoning_instruction =
        "Reason step by step through the clues before settling on an answer.";
    t.penalty_clause =
        "You will be penalized for long answers; give a single word or short phrase.";
    t.few_shot_example.clues =
        "i am the basic unit of life. i am the smallest structure that can reproduce "
        "independently. who am i?";
    t.few_shot_example.answer = "cell";
    t.output_format_instruction =
        "Respond with JSON of the form {\"answer\": \"<your answer>\"}.";
    return t;
}

void validate_template(const PromptTemplate& tmpl) {
    auto check = [](const std::string& v, const char* name) {
        if (v.empty())
            throw ValidationError(std::string("prompt template: empty ") + name);
    };
    check(tmpl.role_preamble, "role_preamble");
    check(tmpl.reasoning_instruction, "reasoning_instruction");
    check(tmpl.penalty_clause, "penalty_clause");
    check(tmpl.few_shot_example.clues, "few_shot_example.clues");
    check(tmpl.few_shot_example.answer, "few_shot_example.answer");
    check(tmpl.output_format_instruction, "output_format_instruction");
}

std::string build_prompt(const std::vector<std::string>& clues, const PromptTemplate& tmpl) {
    if (clues.empty()) throw ValidationError("build_prompt: no clues");
    validate_template(tmpl);

    std::string out;
    out += tmpl.role_preamble;
    out += "\n\n";
    out += tmpl.reasoning_instruction;
    out += "\n\n";
    out += tmpl.penalty_clause;
    out += "\n\nExample:\nClues: ";
    out += tmpl.few_shot_example.clues;
    out += "\nAnswer: ";
    out += tmpl.few_shot_example.answer;
    out += "\n\nClues:\n";
    for (size_t i = 0; i < clues.size(); ++i) {
        out += std::to_string(i + 1);
        out += ". ";
        out += clues[i];
        out += "\n";
    }
    out += "\n";
    out += tmpl.output_format_instruction;
    return out;
}

std::optional<std::string> vote_step(VoteState& state, const QaSampleSet& samples) {
    if (state.attempted)
        throw ValidationError("vote_step: policy already attempted");
    if (state.threshold < 1 || state.samples_per_step < 1)
        throw ValidationError("vote_step: threshold and samples_per_step must be >= 1");
    if (static_cast<int>(samples.candidates.size()) != state.samples_per_step)
        throw ValidationError("vote_step: expected " + std::to_string(state.samples_per_step) +
                              " candidates, got " + std::to_string(samples.candidates.size()));

    for (size_t i = 0; i < samples.candidates.size(); ++i) {
        const std::string& raw = samples.candidates[i];
        std::string key = normalize_answer(raw);
        if (key.empty()) continue; // a no-answer sample earns no tally
        auto [it, inserted] = state.tallies.try_emplace(key);
        if (inserted) {
            it->second.first_step = state.steps_taken;
            it->second.first_sample = static_cast<int>(i);
            it->second.first_raw = raw;
        }
        it->second.count += 1;
    }
    state.steps_taken += 1;

    const VoteState::Tally* winner = nullptr;
    for (const auto& [key, tally] : state.tallies) {
        if (tally.count < state.threshold) continue;
        if (!winner ||
            std::pair(tally.first_step, tally.first_sample) <
                std::pair(winner->first_step, winner->first_sample)) {
            winner = &tally;
        }
    }
    if (!winner) return std::nullopt;
    state.attempted = true;
    return winner->first_raw;
}

PolicyOutcome run_policy(const std::vector<std::vector<std::string>>& input_steps, QaPort& qa,
                         int threshold, const PromptTemplate& tmpl, int samples_per_step) {
    if (input_steps.empty())
        throw ValidationError("run_policy: input_steps is empty");
    for (size_t i = 1; i < input_steps.size(); ++i) {
        const auto& prev = input_steps[i - 1];
        const auto& cur = input_steps[i];
        bool grows = cur.size() >= prev.size() &&
                     std::equal(prev.begin(), prev.end(), cur.begin());
        if (!grows)
            throw ValidationError("run_policy: step " + std::to_string(i + 1) +
                                  " does not extend the previous input");
    }

    PolicyOutcome outcome;
    VoteState votes;
    votes.threshold = threshold;
    votes.samples_per_step = samples_per_step;

    for (size_t i = 0; i < input_steps.size(); ++i) {
        std::string prompt = build_prompt(input_steps[i], tmpl);
        std::vector<std::string> candidates;
        try {
            candidates = qa.answers(prompt, samples_per_step);
        } catch (const std::exception& e) {
            outcome.log.push_back("step " + std::to_string(i + 1) + ": qa failure: " + e.what());
            continue;
        }
        if (static_cast<int>(candidates.size()) != samples_per_step) {
            outcome.log.push_back("step " + std::to_string(i + 1) + ": qa returned " +
                                  std::to_string(candidates.size()) + " answers, expected " +
                                  std::to_string(samples_per_step));
            continue;
        }
        auto attempt = vote_step(votes, {prompt, candidates});
        if (attempt) {
            outcome.attempted = true;
            outcome.answer = *attempt;
            outcome.step_index = static_cast<int>(i) + 1;
            return outcome;
        }
    }
    return outcome;
}

} // namespace quizpipe
