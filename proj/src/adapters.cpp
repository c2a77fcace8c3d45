#include "quizpipe/adapters.hpp"

#include <algorithm>
#include <csignal>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "quizpipe/errors.hpp"
#include "quizpipe/rng.hpp"
#include "quizpipe/text.hpp"

namespace quizpipe {

void AdapterSuite::validate() const {
    if (!stt) throw ConfigError("adapter suite: missing stt port");
    if (!classifier) throw ConfigError("adapter suite: missing classifier port");
    if (!qa) throw ConfigError("adapter suite: missing qa port");
    if (!tts) throw ConfigError("adapter suite: missing tts port");
}

ReplaySttAdapter::ReplaySttAdapter(double error_prob, uint64_t seed,
                                   std::map<std::string, std::string> rewrites)
    : error_prob_(error_prob), seed_(seed), rewrites_(std::move(rewrites)) {
    if (error_prob < 0.0 || error_prob > 1.0)
        throw ConfigError("replay stt: error_prob must be in [0, 1]");
}

TimedSegment ReplaySttAdapter::transcribe(const TimedSegment& audio) {
    TimedSegment out = audio;
    if (error_prob_ <= 0.0 && rewrites_.empty()) return out;

    // Seed per chunk so corruption does not depend on processing order.
    Rng rng(mix_seed(seed_, static_cast<uint64_t>(audio.seq)));
    std::vector<std::string> words = split_ws(audio.text);
    for (auto& w : words) {
        if (auto it = rewrites_.find(w); it != rewrites_.end()) {
            w = it->second;
            continue;
        }
        if (error_prob_ > 0.0 && rng.uniform01() < error_prob_) {
            std::string garbled(w.rbegin(), w.rend());
            if (garbled == w) garbled += "x";
            w = garbled;
        }
    }
    out.text = join(words, " ");
    return out;
}

TtsResult StubTtsAdapter::speak(const std::string& text) {
    (void)text;
    ++calls;
    return TtsResult{"audio:" + std::to_string(calls), latency_s_};
}

std::vector<std::string> ConstantQa::answers(const std::string& input_text, int n_samples) {
    (void)input_text;
    if (n_samples < 0) throw ValidationError("qa: n_samples must be >= 0");
    return std::vector<std::string>(static_cast<size_t>(n_samples), answer_);
}

std::vector<std::string> DistinctQa::answers(const std::string& input_text, int n_samples) {
    (void)input_text;
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(std::max(0, n_samples)));
    for (int i = 0; i < n_samples; ++i) out.push_back("guess-" + std::to_string(counter_++));
    return out;
}

std::vector<std::string> ScriptedQa::answers(const std::string& input_text, int n_samples) {
    (void)input_text;
    (void)n_samples;
    if (calls >= script_.size())
        throw BackendError("scripted qa: script exhausted at call " + std::to_string(calls));
    return script_[calls++];
}

std::vector<std::string> FailingQa::answers(const std::string&, int) {
    throw BackendError("qa backend unavailable");
}

namespace {

bool is_subsequence(const std::vector<std::string>& needle,
                    const std::vector<std::string>& haystack) {
    size_t i = 0;
    for (const auto& tok : haystack) {
        if (i < needle.size() && tok == needle[i]) ++i;
    }
    return i == needle.size();
}

} // namespace

OracleQa::OracleQa(const RiddleDataset& dataset, int min_clues, std::string wrong_answer)
    : dataset_(dataset), min_clues_(min_clues), wrong_answer_(std::move(wrong_answer)) {
    if (min_clues < 1) throw ConfigError("oracle qa: min_clues must be >= 1");
    if (wrong_answer_.empty()) throw ConfigError("oracle qa: wrong_answer must be nonempty");
    clue_tokens_.reserve(dataset.riddles.size());
    for (const auto& r : dataset.riddles) {
        std::vector<std::vector<std::string>> per_clue;
        per_clue.reserve(r.clues.size());
        for (const auto& c : r.clues) per_clue.push_back(normalize_tokens(c));
        clue_tokens_.push_back(std::move(per_clue));
    }
}

int OracleQa::identify_riddle(const std::string& input_text, int* clues_present) const {
    std::vector<std::string> tokens = normalize_tokens(input_text);
    int best = -1;
    int best_count = 0;
    bool tied = false;
    for (size_t r = 0; r < clue_tokens_.size(); ++r) {
        int count = 0;
        for (const auto& clue : clue_tokens_[r])
            if (!clue.empty() && is_subsequence(clue, tokens)) ++count;
        if (count > best_count) {
            best = static_cast<int>(r);
            best_count = count;
            tied = false;
        } else if (count == best_count && count > 0) {
            tied = true;
        }
    }
    if (tied) best = -1;
    if (clues_present) *clues_present = best >= 0 ? best_count : 0;
    return best;
}

std::vector<std::string> OracleQa::answers(const std::string& input_text, int n_samples) {
    if (n_samples < 0) throw ValidationError("qa: n_samples must be >= 0");
    int present = 0;
    int r = identify_riddle(input_text, &present);
    const std::string& reply =
        (r >= 0 && present >= min_clues_) ? dataset_.riddles[static_cast<size_t>(r)].answer
                                          : wrong_answer_;
    return std::vector<std::string>(static_cast<size_t>(n_samples), reply);
}

ProcessQa::ProcessQa(const std::string& command) {
    if (command.empty()) throw ConfigError("process qa: empty command");
    std::signal(SIGPIPE, SIG_IGN); // a dead child should surface as EPIPE, not kill us
    int to_child[2] = {-1, -1};
    int from_child[2] = {-1, -1};
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw BackendError("process qa: pipe failed");
    pid_t pid = fork();
    if (pid < 0) throw BackendError("process qa: fork failed");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    child_pid_ = pid;
    to_child_ = fdopen(to_child[1], "w");
    from_child_ = fdopen(from_child[0], "r");
    if (!to_child_ || !from_child_) throw BackendError("process qa: fdopen failed");
}

ProcessQa::~ProcessQa() {
    if (to_child_) fclose(to_child_);
    if (from_child_) fclose(from_child_);
    if (child_pid_ > 0) waitpid(child_pid_, nullptr, 0);
}

std::vector<std::string> ProcessQa::answers(const std::string& input_text, int n_samples) {
    nlohmann::json req{{"input_text", input_text}, {"n_samples", n_samples}};
    std::string line = req.dump();
    line += "\n";
    if (fwrite(line.data(), 1, line.size(), to_child_) != line.size() || fflush(to_child_) != 0)
        throw BackendError("process qa: write to backend failed");

    char* buf = nullptr;
    size_t cap = 0;
    ssize_t n = getline(&buf, &cap, from_child_);
    std::string reply = n > 0 ? std::string(buf, static_cast<size_t>(n)) : std::string();
    free(buf);
    if (n <= 0) throw BackendError("process qa: backend closed the stream");

    nlohmann::json resp = nlohmann::json::parse(reply, nullptr, false);
    if (resp.is_discarded() || !resp.contains("answers") || !resp["answers"].is_array())
        throw BackendError("process qa: malformed response line");
    std::vector<std::string> out;
    for (const auto& a : resp["answers"]) {
        if (!a.is_string()) throw BackendError("process qa: non-string answer");
        out.push_back(a.get<std::string>());
    }
    if (out.size() != static_cast<size_t>(n_samples))
        throw BackendError("process qa: expected " + std::to_string(n_samples) + " answers, got " +
                           std::to_string(out.size()));
    return out;
}

std::shared_ptr<QaPort> make_qa_backend(const std::string& selector,
                                        const RiddleDataset* dataset) {
    auto need_dataset = [&]() -> const RiddleDataset& {
        if (!dataset) throw ConfigError("qa backend '" + selector + "' requires a dataset");
        return *dataset;
    };
    if (selector == "perfect") return std::make_shared<OracleQa>(need_dataset(), 1);
    if (selector == "distinct") return std::make_shared<DistinctQa>();
    if (selector == "failing") return std::make_shared<FailingQa>();
    if (selector.rfind("oracle_after_k:", 0) == 0) {
        std::string arg = selector.substr(15);
        int k = 0;
        try {
            size_t pos = 0;
            k = std::stoi(arg, &pos);
            if (pos != arg.size()) throw std::invalid_argument(arg);
        } catch (const std::exception&) {
            throw ConfigError("qa backend: bad clue count in '" + selector + "'");
        }
        return std::make_shared<OracleQa>(need_dataset(), k);
    }
    if (selector.rfind("constant:", 0) == 0) {
        std::string text = selector.substr(9);
        if (text.empty()) throw ConfigError("qa backend: constant needs an answer text");
        return std::make_shared<ConstantQa>(text);
    }
    if (selector.rfind("process:", 0) == 0) return std::make_shared<ProcessQa>(selector.substr(8));
    throw ConfigError("unknown qa backend selector: " + selector);
}

} // namespace quizpipe
