#include "quizpipe/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "quizpipe/csv.hpp"
#include "quizpipe/errors.hpp"
#include "quizpipe/pipeline.hpp"
#include "quizpipe/rng.hpp"
#include "quizpipe/text.hpp"

namespace quizpipe {

EvalProtocol protocol_from_name(const std::string& name) {
    if (name == "all_clues") return EvalProtocol::all_clues;
    if (name == "mock_live") return EvalProtocol::mock_live;
    throw ConfigError("unknown protocol: " + name);
}

VoteGranularity granularity_from_name(const std::string& name) {
    if (name == "per_chunk") return VoteGranularity::per_chunk;
    if (name == "per_clue") return VoteGranularity::per_clue;
    throw ConfigError("unknown vote granularity: " + name);
}

ReportFormat report_format_from_name(const std::string& name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    throw ConfigError("unknown report format: " + name);
}

void EvalConfig::validate() const {
    if (threshold < 1) throw ConfigError("eval config: threshold must be >= 1");
    if (samples_per_step < 1) throw ConfigError("eval config: samples_per_step must be >= 1");
    if (protocol == EvalProtocol::mock_live) chunking.validate();
}

namespace {

void note(std::vector<std::string>* log, std::string msg) {
    if (log)
        log->push_back(std::move(msg));
    else
        std::clog << msg << '\n';
}

// 1-based clue index containing the word_ordinal-th word of the concatenated
// clue text; ordinals past the end land in the last clue.
int clue_containing_word(const Riddle& r, size_t word_ordinal) {
    size_t cum = 0;
    for (size_t i = 0; i < r.clues.size(); ++i) {
        cum += split_ws(r.clues[i]).size();
        if (word_ordinal <= cum) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(r.clues.size());
}

} // namespace

EvalReport eval_all_clues(const RiddleDataset& dataset, QaPort& qa, const PromptTemplate& tmpl,
                          std::vector<std::string>* log) {
    if (dataset.riddles.empty()) throw ValidationError("eval_all_clues: empty dataset");
    std::vector<AttemptRecord> records;
    records.reserve(dataset.riddles.size());
    for (const auto& r : dataset.riddles) {
        AttemptRecord rec;
        rec.riddle_id = r.id;
        try {
            std::string prompt = build_prompt(r.clues, tmpl);
            std::vector<std::string> ans = qa.answers(prompt, 1);
            if (ans.size() != 1)
                throw BackendError("qa returned " + std::to_string(ans.size()) +
                                   " answers, expected 1");
            rec.attempted = true;
            rec.answer = ans[0];
            rec.step_index = static_cast<int>(r.clues.size());
            rec.match = match_answer(ans[0], r);
            rec.points = rec.match.em ? points_for_clue(rec.step_index) : 0;
        } catch (const std::exception& e) {
            rec = AttemptRecord{};
            rec.riddle_id = r.id;
            note(log, r.id + ": unattempted: " + e.what());
        }
        records.push_back(std::move(rec));
    }
    return aggregate_report(std::move(records), dataset);
}

EvalReport eval_mock_live(const RiddleDataset& dataset, QaPort& qa, const EvalConfig& config,
                          const PromptTemplate& tmpl, std::vector<std::string>* log) {
    if (dataset.riddles.empty()) throw ValidationError("eval_mock_live: empty dataset");
    if (config.protocol != EvalProtocol::mock_live)
        throw ConfigError("eval_mock_live: config.protocol must be mock_live");
    config.validate();

    std::vector<AttemptRecord> records;
    records.reserve(dataset.riddles.size());
    for (const auto& r : dataset.riddles) {
        std::vector<std::string> units = config.vote_granularity == VoteGranularity::per_chunk
                                             ? chunk_words(r.all_clues_text(), config.chunking)
                                             : r.clues;
        std::vector<std::vector<std::string>> steps;
        steps.reserve(units.size());
        std::vector<std::string> acc;
        for (auto& u : units) {
            acc.push_back(std::move(u));
            steps.push_back(acc);
        }

        AttemptRecord rec;
        rec.riddle_id = r.id;
        try {
            PolicyOutcome out =
                run_policy(steps, qa, config.threshold, tmpl, config.samples_per_step);
            for (const auto& line : out.log) note(log, r.id + ": " + line);
            if (out.attempted) {
                rec.attempted = true;
                rec.answer = out.answer;
                rec.step_index = out.step_index;
                rec.match = match_answer(*out.answer, r);
                int clue_no = out.step_index;
                if (config.vote_granularity == VoteGranularity::per_chunk) {
                    size_t consumed = static_cast<size_t>(out.step_index) *
                                      static_cast<size_t>(config.chunking.words_per_chunk);
                    clue_no = clue_containing_word(r, consumed);
                }
                rec.points = rec.match.em ? points_for_clue(clue_no) : 0;
            }
        } catch (const std::exception& e) {
            rec = AttemptRecord{};
            rec.riddle_id = r.id;
            note(log, r.id + ": unattempted: " + e.what());
        }
        records.push_back(std::move(rec));
    }
    return aggregate_report(std::move(records), dataset);
}

EvalReport human_benchmark(const RiddleDataset& dataset,
                           const std::vector<HumanAnnotation>& annotations,
                           std::vector<std::string>* log) {
    if (dataset.riddles.empty()) throw ValidationError("human_benchmark: empty dataset");
    std::unordered_map<std::string, const HumanAnnotation*> by_id;
    for (const auto& a : annotations) {
        if (!dataset.find(a.riddle_id))
            throw ValidationError("human_benchmark: annotation for unknown riddle " + a.riddle_id);
        if (!by_id.emplace(a.riddle_id, &a).second)
            throw ValidationError("human_benchmark: duplicate annotation for riddle " +
                                  a.riddle_id);
    }

    std::vector<AttemptRecord> records;
    records.reserve(dataset.riddles.size());
    for (const auto& r : dataset.riddles) {
        AttemptRecord rec;
        rec.riddle_id = r.id;
        auto it = by_id.find(r.id);
        if (it == by_id.end()) {
            note(log, "no annotation for riddle " + r.id + "; counted as unanswered");
        } else if (it->second->answered) {
            const HumanAnnotation& a = *it->second;
            if (!a.clue_number)
                throw ValidationError("human_benchmark: answered without clue_number for " + r.id);
            if (*a.clue_number < 1 || static_cast<size_t>(*a.clue_number) > r.clues.size())
                throw ValidationError("human_benchmark: clue_number out of range for " + r.id);
            rec.attempted = true;
            rec.step_index = *a.clue_number;
            rec.match.em = a.correct;
            rec.match.fm = a.correct; // fm is not observable for spoken answers
            rec.points = a.correct ? points_for_clue(*a.clue_number) : 0;
        }
        records.push_back(std::move(rec));
    }
    EvalReport rep = aggregate_report(std::move(records), dataset);
    rep.fm_valid = false;
    return rep;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["n_riddles"] = report.n_riddles;
    j["n_attempted"] = report.n_attempted;
    j["em_pct"] = report.em_pct;
    j["fm_pct"] = report.fm_valid ? nlohmann::ordered_json(report.fm_pct)
                                  : nlohmann::ordered_json(nullptr);
    j["total_points"] = report.total_points;
    auto subjects = nlohmann::ordered_json::object();
    for (const auto& [s, st] : report.per_subject) {
        nlohmann::ordered_json e;
        e["em_pct"] = st.em_pct;
        e["fm_pct"] = report.fm_valid ? nlohmann::ordered_json(st.fm_pct)
                                      : nlohmann::ordered_json(nullptr);
        subjects[std::string(subject_name(s))] = e;
    }
    j["per_subject"] = subjects;
    auto records = nlohmann::ordered_json::array();
    for (const auto& rec : report.records) {
        nlohmann::ordered_json e;
        e["riddle_id"] = rec.riddle_id;
        e["attempted"] = rec.attempted;
        e["answer"] =
            rec.answer ? nlohmann::ordered_json(*rec.answer) : nlohmann::ordered_json(nullptr);
        e["step_index"] = rec.step_index;
        e["em"] = rec.match.em;
        e["fm"] = rec.match.fm;
        e["matched_truth"] = rec.match.matched_truth
                                 ? nlohmann::ordered_json(*rec.match.matched_truth)
                                 : nlohmann::ordered_json(nullptr);
        e["points"] = rec.points;
        records.push_back(std::move(e));
    }
    j["records"] = std::move(records);
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("report json: parse error");
    try {
        EvalReport rep;
        rep.n_riddles = j.at("n_riddles").get<size_t>();
        rep.n_attempted = j.at("n_attempted").get<size_t>();
        rep.em_pct = j.at("em_pct").get<double>();
        rep.fm_valid = !j.at("fm_pct").is_null();
        rep.fm_pct = rep.fm_valid ? j.at("fm_pct").get<double>() : 0.0;
        rep.total_points = j.at("total_points").get<long>();
        for (const auto& [name, e] : j.at("per_subject").items()) {
            auto subj = subject_from_name(name);
            if (!subj) throw ValidationError("report json: unknown subject " + name);
            SubjectStats st;
            st.em_pct = e.at("em_pct").get<double>();
            st.fm_pct = e.at("fm_pct").is_null() ? 0.0 : e.at("fm_pct").get<double>();
            rep.per_subject[*subj] = st;
        }
        for (const auto& e : j.at("records")) {
            AttemptRecord rec;
            rec.riddle_id = e.at("riddle_id").get<std::string>();
            rec.attempted = e.at("attempted").get<bool>();
            if (!e.at("answer").is_null()) rec.answer = e.at("answer").get<std::string>();
            rec.step_index = e.at("step_index").get<int>();
            rec.match.em = e.at("em").get<bool>();
            rec.match.fm = e.at("fm").get<bool>();
            if (!e.at("matched_truth").is_null())
                rec.match.matched_truth = e.at("matched_truth").get<std::string>();
            rec.points = e.at("points").get<int>();
            rep.records.push_back(std::move(rec));
        }
        return rep;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("report json: ") + e.what());
    }
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    write_csv_row(out, {"riddle_id", "attempted", "answer", "step_index", "em", "fm", "points"});
    auto b = [](bool v) { return v ? std::string("true") : std::string("false"); };
    for (const auto& rec : report.records) {
        write_csv_row(out, {rec.riddle_id, b(rec.attempted), rec.answer.value_or(""),
                            std::to_string(rec.step_index), b(rec.match.em), b(rec.match.fm),
                            std::to_string(rec.points)});
    }
    return out.str();
}

void emit_report(const EvalReport& report, ReportFormat format, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write report to " + path);
    f << (format == ReportFormat::json ? report_to_json(report) : report_to_csv(report));
    if (!f.good()) throw IoError("write failed for " + path);
}

RiddleDataset synthetic_dataset(size_t n_riddles, int year) {
    RiddleDataset ds;
    ds.source_path = "synthetic";
    ds.riddles.reserve(n_riddles);
    for (size_t i = 0; i < n_riddles; ++i) {
        Riddle r;
        char idbuf[32];
        std::snprintf(idbuf, sizeof idbuf, "%04d-%03zu", year, i + 1);
        r.id = idbuf;
        r.year = year;
        r.contest = "synthetic";
        r.subject = static_cast<Subject>(i % 4);
        std::string marker = "specimen" + std::to_string(year) + "x" + std::to_string(i + 1);
        size_t n_clues = 3 + i % 3;
        for (size_t k = 0; k < n_clues; ++k)
            r.clues.push_back("i am hint " + std::to_string(k + 1) + " about " + marker +
                              " and my subject group is " +
                              std::string(subject_name(r.subject)));
        r.answer = "Specimen " + std::to_string(i + 1);
        if (i % 3 == 0) r.alt_answers.push_back("the specimen " + std::to_string(i + 1) + " organism");
        validate_riddle(r);
        ds.riddles.push_back(std::move(r));
    }
    return ds;
}

std::vector<HumanAnnotation> synthetic_annotations(const RiddleDataset& dataset, size_t n_correct,
                                                   uint64_t seed) {
    if (n_correct > dataset.riddles.size())
        throw ValidationError("synthetic_annotations: n_correct exceeds dataset size");
    Rng rng(mix_seed(seed, 0xbe11));
    std::vector<HumanAnnotation> out;
    out.reserve(dataset.riddles.size());
    for (size_t i = 0; i < dataset.riddles.size(); ++i) {
        const Riddle& r = dataset.riddles[i];
        HumanAnnotation a;
        a.riddle_id = r.id;
        if (i < n_correct) {
            a.answered = true;
            a.correct = true;
            a.clue_number = 1 + static_cast<int>(rng.below(std::min<uint64_t>(3, r.clues.size())));
        } else if (rng.below(2) == 0) {
            a.answered = true;
            a.correct = false;
            a.clue_number = 1 + static_cast<int>(rng.below(r.clues.size()));
        }
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace quizpipe
