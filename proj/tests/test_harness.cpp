#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include "quizpipe/adapters.hpp"
#include "quizpipe/config.hpp"
#include "quizpipe/errors.hpp"
#include "quizpipe/harness.hpp"
#include "quizpipe/text.hpp"
#include "temp_util.hpp"

using namespace quizpipe;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Delegates to the dataset oracle for the first `correct_calls` riddles, wrong
// afterwards. eval_all_clues visits riddles in dataset order, one call each.
struct FirstNCorrectQa : QaPort {
    OracleQa inner;
    size_t correct_calls;
    size_t seen = 0;

    FirstNCorrectQa(const RiddleDataset& ds, size_t n) : inner(ds, 1), correct_calls(n) {}

    std::vector<std::string> answers(const std::string& text, int n_samples) override {
        if (seen++ < correct_calls) return inner.answers(text, n_samples);
        return std::vector<std::string>(static_cast<size_t>(n_samples), "not even close");
    }
};

} // namespace

TEST_CASE("name parsers accept known values only") {
    CHECK(protocol_from_name("all_clues") == EvalProtocol::all_clues);
    CHECK(protocol_from_name("mock_live") == EvalProtocol::mock_live);
    CHECK_THROWS_AS(protocol_from_name("live"), ConfigError);

    CHECK(granularity_from_name("per_chunk") == VoteGranularity::per_chunk);
    CHECK(granularity_from_name("per_clue") == VoteGranularity::per_clue);
    CHECK_THROWS_AS(granularity_from_name("per_word"), ConfigError);

    CHECK(report_format_from_name("json") == ReportFormat::json);
    CHECK(report_format_from_name("csv") == ReportFormat::csv);
    CHECK_THROWS_AS(report_format_from_name("xml"), ConfigError);
}

TEST_CASE("eval config validation") {
    EvalConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.threshold = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = EvalConfig{};
    cfg.samples_per_step = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    // Chunking is only consulted by the streamed protocol.
    cfg = EvalConfig{};
    cfg.chunking.words_per_chunk = 0;
    CHECK_NOTHROW(cfg.validate());
    cfg.protocol = EvalProtocol::mock_live;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("synthetic dataset is well formed and uniform") {
    auto ds = synthetic_dataset(10);
    REQUIRE(ds.riddles.size() == 10);
    CHECK(ds.riddles[0].id == "2019-001");
    CHECK(ds.riddles[9].id == "2019-010");
    for (size_t i = 0; i < ds.riddles.size(); ++i) {
        const auto& r = ds.riddles[i];
        CHECK_NOTHROW(validate_riddle(r));
        CHECK(r.subject == static_cast<Subject>(i % 4));
        CHECK(r.clues.size() == 3 + i % 3);
        for (const auto& c : r.clues) {
            CHECK(split_ws(c).size() == static_cast<size_t>(kSyntheticClueWords));
            CHECK(rule_baseline_is_clue(c));
        }
    }
    // Markers keep clue text riddle-unique.
    OracleQa oracle(ds, 1);
    for (size_t i = 0; i < ds.riddles.size(); ++i)
        CHECK(oracle.identify_riddle(ds.riddles[i].clues[0]) == static_cast<int>(i));

    auto other_year = synthetic_dataset(2, 2021);
    CHECK(other_year.riddles[0].id == "2021-001");
    CHECK(other_year.riddles[0].year == 2021);
}

TEST_CASE("eval_all_clues with the perfect oracle answers everything") {
    auto ds = synthetic_dataset(12);
    OracleQa qa(ds, 1);
    auto rep = eval_all_clues(ds, qa, default_prompt_template());
    CHECK(rep.n_riddles == 12);
    CHECK(rep.n_attempted == 12);
    CHECK(rep.em_pct == 100.0);
    CHECK(rep.fm_pct == 100.0);
    for (const auto& rec : rep.records) {
        CHECK(rec.match.em);
        // One shot after hearing everything: scored at the final clue.
        const Riddle* r = ds.find(rec.riddle_id);
        REQUIRE(r != nullptr);
        CHECK(rec.step_index == static_cast<int>(r->clues.size()));
        CHECK(rec.points == 3);
    }
    CHECK(rep.total_points == 36);
}

TEST_CASE("eval_all_clues with a wrong backend scores zero") {
    auto ds = synthetic_dataset(5);
    ConstantQa qa("zebra");
    auto rep = eval_all_clues(ds, qa, default_prompt_template());
    CHECK(rep.em_pct == 0.0);
    CHECK(rep.fm_pct == 0.0);
    CHECK(rep.n_attempted == 5);
    CHECK(rep.total_points == 0);
}

TEST_CASE("eval_all_clues rounds the accuracy to two decimals") {
    auto ds = synthetic_dataset(156);
    FirstNCorrectQa qa(ds, 43);
    auto rep = eval_all_clues(ds, qa, default_prompt_template());
    CHECK(rep.em_pct == 27.56);
    CHECK(rep.n_attempted == 156);
}

TEST_CASE("eval_all_clues leaves failed riddles unattempted and notes them") {
    auto ds = synthetic_dataset(3);
    struct SecondCallFails : QaPort {
        int call = 0;
        std::vector<std::string> answers(const std::string&, int n) override {
            if (call++ == 1) throw BackendError("gpu fell over");
            return std::vector<std::string>(static_cast<size_t>(n), "whatever");
        }
    } qa;
    std::vector<std::string> log;
    auto rep = eval_all_clues(ds, qa, default_prompt_template(), &log);
    CHECK(rep.n_attempted == 2);
    REQUIRE(log.size() == 1);
    CHECK(log[0].find("2019-002") != std::string::npos);
    CHECK(log[0].find("unattempted") != std::string::npos);
    CHECK(log[0].find("gpu fell over") != std::string::npos);
    CHECK_FALSE(rep.records[1].attempted);

    CHECK_THROWS_AS(eval_all_clues(RiddleDataset{}, qa, default_prompt_template()),
                    ValidationError);
}

TEST_CASE("eval_mock_live scores an early confident answer at the right clue") {
    auto ds = synthetic_dataset(1); // 3 clues, 12 words each
    EvalConfig cfg;
    cfg.protocol = EvalProtocol::mock_live;

    SUBCASE("per-clue, confident immediately") {
        cfg.vote_granularity = VoteGranularity::per_clue;
        ScriptedQa qa({{"Specimen 1", "Specimen 1", "Specimen 1"}});
        auto rep = eval_mock_live(ds, qa, cfg, default_prompt_template());
        CHECK(rep.em_pct == 100.0);
        CHECK(rep.records[0].step_index == 1);
        CHECK(rep.records[0].points == 5);
    }
    SUBCASE("per-chunk, confidence on the second chunk maps to clue 2") {
        cfg.vote_granularity = VoteGranularity::per_chunk;
        cfg.chunking.words_per_chunk = kSyntheticClueWords;
        ScriptedQa qa({{"a", "b", "c"},
                       {"Specimen 1", "Specimen 1", "Specimen 1"}});
        auto rep = eval_mock_live(ds, qa, cfg, default_prompt_template());
        REQUIRE(rep.records[0].attempted);
        CHECK(rep.records[0].match.em);
        CHECK(rep.records[0].step_index == 2);
        CHECK(rep.records[0].points == 4);
    }
    SUBCASE("narrow chunks land mid-clue") {
        // 4-word chunks: an attempt on chunk 4 has heard words 13..16, which
        // sit inside clue 2.
        cfg.vote_granularity = VoteGranularity::per_chunk;
        cfg.chunking.words_per_chunk = 4;
        ScriptedQa qa({{"a", "b", "c"},
                       {"d", "e", "f"},
                       {"g", "h", "i"},
                       {"Specimen 1", "Specimen 1", "Specimen 1"}});
        auto rep = eval_mock_live(ds, qa, cfg, default_prompt_template());
        REQUIRE(rep.records[0].attempted);
        CHECK(rep.records[0].step_index == 4);
        CHECK(rep.records[0].points == 4);
    }
    SUBCASE("a wrong confident answer earns nothing") {
        cfg.vote_granularity = VoteGranularity::per_clue;
        ConstantQa qa("chlorophyll");
        auto rep = eval_mock_live(ds, qa, cfg, default_prompt_template());
        CHECK(rep.records[0].attempted);
        CHECK_FALSE(rep.records[0].match.em);
        CHECK(rep.records[0].points == 0);
        CHECK(rep.em_pct == 0.0);
    }
    SUBCASE("never-confident backends never attempt") {
        cfg.vote_granularity = VoteGranularity::per_clue;
        DistinctQa qa;
        auto rep = eval_mock_live(ds, qa, cfg, default_prompt_template());
        CHECK(rep.n_attempted == 0);
        CHECK(rep.em_pct == 0.0);
    }
    SUBCASE("config protocol must match") {
        cfg.protocol = EvalProtocol::all_clues;
        ConstantQa qa("x");
        CHECK_THROWS_AS(eval_mock_live(ds, qa, cfg, default_prompt_template()), ConfigError);
    }
}

TEST_CASE("word-chunks aligned with clues reproduce the per-clue protocol") {
    auto ds = synthetic_dataset(8);
    auto tmpl = default_prompt_template();

    EvalConfig per_clue;
    per_clue.protocol = EvalProtocol::mock_live;
    per_clue.vote_granularity = VoteGranularity::per_clue;
    per_clue.threshold = 4; // forces a second confident step before attempting

    EvalConfig per_chunk = per_clue;
    per_chunk.vote_granularity = VoteGranularity::per_chunk;
    per_chunk.chunking.words_per_chunk = kSyntheticClueWords;

    OracleQa qa_a(ds, 2);
    OracleQa qa_b(ds, 2);
    auto rep_clue = eval_mock_live(ds, qa_a, per_clue, tmpl);
    auto rep_chunk = eval_mock_live(ds, qa_b, per_chunk, tmpl);

    CHECK(rep_clue.em_pct == 100.0);
    CHECK(report_to_json(rep_clue) == report_to_json(rep_chunk));
}

TEST_CASE("human benchmark matches the published accuracy shape") {
    SUBCASE("119 of 156") {
        auto ds = synthetic_dataset(156);
        auto anns = synthetic_annotations(ds, 119, 7);
        auto rep = human_benchmark(ds, anns);
        CHECK(rep.em_pct == 76.28);
        CHECK_FALSE(rep.fm_valid);

        long expect_points = 0;
        size_t expect_attempted = 0;
        for (const auto& a : anns) {
            if (a.answered) ++expect_attempted;
            if (a.correct) expect_points += points_for_clue(*a.clue_number);
        }
        CHECK(rep.total_points == expect_points);
        CHECK(rep.n_attempted == expect_attempted);
    }
    SUBCASE("120 of 160") {
        auto ds = synthetic_dataset(160);
        auto rep = human_benchmark(ds, synthetic_annotations(ds, 120, 7));
        CHECK(rep.em_pct == 75.0);
    }
}

TEST_CASE("human benchmark edge cases") {
    auto ds = synthetic_dataset(3);

    SUBCASE("missing annotations warn and count as unanswered") {
        std::vector<HumanAnnotation> anns;
        HumanAnnotation a;
        a.riddle_id = "2019-001";
        a.answered = true;
        a.clue_number = 1;
        a.correct = true;
        anns.push_back(a);
        std::vector<std::string> log;
        auto rep = human_benchmark(ds, anns, &log);
        CHECK(rep.n_attempted == 1);
        CHECK(rep.total_points == 5); // clue 1 pays full marks
        REQUIRE(log.size() == 2);
        CHECK(log[0].find("no annotation") != std::string::npos);
        CHECK(log[0].find("2019-002") != std::string::npos);
        CHECK(log[1].find("2019-003") != std::string::npos);
    }
    SUBCASE("unknown riddle id") {
        HumanAnnotation a;
        a.riddle_id = "1999-999";
        CHECK_THROWS_WITH_AS(human_benchmark(ds, {a}),
                             doctest::Contains("unknown riddle"), ValidationError);
    }
    SUBCASE("duplicate annotation") {
        HumanAnnotation a;
        a.riddle_id = "2019-001";
        CHECK_THROWS_WITH_AS(human_benchmark(ds, {a, a}),
                             doctest::Contains("duplicate annotation"), ValidationError);
    }
    SUBCASE("clue number beyond the riddle") {
        HumanAnnotation a;
        a.riddle_id = "2019-001"; // riddle one has 3 clues
        a.answered = true;
        a.clue_number = 7;
        a.correct = true;
        CHECK_THROWS_WITH_AS(human_benchmark(ds, {a}),
                             doctest::Contains("out of range"), ValidationError);
    }
    SUBCASE("wrong attempts count as attempted, not as matches") {
        HumanAnnotation a;
        a.riddle_id = "2019-001";
        a.answered = true;
        a.clue_number = 2;
        a.correct = false;
        std::vector<std::string> log;
        auto rep = human_benchmark(ds, {a}, &log);
        CHECK(rep.n_attempted == 1);
        CHECK(rep.em_pct == 0.0);
        CHECK(rep.total_points == 0);
    }
}

TEST_CASE("synthetic annotations are seeded and bounded") {
    auto ds = synthetic_dataset(30);
    auto a = synthetic_annotations(ds, 10, 3);
    auto b = synthetic_annotations(ds, 10, 3);
    REQUIRE(a.size() == 30);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].riddle_id == b[i].riddle_id);
        CHECK(a[i].answered == b[i].answered);
        CHECK(a[i].correct == b[i].correct);
        CHECK(a[i].clue_number == b[i].clue_number);
        if (i < 10) {
            CHECK(a[i].correct);
            REQUIRE(a[i].clue_number.has_value());
            CHECK(*a[i].clue_number >= 1);
            CHECK(*a[i].clue_number <= 3);
        } else {
            CHECK_FALSE(a[i].correct);
        }
        if (a[i].answered) {
            REQUIRE(a[i].clue_number.has_value());
            CHECK(static_cast<size_t>(*a[i].clue_number) <=
                  ds.riddles[i].clues.size());
        }
    }
    CHECK_THROWS_AS(synthetic_annotations(ds, 31, 3), ValidationError);
}

TEST_CASE("json reports round-trip byte for byte") {
    auto ds = synthetic_dataset(9);
    OracleQa qa(ds, 1);
    auto rep = eval_all_clues(ds, qa, default_prompt_template());

    auto text = report_to_json(rep);
    auto back = report_from_json(text);
    CHECK(report_to_json(back) == text);
    CHECK(back.n_riddles == rep.n_riddles);
    CHECK(back.em_pct == rep.em_pct);
    CHECK(back.fm_valid);

    // The human benchmark serializes fm as null and comes back fm-invalid.
    auto hrep = human_benchmark(ds, synthetic_annotations(ds, 5, 1));
    auto htext = report_to_json(hrep);
    CHECK(htext.find("\"fm_pct\": null") != std::string::npos);
    auto hback = report_from_json(htext);
    CHECK_FALSE(hback.fm_valid);
    CHECK(report_to_json(hback) == htext);

    CHECK_THROWS_AS(report_from_json("not json at all {"), ValidationError);
    CHECK_THROWS_AS(report_from_json("{\"n_riddles\": 1}"), ValidationError);
}

TEST_CASE("csv reports list one row per record") {
    auto ds = synthetic_dataset(2);
    OracleQa qa(ds, 1);
    auto rep = eval_all_clues(ds, qa, default_prompt_template());
    auto csv = report_to_csv(rep);
    auto lines = lines_of(csv);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "riddle_id,attempted,answer,step_index,em,fm,points");
    CHECK(lines[1] == "2019-001,true,Specimen 1,3,true,true,3");
    // Riddle two has four clues, so the single shot lands on step 4.
    CHECK(lines[2] == "2019-002,true,Specimen 2,4,true,true,3");
}

TEST_CASE("emit_report writes stable bytes") {
    auto ds = synthetic_dataset(4);
    OracleQa qa(ds, 1);
    auto rep = eval_all_clues(ds, qa, default_prompt_template());

    TempDir tmp;
    auto p1 = tmp.file("a.json");
    auto p2 = tmp.file("b.json");
    emit_report(rep, ReportFormat::json, p1);
    emit_report(rep, ReportFormat::json, p2);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(read_file(p1) == report_to_json(rep));

    auto pc = tmp.file("c.csv");
    emit_report(rep, ReportFormat::csv, pc);
    CHECK(read_file(pc) == report_to_csv(rep));

    CHECK_THROWS_AS(emit_report(rep, ReportFormat::json, "/nonexistent-dir/x.json"), IoError);
}

TEST_CASE("app config defaults are usable") {
    AppConfig cfg;
    CHECK_NOTHROW(validate_template(cfg.prompt));
    CHECK_NOTHROW(cfg.eval.validate());
    CHECK_NOTHROW(cfg.chunk.validate());
    CHECK(cfg.stages.mode == ExecMode::sequential);
    CHECK(cfg.eval.qa_backend == "perfect");
    CHECK(cfg.clock == RunClock::virtual_clock);
    CHECK_FALSE(cfg.detector.start_phrases.empty());
}

TEST_CASE("app config parses sections and rejects unknown keys") {
    using nlohmann::json;

    auto cfg = app_config_from_json(json::parse(R"({
        "detector": {"lenient_keyword": true, "start_phrases": ["round one"]},
        "eval": {"protocol": "mock_live", "threshold": 2, "qa_backend": "distinct",
                 "chunking": {"words_per_chunk": 12}},
        "stages": {"mode": "pipelined", "queue_capacity": 3,
                   "latency": {"qa": {"kind": "uniform", "low": 0.5, "high": 1.5},
                               "tts": {"kind": "normal", "mean": 1.0, "stddev": 0.1}}},
        "chunk": {"chunk_seconds": 2.5},
        "stt": {"error_prob": 0.25, "rewrites": {"first": "test"}},
        "run": {"abort_after_failures": 2, "clock": "wall"}
    })"));

    CHECK(cfg.detector.lenient_keyword);
    CHECK(cfg.detector.start_phrases == std::vector<std::string>{"round one"});
    CHECK(cfg.eval.protocol == EvalProtocol::mock_live);
    CHECK(cfg.eval.threshold == 2);
    CHECK(cfg.eval.qa_backend == "distinct");
    CHECK(cfg.eval.chunking.words_per_chunk == 12);
    CHECK(cfg.stages.mode == ExecMode::pipelined);
    CHECK(cfg.stages.queue_capacity == 3);
    CHECK(cfg.stages.latency[2].kind == LatencyModel::Kind::uniform);
    CHECK(cfg.stages.latency[2].a == 0.5);
    CHECK(cfg.stages.latency[3].kind == LatencyModel::Kind::normal);
    CHECK(cfg.stages.latency[0].kind == LatencyModel::Kind::fixed); // untouched default
    CHECK(cfg.stages.latency[0].a == 0.94);
    CHECK(cfg.chunk.chunk_seconds == 2.5);
    CHECK(cfg.chunk.words_per_chunk == 7); // untouched default
    CHECK(cfg.stt_error_prob == 0.25);
    CHECK(cfg.stt_rewrites.at("first") == "test");
    CHECK(cfg.abort_after_failures == 2);
    CHECK(cfg.clock == RunClock::wall_clock);

    auto throws_with = [](const char* text, const char* needle) {
        CHECK_THROWS_WITH_AS(app_config_from_json(nlohmann::json::parse(text)),
                             doctest::Contains(needle), ConfigError);
    };
    throws_with(R"({"detctor": {}})", "unknown key 'detctor'");
    throws_with(R"({"detector": {"strat_phrases": []}})", "unknown key 'strat_phrases'");
    throws_with(R"({"eval": {"thresold": 3}})", "unknown key 'thresold'");
    throws_with(R"({"stages": {"latency": {"asr": {"kind": "fixed", "seconds": 1}}}})",
                "unknown key 'asr'");
    throws_with(R"({"stages": {"latency": {"qa": {"kind": "fixed", "low": 1}}}})",
                "unknown key 'low'");
    throws_with(R"({"stages": {"latency": {"qa": {"kind": "gamma"}}}})",
                "kind fixed|uniform|normal");
    throws_with(R"({"stages": {"mode": "parallel"}})", "sequential or pipelined");
    throws_with(R"({"stt": {"error_prob": 1.5}})", "error_prob");
    throws_with(R"({"run": {"clock": "cpu"}})", "virtual or wall");
    throws_with(R"({"eval": {"threshold": 0}})", "threshold");
    throws_with(R"({"chunk": {"chunk_seconds": -1}})", "chunk_seconds");

    // Bad value types are config errors, not json exceptions.
    throws_with(R"({"eval": {"threshold": "three"}})", "bad value");
}

TEST_CASE("prompt section needs the full five-field template") {
    using nlohmann::json;
    auto cfg = app_config_from_json(json::parse(R"({
        "prompt": {"role_preamble": "quiz body",
                   "reasoning_instruction": "think",
                   "penalty_clause": "short answers only",
                   "few_shot_example": {"clues": "i am an example", "answer": "example"},
                   "output_format_instruction": "answer as json"}
    })"));
    CHECK(cfg.prompt.role_preamble == "quiz body");
    CHECK(cfg.prompt.few_shot_example.answer == "example");

    // Clearing any field through the config is rejected.
    CHECK_THROWS_AS(app_config_from_json(json::parse(
                        R"({"prompt": {"penalty_clause": ""}})")),
                    ValidationError);
    CHECK_THROWS_AS(app_config_from_json(json::parse(
                        R"({"prompt": {"few_shot_example": {"answer": ""}}})")),
                    ValidationError);
    CHECK_THROWS_AS(app_config_from_json(json::parse(
                        R"({"prompt": {"few_shot_example": {"reply": "x"}}})")),
                    ConfigError);
}

TEST_CASE("load_app_config reads files and reports problems") {
    TempDir tmp;
    auto good = tmp.file("good.json");
    write_file(good, R"({"eval": {"seed": 99}})");
    CHECK(load_app_config(good).eval.seed == 99);

    auto bad = tmp.file("bad.json");
    write_file(bad, "{ not json");
    CHECK_THROWS_AS(load_app_config(bad), ConfigError);

    CHECK_THROWS_AS(load_app_config(tmp.file("missing.json")), IoError);
}
