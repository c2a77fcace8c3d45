#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "quizpipe/adapters.hpp"
#include "quizpipe/config.hpp"
#include "quizpipe/errors.hpp"
#include "quizpipe/harness.hpp"
#include "quizpipe/pipeline.hpp"

namespace qp = quizpipe;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string dataset_path;
    std::string out_path;
    std::string format = "json";
    std::optional<uint64_t> seed;
    int year = 2019;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool dataset_required) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    auto* ds = cmd->add_option("--dataset", f.dataset_path, "riddle CSV file");
    if (dataset_required) ds->required();
    cmd->add_option("--out", f.out_path, "write the report here instead of stdout");
    cmd->add_option("--format", f.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", f.seed, "override the config seed");
    cmd->add_option("--year", f.year, "contest year for datasets without a Year column");
}

qp::AppConfig load_config(const CommonFlags& f) {
    qp::AppConfig cfg = f.config_path.empty() ? qp::AppConfig() : qp::load_app_config(f.config_path);
    if (f.seed) cfg.eval.seed = *f.seed;
    return cfg;
}

void write_out(const qp::EvalReport& report, const CommonFlags& f) {
    qp::ReportFormat format = qp::report_format_from_name(f.format);
    if (f.out_path.empty()) {
        std::cout << (format == qp::ReportFormat::json ? qp::report_to_json(report)
                                                       : qp::report_to_csv(report));
    } else {
        qp::emit_report(report, format, f.out_path);
    }
}

nlohmann::ordered_json timing_to_json(const qp::TimingReport& t) {
    nlohmann::ordered_json j;
    j["n_chunks"] = t.per_chunk.size();
    j["max_lag_s"] = t.max_lag_s;
    j["mean_lag_s"] = t.mean_lag_s;
    j["throughput_chunks_per_s"] = t.throughput_chunks_per_s;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& c : t.per_chunk) {
        rows.push_back(nlohmann::ordered_json{{"seq", c.seq},
                                              {"arrival_s", c.arrival_s},
                                              {"completion_s", c.completion_s},
                                              {"lag_s", c.lag_s}});
    }
    j["per_chunk"] = std::move(rows);
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quiz riddle pipeline: streaming contestant engine and evaluation harness"};
    app.require_subcommand(1);

    CommonFlags all_flags, mock_flags, human_flags, timing_flags, live_flags;
    std::string backend_override, annotations_path, transcript_path, events_path;
    std::optional<int> threshold_override;
    std::string timing_mode = "sequential";
    int timing_chunks = 20;

    CLI::App* cmd_all = app.add_subcommand("eval-all-clues", "score one answer per riddle");
    add_common(cmd_all, all_flags, true);
    cmd_all->add_option("--backend", backend_override, "QA backend selector");

    CLI::App* cmd_mock = app.add_subcommand("eval-mock-live", "score streamed chunk voting");
    add_common(cmd_mock, mock_flags, true);
    cmd_mock->add_option("--backend", backend_override, "QA backend selector");
    cmd_mock->add_option("--threshold", threshold_override, "vote threshold");

    CLI::App* cmd_human = app.add_subcommand("human-benchmark", "score human annotations");
    add_common(cmd_human, human_flags, true);
    cmd_human->add_option("--annotations", annotations_path, "annotation CSV")->required();

    CLI::App* cmd_timing = app.add_subcommand("simulate-timing", "stage latency simulation");
    add_common(cmd_timing, timing_flags, false);
    cmd_timing->add_option("--mode", timing_mode, "sequential or pipelined")
        ->check(CLI::IsMember({"sequential", "pipelined"}));
    cmd_timing->add_option("--chunks", timing_chunks, "number of chunks")
        ->check(CLI::PositiveNumber);

    CLI::App* cmd_live = app.add_subcommand("run-live", "replay a transcript through the stages");
    add_common(cmd_live, live_flags, false);
    cmd_live->add_option("--transcript", transcript_path, "timed transcript CSV")->required();
    cmd_live->add_option("--events", events_path, "write the event log here (ndjson)");
    cmd_live->add_option("--backend", backend_override, "QA backend selector");
    cmd_live->add_option("--threshold", threshold_override, "vote threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (cmd_all->parsed() || cmd_mock->parsed()) {
            const CommonFlags& f = cmd_all->parsed() ? all_flags : mock_flags;
            qp::AppConfig cfg = load_config(f);
            if (!backend_override.empty()) cfg.eval.qa_backend = backend_override;
            if (threshold_override) cfg.eval.threshold = *threshold_override;
            qp::RiddleDataset ds = qp::load_riddle_dataset(f.dataset_path, f.year);
            std::shared_ptr<qp::QaPort> qa = qp::make_qa_backend(cfg.eval.qa_backend, &ds);
            qp::EvalReport report;
            if (cmd_all->parsed()) {
                report = qp::eval_all_clues(ds, *qa, cfg.prompt);
            } else {
                cfg.eval.protocol = qp::EvalProtocol::mock_live;
                report = qp::eval_mock_live(ds, *qa, cfg.eval, cfg.prompt);
            }
            write_out(report, f);
            return 0;
        }
        if (cmd_human->parsed()) {
            qp::RiddleDataset ds = qp::load_riddle_dataset(human_flags.dataset_path, human_flags.year);
            std::vector<qp::HumanAnnotation> anns = qp::load_annotations(annotations_path);
            write_out(qp::human_benchmark(ds, anns), human_flags);
            return 0;
        }
        if (cmd_timing->parsed()) {
            qp::AppConfig cfg = load_config(timing_flags);
            cfg.stages.mode =
                timing_mode == "pipelined" ? qp::ExecMode::pipelined : qp::ExecMode::sequential;
            qp::TimingReport t =
                qp::simulate_timing(cfg.stages, cfg.chunk, timing_chunks, cfg.eval.seed);
            std::string text = timing_to_json(t).dump(2) + "\n";
            if (timing_flags.out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(timing_flags.out_path, std::ios::binary);
                if (!out) throw qp::IoError("cannot write " + timing_flags.out_path);
                out << text;
            }
            return 0;
        }
        if (cmd_live->parsed()) {
            qp::AppConfig cfg = load_config(live_flags);
            if (!backend_override.empty()) cfg.eval.qa_backend = backend_override;
            if (threshold_override) cfg.eval.threshold = *threshold_override;

            std::optional<qp::RiddleDataset> ds;
            if (!live_flags.dataset_path.empty())
                ds = qp::load_riddle_dataset(live_flags.dataset_path, live_flags.year);

            qp::AdapterSuite suite;
            suite.stt = std::make_shared<qp::ReplaySttAdapter>(cfg.stt_error_prob, cfg.eval.seed,
                                                               cfg.stt_rewrites);
            suite.classifier = qp::make_classifier(cfg.detector.classifier);
            suite.qa = qp::make_qa_backend(cfg.eval.qa_backend, ds ? &*ds : nullptr);
            suite.tts = std::make_shared<qp::StubTtsAdapter>();

            qp::PipelineOptions opts;
            opts.chunk = cfg.chunk;
            opts.detector = cfg.detector;
            opts.threshold = cfg.eval.threshold;
            opts.samples_per_step = cfg.eval.samples_per_step;
            opts.prompt = cfg.prompt;
            opts.plan = cfg.stages;
            opts.clock = cfg.clock;
            opts.seed = cfg.eval.seed;
            opts.abort_after_failures = cfg.abort_after_failures;
            opts.truth = ds ? &*ds : nullptr;

            std::vector<qp::TimedSegment> source = qp::load_transcript_csv(transcript_path);
            qp::RunResult run = qp::run_pipeline(source, suite, opts);

            if (!events_path.empty()) {
                std::ofstream out(events_path, std::ios::binary);
                if (!out) throw qp::IoError("cannot write " + events_path);
                for (const auto& ev : run.events) out << qp::to_json_line(ev) << "\n";
            }
            if (ds) {
                write_out(qp::aggregate_report(run.records, *ds), live_flags);
            } else {
                nlohmann::ordered_json j;
                j["events"] = run.events.size();
                j["attempts"] = run.records.size();
                j["aborted"] = run.aborted;
                j["timing"] = timing_to_json(run.timing);
                std::cout << j.dump(2) << "\n";
            }
            if (run.aborted) {
                std::cerr << "aborted: " << run.diagnostic << "\n";
                return 2;
            }
            return 0;
        }
        return 0;
    } catch (const qp::BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
