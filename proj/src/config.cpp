#include "quizpipe/config.hpp"

#include <fstream>
#include <initializer_list>

#include "quizpipe/errors.hpp"

namespace quizpipe {

AppConfig::AppConfig()
    : detector(default_detector_config()),
      prompt(default_prompt_template()),
      stages(default_stage_plan()) {}

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

void read_detector(const json& j, DetectorConfig& out) {
    check_keys(j, "detector", {"start_phrases", "end_phrases", "lenient_keyword", "classifier"});
    read(j, "start_phrases", out.start_phrases);
    read(j, "end_phrases", out.end_phrases);
    read(j, "lenient_keyword", out.lenient_keyword);
    read(j, "classifier", out.classifier);
}

void read_prompt(const json& j, PromptTemplate& out) {
    check_keys(j, "prompt", {"role_preamble", "reasoning_instruction", "penalty_clause",
                             "few_shot_example", "output_format_instruction"});
    read(j, "role_preamble", out.role_preamble);
    read(j, "reasoning_instruction", out.reasoning_instruction);
    read(j, "penalty_clause", out.penalty_clause);
    if (j.contains("few_shot_example")) {
        const json& ex = j.at("few_shot_example");
        check_keys(ex, "prompt.few_shot_example", {"clues", "answer"});
        read(ex, "clues", out.few_shot_example.clues);
        read(ex, "answer", out.few_shot_example.answer);
    }
    read(j, "output_format_instruction", out.output_format_instruction);
    validate_template(out);
}

void read_chunk(const json& j, ChunkPlan& out) {
    check_keys(j, "chunk", {"chunk_seconds", "words_per_chunk"});
    read(j, "chunk_seconds", out.chunk_seconds);
    read(j, "words_per_chunk", out.words_per_chunk);
    out.validate();
}

LatencyModel read_latency_model(const json& j, const std::string& where) {
    LatencyModel m;
    std::string kind;
    read(j, "kind", kind);
    if (kind == "fixed") {
        check_keys(j, where, {"kind", "seconds"});
        m.kind = LatencyModel::Kind::fixed;
        read(j, "seconds", m.a);
    } else if (kind == "uniform") {
        check_keys(j, where, {"kind", "low", "high"});
        m.kind = LatencyModel::Kind::uniform;
        read(j, "low", m.a);
        read(j, "high", m.b);
    } else if (kind == "normal") {
        check_keys(j, where, {"kind", "mean", "stddev"});
        m.kind = LatencyModel::Kind::normal;
        read(j, "mean", m.a);
        read(j, "stddev", m.b);
    } else {
        throw ConfigError("config: " + where + " needs kind fixed|uniform|normal");
    }
    m.validate();
    return m;
}

void read_stages(const json& j, StagePlan& out) {
    check_keys(j, "stages", {"mode", "queue_capacity", "latency"});
    if (j.contains("mode")) {
        std::string mode;
        read(j, "mode", mode);
        if (mode == "sequential")
            out.mode = ExecMode::sequential;
        else if (mode == "pipelined")
            out.mode = ExecMode::pipelined;
        else
            throw ConfigError("config: stages.mode must be sequential or pipelined");
    }
    read(j, "queue_capacity", out.queue_capacity);
    if (out.queue_capacity < 1) throw ConfigError("config: stages.queue_capacity must be >= 1");
    if (j.contains("latency")) {
        const json& lat = j.at("latency");
        check_keys(lat, "stages.latency", {"stt", "qe", "qa", "tts"});
        for (size_t s = 0; s < kStageOrder.size(); ++s) {
            std::string name(stage_name(kStageOrder[s]));
            if (lat.contains(name))
                out.latency[s] = read_latency_model(lat.at(name), "stages.latency." + name);
        }
    }
}

void read_eval(const json& j, EvalConfig& out) {
    check_keys(j, "eval", {"protocol", "threshold", "samples_per_step", "vote_granularity",
                           "seed", "qa_backend", "chunking"});
    if (j.contains("protocol")) {
        std::string name;
        read(j, "protocol", name);
        out.protocol = protocol_from_name(name);
    }
    read(j, "threshold", out.threshold);
    read(j, "samples_per_step", out.samples_per_step);
    if (j.contains("vote_granularity")) {
        std::string name;
        read(j, "vote_granularity", name);
        out.vote_granularity = granularity_from_name(name);
    }
    read(j, "seed", out.seed);
    read(j, "qa_backend", out.qa_backend);
    if (j.contains("chunking")) {
        const json& c = j.at("chunking");
        check_keys(c, "eval.chunking", {"chunk_seconds", "words_per_chunk"});
        read(c, "chunk_seconds", out.chunking.chunk_seconds);
        read(c, "words_per_chunk", out.chunking.words_per_chunk);
    }
    out.validate();
}

void read_stt(const json& j, AppConfig& out) {
    check_keys(j, "stt", {"error_prob", "rewrites"});
    read(j, "error_prob", out.stt_error_prob);
    if (out.stt_error_prob < 0.0 || out.stt_error_prob > 1.0)
        throw ConfigError("config: stt.error_prob must be in [0, 1]");
    read(j, "rewrites", out.stt_rewrites);
}

void read_run(const json& j, AppConfig& out) {
    check_keys(j, "run", {"abort_after_failures", "clock"});
    read(j, "abort_after_failures", out.abort_after_failures);
    if (out.abort_after_failures < 1)
        throw ConfigError("config: run.abort_after_failures must be >= 1");
    if (j.contains("clock")) {
        std::string clock;
        read(j, "clock", clock);
        if (clock == "virtual")
            out.clock = RunClock::virtual_clock;
        else if (clock == "wall")
            out.clock = RunClock::wall_clock;
        else
            throw ConfigError("config: run.clock must be virtual or wall");
    }
}

} // namespace

AppConfig app_config_from_json(const nlohmann::json& j) {
    AppConfig out;
    check_keys(j, "config root", {"detector", "prompt", "eval", "stages", "chunk", "stt", "run"});
    if (j.contains("detector")) read_detector(j.at("detector"), out.detector);
    if (j.contains("prompt")) read_prompt(j.at("prompt"), out.prompt);
    if (j.contains("eval")) read_eval(j.at("eval"), out.eval);
    if (j.contains("stages")) read_stages(j.at("stages"), out.stages);
    if (j.contains("chunk")) read_chunk(j.at("chunk"), out.chunk);
    if (j.contains("stt")) read_stt(j.at("stt"), out);
    if (j.contains("run")) read_run(j.at("run"), out);
    return out;
}

AppConfig load_app_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open config " + path);
    nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + path + ": invalid JSON");
    return app_config_from_json(j);
}

} // namespace quizpipe
