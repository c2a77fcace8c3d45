#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "quizpipe/harness.hpp"
#include "quizpipe/pipeline.hpp"
#include "quizpipe/policy.hpp"
#include "quizpipe/segmentation.hpp"
#include "quizpipe/timing.hpp"

namespace quizpipe {

// Everything the CLI can configure, with working defaults.
struct AppConfig {
    DetectorConfig detector;
    PromptTemplate prompt;
    EvalConfig eval;
    StagePlan stages;
    ChunkPlan chunk;
    double stt_error_prob = 0.0;
    std::map<std::string, std::string> stt_rewrites;
    int abort_after_failures = 5;
    RunClock clock = RunClock::virtual_clock;

    AppConfig();
};

// JSON config: top-level sections detector, prompt, eval, stages, chunk, stt,
// run; every section and key optional. Unknown keys are rejected so typos
// fail loudly instead of silently keeping a default.
AppConfig app_config_from_json(const nlohmann::json& j);
AppConfig load_app_config(const std::string& path);

} // namespace quizpipe
