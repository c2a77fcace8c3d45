#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace quizpipe {

enum class StageName { stt, qe, qa, tts };
inline constexpr std::array<StageName, 4> kStageOrder = {StageName::stt, StageName::qe,
                                                         StageName::qa, StageName::tts};
std::string_view stage_name(StageName s);

struct LatencyModel {
    enum class Kind { fixed, uniform, normal };
    Kind kind = Kind::fixed;
    double a = 0.0; // fixed value / uniform low / normal mean
    double b = 0.0; // uniform high / normal stddev

    void validate() const; // throws ConfigError
};

enum class ExecMode { sequential, pipelined };

struct StagePlan {
    std::array<LatencyModel, 4> latency; // stt, qe, qa, tts order
    ExecMode mode = ExecMode::sequential;
    int queue_capacity = 8; // pipelined mode, per inter-stage queue
};

// Measured defaults: STT 0.94 s, QE 0.05 s, QA 1.0 s, TTS 1.05 s.
StagePlan default_stage_plan();

struct ChunkPlan {
    double chunk_seconds = 5.0;
    int words_per_chunk = 7;

    void validate() const;
};

struct ChunkTiming {
    long seq = 0;
    double arrival_s = 0.0;
    double completion_s = 0.0;
    double lag_s = 0.0;
    std::array<double, 4> stage_completion_s{};
};

struct TimingReport {
    std::vector<ChunkTiming> per_chunk;
    double max_lag_s = 0.0;
    double mean_lag_s = 0.0;
    double throughput_chunks_per_s = 0.0;
};

// Draw per-chunk stage latencies from the plan's models; row = chunk.
std::vector<std::array<double, 4>> draw_latencies(const StagePlan& plan, int n_chunks,
                                                  uint64_t seed);

// Discrete-event simulation over explicit arrivals and per-chunk latencies.
// Sequential: one worker carries each chunk through all stages before the
// next starts. Pipelined: one worker per stage, bounded FIFO queues between
// them (blocking push). The source queue is unbounded because a live stream
// cannot be backpressured; that is exactly how lag accumulates.
TimingReport simulate_stage_timing(const std::vector<double>& arrivals,
                                   const std::vector<std::array<double, 4>>& latencies,
                                   ExecMode mode, int queue_capacity);

// Chunk i arrives at i * chunk_seconds. Deterministic for a fixed seed.
TimingReport simulate_timing(const StagePlan& plan, const ChunkPlan& chunk, int n_chunks,
                             uint64_t seed);

} // namespace quizpipe
