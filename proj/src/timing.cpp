#include "quizpipe/timing.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>

#include "quizpipe/errors.hpp"
#include "quizpipe/rng.hpp"

namespace quizpipe {

std::string_view stage_name(StageName s) {
    switch (s) {
    case StageName::stt: return "stt";
    case StageName::qe: return "qe";
    case StageName::qa: return "qa";
    case StageName::tts: return "tts";
    }
    return "stt";
}

void LatencyModel::validate() const {
    switch (kind) {
    case Kind::fixed:
        if (a < 0) throw ConfigError("latency model: fixed value must be >= 0");
        break;
    case Kind::uniform:
        if (a < 0 || b < a) throw ConfigError("latency model: need 0 <= low <= high");
        break;
    case Kind::normal:
        if (b < 0) throw ConfigError("latency model: stddev must be >= 0");
        break;
    }
}

StagePlan default_stage_plan() {
    StagePlan plan;
    plan.latency[0] = {LatencyModel::Kind::fixed, 0.94, 0.0};
    plan.latency[1] = {LatencyModel::Kind::fixed, 0.05, 0.0};
    plan.latency[2] = {LatencyModel::Kind::fixed, 1.0, 0.0};
    plan.latency[3] = {LatencyModel::Kind::fixed, 1.05, 0.0};
    return plan;
}

void ChunkPlan::validate() const {
    if (chunk_seconds <= 0) throw ConfigError("chunk plan: chunk_seconds must be > 0");
    if (words_per_chunk <= 0) throw ConfigError("chunk plan: words_per_chunk must be > 0");
}

std::vector<std::array<double, 4>> draw_latencies(const StagePlan& plan, int n_chunks,
                                                  uint64_t seed) {
    for (const auto& m : plan.latency) m.validate();
    Rng rng(mix_seed(seed, 0x7a11));
    std::vector<std::array<double, 4>> out(static_cast<size_t>(n_chunks));
    for (auto& row : out) {
        for (size_t s = 0; s < 4; ++s) {
            const LatencyModel& m = plan.latency[s];
            double v = 0;
            switch (m.kind) {
            case LatencyModel::Kind::fixed: v = m.a; break;
            case LatencyModel::Kind::uniform: v = rng.uniform(m.a, m.b); break;
            case LatencyModel::Kind::normal: v = std::max(0.0, rng.normal(m.a, m.b)); break;
            }
            row[s] = v;
        }
    }
    return out;
}

namespace {

// Min-heap event list; ties resolved by insertion order.
class EventList {
public:
    void at(double t, std::function<void()> fn) {
        heap_.push(Event{t, next_id_++, std::move(fn)});
    }

    void run() {
        while (!heap_.empty()) {
            Event ev = heap_.top();
            heap_.pop();
            now_ = ev.t;
            ev.fn();
        }
    }

    double now() const { return now_; }

private:
    struct Event {
        double t;
        uint64_t id;
        std::function<void()> fn;
        bool operator>(const Event& o) const { return std::tie(t, id) > std::tie(o.t, o.id); }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
    uint64_t next_id_ = 0;
    double now_ = 0.0;
};

struct SimState {
    const std::vector<double>& arrivals;
    const std::vector<std::array<double, 4>>& lat;
    std::vector<ChunkTiming>& out;
    EventList events;
};

void run_sequential(SimState& sim) {
    struct {
        bool busy = false;
        std::deque<size_t> queue; // unbounded source queue
    } worker;

    std::function<void()> kick = [&]() {
        if (worker.busy || worker.queue.empty()) return;
        size_t i = worker.queue.front();
        worker.queue.pop_front();
        worker.busy = true;
        double t = sim.events.now();
        for (size_t s = 0; s < 4; ++s) {
            t += sim.lat[i][s];
            sim.out[i].stage_completion_s[s] = t;
        }
        sim.events.at(t, [&, i]() {
            sim.out[i].completion_s = sim.events.now();
            worker.busy = false;
            kick();
        });
    };

    for (size_t i = 0; i < sim.arrivals.size(); ++i) {
        sim.events.at(sim.arrivals[i], [&, i]() {
            worker.queue.push_back(i);
            kick();
        });
    }
    sim.events.run();
}

void run_pipelined(SimState& sim, size_t capacity) {
    struct Stage {
        bool busy = false;
        bool blocked = false;   // finished an item but downstream queue is full
        size_t blocked_item = 0;
        std::deque<size_t> in;  // input queue; stage 0's is the unbounded source
    };
    std::array<Stage, 4> stages;

    std::function<void(size_t)> try_start;
    std::function<void(size_t, size_t)> on_finish;

    auto push_downstream = [&](size_t s, size_t i) -> bool {
        // true if the item moved on; false if the producer must block
        if (s == 3) {
            sim.out[i].completion_s = sim.events.now();
            return true;
        }
        if (stages[s + 1].in.size() < capacity) {
            stages[s + 1].in.push_back(i);
            try_start(s + 1);
            return true;
        }
        return false;
    };

    try_start = [&](size_t s) {
        Stage& st = stages[s];
        if (st.busy || st.blocked || st.in.empty()) return;
        size_t i = st.in.front();
        st.in.pop_front();
        // Popping frees a slot: deliver the upstream stage's pending push now.
        if (s > 0 && stages[s - 1].blocked) {
            Stage& up = stages[s - 1];
            st.in.push_back(up.blocked_item);
            up.blocked = false;
            up.busy = false;
            try_start(s - 1);
        }
        st.busy = true;
        sim.events.at(sim.events.now() + sim.lat[i][s], [&, s, i]() { on_finish(s, i); });
    };

    on_finish = [&](size_t s, size_t i) {
        sim.out[i].stage_completion_s[s] = sim.events.now();
        Stage& st = stages[s];
        if (push_downstream(s, i)) {
            st.busy = false;
            try_start(s);
        } else {
            st.blocked = true;
            st.blocked_item = i;
        }
    };

    for (size_t i = 0; i < sim.arrivals.size(); ++i) {
        sim.events.at(sim.arrivals[i], [&, i]() {
            stages[0].in.push_back(i);
            try_start(0);
        });
    }
    sim.events.run();
}

} // namespace

TimingReport simulate_stage_timing(const std::vector<double>& arrivals,
                                   const std::vector<std::array<double, 4>>& latencies,
                                   ExecMode mode, int queue_capacity) {
    if (latencies.size() != arrivals.size())
        throw ConfigError("simulate_stage_timing: arrivals/latencies size mismatch");
    if (mode == ExecMode::pipelined && queue_capacity < 1)
        throw ConfigError("simulate_stage_timing: queue_capacity must be >= 1");
    for (const auto& row : latencies)
        for (double v : row)
            if (v < 0) throw ConfigError("simulate_stage_timing: negative latency");
    for (size_t i = 1; i < arrivals.size(); ++i)
        if (arrivals[i] < arrivals[i - 1])
            throw ConfigError("simulate_stage_timing: arrivals must be non-decreasing");

    TimingReport report;
    report.per_chunk.resize(arrivals.size());
    for (size_t i = 0; i < arrivals.size(); ++i) {
        report.per_chunk[i].seq = static_cast<long>(i);
        report.per_chunk[i].arrival_s = arrivals[i];
    }
    if (arrivals.empty()) return report;

    SimState sim{arrivals, latencies, report.per_chunk, {}};
    if (mode == ExecMode::sequential)
        run_sequential(sim);
    else
        run_pipelined(sim, static_cast<size_t>(queue_capacity));

    double total_lag = 0.0;
    double last_completion = 0.0;
    for (auto& c : report.per_chunk) {
        c.lag_s = c.completion_s - c.arrival_s;
        total_lag += c.lag_s;
        report.max_lag_s = std::max(report.max_lag_s, c.lag_s);
        last_completion = std::max(last_completion, c.completion_s);
    }
    report.mean_lag_s = total_lag / static_cast<double>(report.per_chunk.size());
    double span = last_completion - arrivals.front();
    report.throughput_chunks_per_s =
        span > 0 ? static_cast<double>(report.per_chunk.size()) / span : 0.0;
    return report;
}

TimingReport simulate_timing(const StagePlan& plan, const ChunkPlan& chunk, int n_chunks,
                             uint64_t seed) {
    if (n_chunks < 1) throw ConfigError("simulate_timing: n_chunks must be >= 1");
    chunk.validate();
    std::vector<double> arrivals(static_cast<size_t>(n_chunks));
    for (int i = 0; i < n_chunks; ++i)
        arrivals[static_cast<size_t>(i)] = static_cast<double>(i) * chunk.chunk_seconds;
    auto lat = draw_latencies(plan, n_chunks, seed);
    return simulate_stage_timing(arrivals, lat, plan.mode, plan.queue_capacity);
}

} // namespace quizpipe
