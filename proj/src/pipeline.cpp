#include "quizpipe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_set>

#include "quizpipe/adapters.hpp"
#include "quizpipe/csv.hpp"
#include "quizpipe/errors.hpp"
#include "quizpipe/text.hpp"

namespace quizpipe {

std::vector<TimedSegment> chunk_timed_stream(const std::vector<TimedSegment>& segments,
                                             const ChunkPlan& plan) {
    plan.validate();
    if (segments.empty()) return {};

    double prev_start = segments.front().start_s;
    if (prev_start < 0) throw ValidationError("chunk_timed_stream: negative start time");
    for (const auto& s : segments) {
        if (s.end_s < s.start_s)
            throw ValidationError("chunk_timed_stream: segment ends before it starts");
        if (s.start_s < prev_start)
            throw ValidationError("chunk_timed_stream: start times must be non-decreasing");
        prev_start = s.start_s;
    }

    const double c = plan.chunk_seconds;
    double source_end = 0.0;
    long max_window = 0;
    std::vector<std::pair<long, const std::string*>> placed;
    placed.reserve(segments.size());
    for (const auto& s : segments) {
        long w = static_cast<long>(std::floor((s.start_s + s.end_s) / 2.0 / c));
        placed.emplace_back(w, &s.text);
        max_window = std::max(max_window, w);
        source_end = std::max(source_end, s.end_s);
    }
    long n_windows = std::max(static_cast<long>(std::ceil(source_end / c)), max_window + 1);

    std::vector<TimedSegment> chunks(static_cast<size_t>(n_windows));
    for (long w = 0; w < n_windows; ++w) {
        TimedSegment& ch = chunks[static_cast<size_t>(w)];
        ch.seq = w;
        ch.start_s = static_cast<double>(w) * c;
        ch.end_s = std::max(ch.start_s, std::min(ch.start_s + c, source_end));
    }
    for (const auto& [w, text] : placed) {
        if (text->empty()) continue;
        std::string& dst = chunks[static_cast<size_t>(w)].text;
        if (!dst.empty()) dst += " ";
        dst += *text;
    }
    return chunks;
}

std::vector<std::string> chunk_words(const std::string& text, const ChunkPlan& plan) {
    plan.validate();
    std::vector<std::string> words = split_ws(text);
    std::vector<std::string> out;
    const size_t step = static_cast<size_t>(plan.words_per_chunk);
    for (size_t i = 0; i < words.size(); i += step) {
        size_t j = std::min(words.size(), i + step);
        std::string group = words[i];
        for (size_t k = i + 1; k < j; ++k) {
            group += " ";
            group += words[k];
        }
        out.push_back(std::move(group));
    }
    return out;
}

std::vector<TimedSegment> load_transcript_csv(const std::string& path) {
    CsvDoc doc = read_csv_file(path);
    auto col_start = doc.col("start_s");
    auto col_end = doc.col("end_s");
    auto col_text = doc.col("text");
    if (!col_start || !col_end || !col_text)
        throw ValidationError("transcript " + path + ": needs columns start_s, end_s, text");

    std::vector<TimedSegment> out;
    out.reserve(doc.rows.size());
    for (size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& row = doc.rows[i];
        auto field = [&](size_t col) -> std::string {
            return col < row.size() ? row[col] : std::string();
        };
        auto seconds = [&](size_t col, const char* name) -> double {
            std::string v = trim(field(col));
            try {
                size_t pos = 0;
                double d = std::stod(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                return d;
            } catch (const std::exception&) {
                throw ValidationError("transcript " + path + " row " + std::to_string(i + 2) +
                                      ": bad " + name + " value '" + v + "'");
            }
        };
        TimedSegment seg;
        seg.start_s = seconds(*col_start, "start_s");
        seg.end_s = seconds(*col_end, "end_s");
        seg.text = field(*col_text);
        seg.seq = static_cast<long>(i);
        out.push_back(std::move(seg));
    }
    return out;
}

std::string to_json_line(const PipelineEvent& ev) {
    nlohmann::ordered_json j;
    j["ts_s"] = ev.ts_s;
    j["chunk_seq"] = ev.chunk_seq;
    j["stage"] = std::string(stage_name(ev.stage));
    j["kind"] = ev.kind;
    j["payload"] = ev.payload;
    return j.dump();
}

namespace {

// Per-chunk scratch carried through the stages.
struct ChunkWork {
    TimedSegment chunk;
    std::string transcript;
    std::vector<SegmentationEvent> seg_events;
    bool voted = false;
    int vote_step_no = 0;
    int vote_clue_count = 0;
    bool attempt_made = false;
    std::string attempt_answer;
    int attempt_riddle = 0;
    int attempt_clue = 0;
    std::string tts_handle;
    std::array<bool, 4> ran{};
    int failed_stage = -1;
    std::string error;
    std::array<double, 4> wall_ts{}; // wall-clock mode only
};

struct PendingAttempt {
    int riddle_ordinal = 0;
    std::string answer;
    int clue_number = 0;
    std::vector<std::string> clues;
    long chunk_seq = 0;
};

// Stage logic shared by both clocks. Each stage's state is touched only by
// that stage, which is what makes the wall-clock workers race-free.
class Runner {
public:
    Runner(const AdapterSuite& suite, const PipelineOptions& options)
        : suite_(suite), options_(options) {
        reset_vote();
    }

    bool run_stt(ChunkWork& w) {
        w.ran[0] = true;
        try {
            w.transcript = suite_.stt->transcribe(w.chunk).text;
            return ok(0);
        } catch (const std::exception& e) {
            return fail(w, 0, e.what());
        }
    }

    bool run_qe(ChunkWork& w) {
        w.ran[1] = true;
        try {
            TimedSegment seg = w.chunk;
            seg.text = w.transcript;
            w.seg_events = advance(session_, seg, options_.detector, *suite_.classifier);
            return ok(1);
        } catch (const std::exception& e) {
            return fail(w, 1, e.what());
        }
    }

    bool run_qa(ChunkWork& w) {
        bool new_clue = false;
        for (const auto& ev : w.seg_events) {
            switch (ev.kind) {
            case SegKind::riddle_started:
                reset_vote();
                clues_.clear();
                current_riddle_ = ev.riddle_index;
                attempted_current_ = false;
                break;
            case SegKind::clue:
                clues_.push_back(ev.text);
                new_clue = true;
                break;
            case SegKind::riddle_ended:
            case SegKind::non_clue:
                break;
            }
        }
        if (!new_clue || attempted_current_ || current_riddle_ == 0) return true;

        w.ran[2] = true;
        try {
            std::string prompt = build_prompt(clues_, options_.prompt);
            std::vector<std::string> samples =
                suite_.qa->answers(prompt, options_.samples_per_step);
            auto attempt = vote_step(vote_, QaSampleSet{prompt, std::move(samples)});
            w.voted = true;
            w.vote_step_no = vote_.steps_taken;
            w.vote_clue_count = static_cast<int>(clues_.size());
            if (attempt) {
                attempted_current_ = true;
                w.attempt_made = true;
                w.attempt_answer = *attempt;
                w.attempt_riddle = current_riddle_;
                w.attempt_clue = static_cast<int>(clues_.size());
                attempts_.push_back(
                    {current_riddle_, *attempt, w.attempt_clue, clues_, w.chunk.seq});
            }
            return ok(2);
        } catch (const std::exception& e) {
            return fail(w, 2, e.what());
        }
    }

    bool run_tts(ChunkWork& w) {
        if (!w.attempt_made) return true;
        w.ran[3] = true;
        try {
            w.tts_handle = suite_.tts->speak(w.attempt_answer).audio_handle;
            return ok(3);
        } catch (const std::exception& e) {
            return fail(w, 3, e.what());
        }
    }

    std::vector<SegmentationEvent> finish_stream() { return finish(session_); }

    bool aborted() const { return aborted_.load(); }
    const std::string& diagnostic() const { return diagnostic_; }
    const std::vector<PendingAttempt>& attempts() const { return attempts_; }

private:
    void reset_vote() {
        vote_ = VoteState{};
        vote_.threshold = options_.threshold;
        vote_.samples_per_step = options_.samples_per_step;
    }

    bool ok(size_t stage) {
        consecutive_failures_[stage] = 0;
        return true;
    }

    bool fail(ChunkWork& w, size_t stage, const std::string& msg) {
        w.failed_stage = static_cast<int>(stage);
        w.error = msg;
        int n = ++consecutive_failures_[stage];
        if (n >= options_.abort_after_failures && !aborted_.exchange(true)) {
            std::lock_guard<std::mutex> lock(diag_mutex_);
            diagnostic_ = "stage " + std::string(stage_name(kStageOrder[stage])) + " failed " +
                          std::to_string(n) + " consecutive chunks: " + msg;
        }
        return false;
    }

    const AdapterSuite& suite_;
    const PipelineOptions& options_;
    SessionState session_;
    VoteState vote_;
    std::vector<std::string> clues_;
    int current_riddle_ = 0;
    bool attempted_current_ = false;
    std::vector<PendingAttempt> attempts_;
    std::array<int, 4> consecutive_failures_{};
    std::atomic<bool> aborted_{false};
    std::mutex diag_mutex_;
    std::string diagnostic_;
};

nlohmann::ordered_json seg_event_payload(const SegmentationEvent& ev) {
    nlohmann::ordered_json payload;
    payload["riddle_index"] = ev.riddle_index;
    if (ev.clue_number) payload["clue_number"] = *ev.clue_number;
    payload["text"] = ev.text;
    return payload;
}

// Events for one chunk in stage order; ts[s] is the completion time of stage s.
void append_chunk_events(std::vector<PipelineEvent>& out, const ChunkWork& w,
                         const std::array<double, 4>& ts) {
    auto error_event = [&](size_t s) {
        out.push_back({ts[s], w.chunk.seq, kStageOrder[s], "error",
                       nlohmann::ordered_json{{"message", w.error}}});
    };
    if (w.ran[0]) {
        if (w.failed_stage == 0) return error_event(0);
        out.push_back({ts[0], w.chunk.seq, StageName::stt, "transcript",
                       nlohmann::ordered_json{{"text", w.transcript}}});
    }
    if (w.ran[1]) {
        if (w.failed_stage == 1) return error_event(1);
        for (const auto& ev : w.seg_events)
            out.push_back({ts[1], w.chunk.seq, StageName::qe, std::string(seg_kind_name(ev.kind)),
                           seg_event_payload(ev)});
    }
    if (w.ran[2]) {
        if (w.failed_stage == 2) return error_event(2);
        out.push_back({ts[2], w.chunk.seq, StageName::qa, "vote",
                       nlohmann::ordered_json{{"riddle_index", w.attempt_made ? w.attempt_riddle : 0},
                                              {"step", w.vote_step_no},
                                              {"clue_count", w.vote_clue_count}}});
        if (w.attempt_made)
            out.push_back({ts[2], w.chunk.seq, StageName::qa, "attempt",
                           nlohmann::ordered_json{{"answer", w.attempt_answer},
                                                  {"riddle_index", w.attempt_riddle},
                                                  {"clue_number", w.attempt_clue}}});
    }
    if (w.ran[3]) {
        if (w.failed_stage == 3) return error_event(3);
        out.push_back({ts[3], w.chunk.seq, StageName::tts, "spoken",
                       nlohmann::ordered_json{{"audio_handle", w.tts_handle}}});
    }
}

// Unbounded when capacity = 0.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(size_t capacity) : capacity_(capacity) {}

    void push(T v) {
        std::unique_lock<std::mutex> lock(m_);
        not_full_.wait(lock,
                       [&] { return closed_ || capacity_ == 0 || q_.size() < capacity_; });
        if (closed_) return;
        q_.push_back(std::move(v));
        not_empty_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock<std::mutex> lock(m_);
        not_empty_.wait(lock, [&] { return closed_ || !q_.empty(); });
        if (q_.empty()) return std::nullopt;
        T v = std::move(q_.front());
        q_.pop_front();
        not_full_.notify_one();
        return v;
    }

    void close() {
        std::lock_guard<std::mutex> lock(m_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

private:
    size_t capacity_;
    std::mutex m_;
    std::condition_variable not_empty_, not_full_;
    std::deque<T> q_;
    bool closed_ = false;
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

RunResult run_pipeline(const std::vector<TimedSegment>& source, const AdapterSuite& suite,
                       const PipelineOptions& options) {
    suite.validate();
    if (options.threshold < 1) throw ConfigError("run_pipeline: threshold must be >= 1");
    if (options.samples_per_step < 1)
        throw ConfigError("run_pipeline: samples_per_step must be >= 1");
    if (options.abort_after_failures < 1)
        throw ConfigError("run_pipeline: abort_after_failures must be >= 1");
    if (options.plan.mode == ExecMode::pipelined && options.plan.queue_capacity < 1)
        throw ConfigError("run_pipeline: queue_capacity must be >= 1");
    validate_template(options.prompt);

    std::vector<TimedSegment> chunks = chunk_timed_stream(source, options.chunk);
    std::vector<ChunkWork> work(chunks.size());
    for (size_t i = 0; i < chunks.size(); ++i) work[i].chunk = chunks[i];

    Runner runner(suite, options);
    size_t processed = 0;

    const bool wall = options.clock == RunClock::wall_clock;
    if (!wall) {
        for (auto& w : work) {
            if (runner.aborted()) break;
            ++processed;
            if (!runner.run_stt(w)) continue;
            if (!runner.run_qe(w)) continue;
            if (!runner.run_qa(w)) continue;
            runner.run_tts(w);
        }
    } else {
        auto t0 = std::chrono::steady_clock::now();
        auto pace = [&](double arrival_s) {
            std::this_thread::sleep_until(t0 + std::chrono::duration<double>(arrival_s));
        };
        if (options.plan.mode == ExecMode::sequential) {
            for (auto& w : work) {
                if (runner.aborted()) break;
                ++processed;
                pace(w.chunk.start_s);
                bool alive = runner.run_stt(w);
                w.wall_ts[0] = elapsed_since(t0);
                if (alive) alive = runner.run_qe(w);
                w.wall_ts[1] = elapsed_since(t0);
                if (alive) alive = runner.run_qa(w);
                w.wall_ts[2] = elapsed_since(t0);
                if (alive) runner.run_tts(w);
                w.wall_ts[3] = elapsed_since(t0);
            }
        } else {
            const size_t cap = static_cast<size_t>(options.plan.queue_capacity);
            BoundedQueue<size_t> to_stt(0), to_qe(cap), to_qa(cap), to_tts(cap);
            std::atomic<size_t> fed{0};

            std::thread feeder([&] {
                for (size_t i = 0; i < work.size(); ++i) {
                    if (runner.aborted()) break;
                    pace(work[i].chunk.start_s);
                    to_stt.push(i);
                    fed.store(i + 1);
                }
                to_stt.close();
            });
            auto worker = [&](BoundedQueue<size_t>& in, BoundedQueue<size_t>* out, size_t stage,
                              auto stage_fn) {
                return std::thread([&, out, stage, stage_fn] {
                    while (auto idx = in.pop()) {
                        ChunkWork& w = work[*idx];
                        if (w.failed_stage < 0) stage_fn(w);
                        w.wall_ts[stage] = elapsed_since(t0);
                        if (out) out->push(*idx);
                    }
                    if (out) out->close();
                });
            };
            std::thread stt = worker(to_stt, &to_qe, 0, [&](ChunkWork& w) { runner.run_stt(w); });
            std::thread qe = worker(to_qe, &to_qa, 1, [&](ChunkWork& w) { runner.run_qe(w); });
            std::thread qa = worker(to_qa, &to_tts, 2, [&](ChunkWork& w) { runner.run_qa(w); });
            std::thread tts = worker(to_tts, nullptr, 3, [&](ChunkWork& w) { runner.run_tts(w); });
            feeder.join();
            stt.join();
            qe.join();
            qa.join();
            tts.join();
            processed = fed.load();
        }
    }

    RunResult result;
    result.aborted = runner.aborted();
    result.diagnostic = runner.diagnostic();

    // Timing: with the virtual clock, replay the executed stages through the
    // latency simulation (skipped stages cost nothing); with the wall clock,
    // use the measured timestamps.
    std::vector<std::array<double, 4>> event_ts(processed);
    if (!wall) {
        auto latencies = draw_latencies(options.plan, static_cast<int>(processed), options.seed);
        for (size_t i = 0; i < processed; ++i)
            for (size_t s = 0; s < 4; ++s)
                if (!work[i].ran[s]) latencies[i][s] = 0.0;
        std::vector<double> arrivals(processed);
        for (size_t i = 0; i < processed; ++i) arrivals[i] = work[i].chunk.start_s;
        result.timing = simulate_stage_timing(arrivals, latencies, options.plan.mode,
                                              options.plan.queue_capacity);
        for (size_t i = 0; i < processed; ++i)
            event_ts[i] = result.timing.per_chunk[i].stage_completion_s;
    } else {
        result.timing.per_chunk.resize(processed);
        double total_lag = 0.0, last_completion = 0.0, first_arrival = 0.0;
        for (size_t i = 0; i < processed; ++i) {
            event_ts[i] = work[i].wall_ts;
            ChunkTiming& t = result.timing.per_chunk[i];
            t.seq = work[i].chunk.seq;
            t.arrival_s = work[i].chunk.start_s;
            t.stage_completion_s = work[i].wall_ts;
            t.completion_s = *std::max_element(work[i].wall_ts.begin(), work[i].wall_ts.end());
            t.lag_s = t.completion_s - t.arrival_s;
            total_lag += t.lag_s;
            result.timing.max_lag_s = std::max(result.timing.max_lag_s, t.lag_s);
            last_completion = std::max(last_completion, t.completion_s);
            if (i == 0) first_arrival = t.arrival_s;
        }
        if (processed > 0) {
            result.timing.mean_lag_s = total_lag / static_cast<double>(processed);
            double span = last_completion - first_arrival;
            result.timing.throughput_chunks_per_s =
                span > 0 ? static_cast<double>(processed) / span : 0.0;
        }
    }

    for (size_t i = 0; i < processed; ++i) append_chunk_events(result.events, work[i], event_ts[i]);

    double end_ts = 0.0;
    for (const auto& ev : result.events) end_ts = std::max(end_ts, ev.ts_s);
    if (!result.aborted) {
        for (const auto& ev : runner.finish_stream())
            result.events.push_back(
                {end_ts, -1, StageName::qe, std::string(seg_kind_name(ev.kind)),
                 seg_event_payload(ev)});
    }

    // Score attempts against the reference dataset when one is supplied.
    // Detected riddle ordinals cannot be trusted (a missed start shifts
    // them), so each attempt is matched by clue content instead.
    std::optional<OracleQa> matcher;
    if (options.truth) matcher.emplace(*options.truth, 1);
    std::unordered_set<std::string> used_ids;
    for (const auto& att : runner.attempts()) {
        AttemptRecord rec;
        rec.attempted = true;
        rec.answer = att.answer;
        rec.step_index = att.clue_number;
        if (!options.truth) {
            rec.riddle_id = "detected-" + std::to_string(att.riddle_ordinal);
            result.records.push_back(std::move(rec));
            continue;
        }
        int idx = matcher->identify_riddle(join(att.clues, " "));
        if (idx < 0 || !used_ids.insert(options.truth->riddles[static_cast<size_t>(idx)].id).second) {
            result.events.push_back(
                {end_ts, att.chunk_seq, StageName::qa, "unmatched_attempt",
                 nlohmann::ordered_json{{"answer", att.answer},
                                        {"riddle_index", att.riddle_ordinal}}});
            continue;
        }
        const Riddle& r = options.truth->riddles[static_cast<size_t>(idx)];
        rec.riddle_id = r.id;
        rec.match = match_answer(att.answer, r);
        rec.points = rec.match.em ? points_for_clue(att.clue_number) : 0;
        result.records.push_back(std::move(rec));
    }

    std::stable_sort(result.events.begin(), result.events.end(),
                     [](const PipelineEvent& a, const PipelineEvent& b) { return a.ts_s < b.ts_s; });
    return result;
}

} // namespace quizpipe
