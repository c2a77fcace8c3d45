#pragma once

#include <string>
#include <vector>

#include "quizpipe/dataset.hpp"
#include "quizpipe/matching.hpp"
#include "quizpipe/policy.hpp"
#include "quizpipe/timing.hpp"

namespace quizpipe {

enum class EvalProtocol { all_clues, mock_live };
enum class VoteGranularity { per_chunk, per_clue };

EvalProtocol protocol_from_name(const std::string& name);
VoteGranularity granularity_from_name(const std::string& name);

struct EvalConfig {
    EvalProtocol protocol = EvalProtocol::all_clues;
    int threshold = 3;
    int samples_per_step = 3;
    ChunkPlan chunking;
    VoteGranularity vote_granularity = VoteGranularity::per_chunk;
    uint64_t seed = 0;
    std::string qa_backend = "perfect";

    void validate() const;
};

// One shot per riddle: all clues in a single prompt, a single QA answer,
// scored directly. A QA failure leaves that riddle unattempted (noted in the
// log when one is supplied, otherwise on stderr).
EvalReport eval_all_clues(const RiddleDataset& dataset, QaPort& qa, const PromptTemplate& tmpl,
                          std::vector<std::string>* log = nullptr);

// Streamed protocol: feed each riddle as growing input steps (word-chunks of
// the concatenated clues, or whole clues) through the confidence vote. The
// points column maps the attempt step back to the clue that contained the
// last word the contestant had heard.
EvalReport eval_mock_live(const RiddleDataset& dataset, QaPort& qa, const EvalConfig& config,
                          const PromptTemplate& tmpl, std::vector<std::string>* log = nullptr);

// Score human annotations: EM is the fraction answered correctly, points
// follow the clue number. Fuzzy match does not apply to spoken answers, so
// the report carries fm_valid=false and serializes fm as null.
EvalReport human_benchmark(const RiddleDataset& dataset,
                           const std::vector<HumanAnnotation>& annotations,
                           std::vector<std::string>* log = nullptr);

// Serialized reports are byte-stable: same report, same bytes.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
std::string report_to_csv(const EvalReport& report);

enum class ReportFormat { json, csv };
ReportFormat report_format_from_name(const std::string& name);

void emit_report(const EvalReport& report, ReportFormat format, const std::string& path);

// Deterministic fixture data. Every clue carries a riddle-unique marker token
// so content-based riddle identification cannot collide, clue texts are
// first-person so the rule classifier accepts them, and every clue has the
// same word count (so word-chunking at that width aligns chunks with clues).
RiddleDataset synthetic_dataset(size_t n_riddles, int year = 2019);

// Words per clue in synthetic_dataset output.
inline constexpr int kSyntheticClueWords = 12;

// Annotations marking the first n_correct riddles as correctly answered (at a
// seeded clue number 1..3); the rest split between wrong attempts and passes.
std::vector<HumanAnnotation> synthetic_annotations(const RiddleDataset& dataset, size_t n_correct,
                                                   uint64_t seed);

} // namespace quizpipe
