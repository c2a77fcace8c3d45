#include "quizpipe/matching.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "quizpipe/errors.hpp"
#include "quizpipe/text.hpp"

namespace quizpipe {

MatchResult match_answer(std::string_view candidate, const Riddle& riddle) {
    MatchResult res;
    std::string cand = normalize_answer(candidate);
    for (const auto& truth : riddle.truths()) {
        std::string t = normalize_answer(truth);
        if (t.empty()) continue;
        if (t == cand) {
            res.em = true;
            res.fm = true;
            res.matched_truth = truth;
            return res;
        }
    }
    for (const auto& truth : riddle.truths()) {
        std::string t = normalize_answer(truth);
        if (t.empty()) continue;
        if (cand.find(t) != std::string::npos) {
            res.fm = true;
            res.matched_truth = truth;
            return res;
        }
    }
    return res;
}

bool exact_match(std::string_view candidate, const Riddle& riddle) {
    return match_answer(candidate, riddle).em;
}

bool fuzzy_match(std::string_view candidate, const Riddle& riddle) {
    return match_answer(candidate, riddle).fm;
}

double word_error_rate(std::string_view reference, std::string_view hypothesis) {
    std::vector<std::string> ref = split_ws(to_lower(reference));
    std::vector<std::string> hyp = split_ws(to_lower(hypothesis));
    if (ref.empty())
        throw ValidationError("word_error_rate: reference has no word tokens");

    const size_t n = ref.size(), m = hyp.size();
    std::vector<size_t> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = j;
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= m; ++j) {
            size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[m]) / static_cast<double>(n);
}

int points_for_clue(int clue_number) {
    if (clue_number < 1)
        throw ValidationError("points_for_clue: clue_number must be >= 1, got " +
                              std::to_string(clue_number));
    if (clue_number == 1) return 5;
    if (clue_number == 2) return 4;
    return 3;
}

namespace {

double pct(size_t count, size_t total) {
    // Reports carry two decimals; rounding here keeps serialization lossless.
    double raw = 100.0 * static_cast<double>(count) / static_cast<double>(total);
    return std::round(raw * 100.0) / 100.0;
}

void validate_record(const AttemptRecord& rec) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("attempt record " + rec.riddle_id + ": " + what);
    };
    if (!rec.attempted) {
        if (rec.answer) fail("unattempted record carries an answer");
        if (rec.match.em || rec.match.fm) fail("unattempted record marked as match");
        if (rec.points != 0) fail("unattempted record carries points");
    }
    if (rec.match.em && !rec.match.fm) fail("em without fm");
    if (rec.points != 0 && rec.points != 3 && rec.points != 4 && rec.points != 5)
        fail("points outside {0,3,4,5}");
    if (rec.points > 0 && !rec.match.em) fail("points without exact match");
}

} // namespace

EvalReport aggregate_report(std::vector<AttemptRecord> records, const RiddleDataset& dataset) {
    std::unordered_map<std::string, size_t> riddle_index;
    for (size_t i = 0; i < dataset.riddles.size(); ++i)
        riddle_index.emplace(dataset.riddles[i].id, i);

    std::unordered_set<std::string> seen;
    for (const auto& rec : records) {
        validate_record(rec);
        if (!riddle_index.count(rec.riddle_id))
            throw ValidationError("aggregate_report: unknown riddle id " + rec.riddle_id);
        if (!seen.insert(rec.riddle_id).second)
            throw ValidationError("aggregate_report: duplicate record for riddle " + rec.riddle_id);
    }
    for (const auto& r : dataset.riddles) {
        if (seen.count(r.id)) continue;
        AttemptRecord rec;
        rec.riddle_id = r.id;
        records.push_back(std::move(rec));
    }
    std::sort(records.begin(), records.end(),
              [](const AttemptRecord& a, const AttemptRecord& b) { return a.riddle_id < b.riddle_id; });

    EvalReport rep;
    rep.n_riddles = dataset.riddles.size();
    rep.records = std::move(records);

    std::map<Subject, size_t> subj_total, subj_em, subj_fm;
    for (const auto& r : dataset.riddles) subj_total[r.subject]++;

    size_t em_count = 0, fm_count = 0;
    for (const auto& rec : rep.records) {
        const Riddle& r = dataset.riddles[riddle_index.at(rec.riddle_id)];
        if (rec.attempted) rep.n_attempted++;
        if (rec.match.em) { em_count++; subj_em[r.subject]++; }
        if (rec.match.fm) { fm_count++; subj_fm[r.subject]++; }
        rep.total_points += rec.points;
    }
    if (rep.n_riddles > 0) {
        rep.em_pct = pct(em_count, rep.n_riddles);
        rep.fm_pct = pct(fm_count, rep.n_riddles);
    }
    for (const auto& [subj, total] : subj_total) {
        SubjectStats st;
        st.em_pct = pct(subj_em[subj], total);
        st.fm_pct = pct(subj_fm[subj], total);
        rep.per_subject[subj] = st;
    }
    return rep;
}

} // namespace quizpipe
