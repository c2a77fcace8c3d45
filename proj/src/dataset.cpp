#include "quizpipe/dataset.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "quizpipe/csv.hpp"
#include "quizpipe/errors.hpp"
#include "quizpipe/text.hpp"

namespace quizpipe {

std::string_view subject_name(Subject s) {
    switch (s) {
    case Subject::biology: return "biology";
    case Subject::chemistry: return "chemistry";
    case Subject::physics: return "physics";
    case Subject::math: return "math";
    }
    return "biology";
}

std::optional<Subject> subject_from_name(std::string_view name) {
    std::string n = to_lower(trim(name));
    if (n == "biology") return Subject::biology;
    if (n == "chemistry") return Subject::chemistry;
    if (n == "physics") return Subject::physics;
    if (n == "math" || n == "mathematics" || n == "maths") return Subject::math;
    return std::nullopt;
}

std::vector<std::string> Riddle::truths() const {
    std::vector<std::string> out;
    out.reserve(1 + alt_answers.size());
    out.push_back(answer);
    out.insert(out.end(), alt_answers.begin(), alt_answers.end());
    return out;
}

std::string Riddle::all_clues_text() const { return join(clues, " "); }

const Riddle* RiddleDataset::find(std::string_view id) const {
    for (const auto& r : riddles)
        if (r.id == id) return &r;
    return nullptr;
}

std::string normalize_answer(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (c >= 0x80 || std::isalnum(c) || std::isspace(c))
            cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    std::vector<std::string> kept;
    for (auto& tok : split_ws(cleaned)) {
        if (tok == "the" || tok == "a" || tok == "an") continue;
        kept.push_back(std::move(tok));
    }
    return join(kept, " ");
}

void validate_riddle(const Riddle& r) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("riddle " + (r.id.empty() ? std::string("<no id>") : r.id) + ": " + what);
    };
    if (r.id.empty()) throw ValidationError("riddle: empty id");
    if (r.clues.empty() || r.clues.size() > 9)
        fail("clue count must be in [1, 9], got " + std::to_string(r.clues.size()));
    for (size_t i = 0; i < r.clues.size(); ++i)
        if (trim(r.clues[i]).empty())
            fail("clue " + std::to_string(i + 1) + " is empty");
    if (trim(r.answer).empty()) fail("empty answer");
    if (r.alt_answers.size() > 4)
        fail("more than 4 alternate answers");
    std::set<std::string> seen;
    for (const auto& a : r.alt_answers) {
        if (trim(a).empty()) fail("empty alternate answer");
        if (!seen.insert(a).second) fail("duplicate alternate answer '" + a + "'");
    }
}

namespace {

std::string cell(const std::vector<std::string>& row, std::optional<size_t> idx) {
    if (!idx || *idx >= row.size()) return "";
    return row[*idx];
}

const Subject kSubjectCycle[4] = {Subject::biology, Subject::chemistry,
                                  Subject::physics, Subject::math};

std::string make_row_id(int year, size_t data_row) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%03zu", year, data_row);
    return buf;
}

} // namespace

RiddleDataset load_riddle_dataset(const std::string& path, int default_year) {
    CsvDoc doc = read_csv_file(path);
    if (doc.header.empty()) throw ValidationError(path + ": missing header row");

    std::vector<size_t> clue_cols(9);
    for (int i = 0; i < 9; ++i) {
        std::string name = "Clue " + std::to_string(i + 1);
        auto idx = doc.col(name);
        if (!idx) throw ValidationError(path + ": missing required column '" + name + "'");
        clue_cols[static_cast<size_t>(i)] = *idx;
    }
    auto answer_col = doc.col("Answer");
    if (!answer_col) throw ValidationError(path + ": missing required column 'Answer'");
    std::vector<size_t> alt_cols(4);
    for (int i = 0; i < 4; ++i) {
        std::string name = "Answer " + std::to_string(i + 1);
        auto idx = doc.col(name);
        if (!idx) throw ValidationError(path + ": missing required column '" + name + "'");
        alt_cols[static_cast<size_t>(i)] = *idx;
    }
    auto subject_col = doc.col("Subject");
    auto contest_col = doc.col("Contest");
    auto year_col = doc.col("Year");

    RiddleDataset ds;
    ds.source_path = path;
    for (size_t ri = 0; ri < doc.rows.size(); ++ri) {
        const auto& row = doc.rows[ri];
        // CSV record ordinal; the header is row 1.
        size_t row_no = ri + 2;
        auto row_fail = [&](const std::string& what) {
            throw ValidationError(path + " row " + std::to_string(row_no) + ": " + what);
        };

        Riddle r;
        r.contest = trim(cell(row, contest_col));

        std::string year_cell = trim(cell(row, year_col));
        if (!year_cell.empty()) {
            try {
                size_t pos = 0;
                r.year = std::stoi(year_cell, &pos);
                if (pos != year_cell.size()) throw std::invalid_argument(year_cell);
            } catch (const std::exception&) {
                row_fail("bad Year value '" + year_cell + "'");
            }
        } else {
            r.year = default_year;
        }

        std::string subject_cell = trim(cell(row, subject_col));
        if (!subject_cell.empty()) {
            auto s = subject_from_name(subject_cell);
            if (!s) row_fail("unknown Subject '" + subject_cell + "'");
            r.subject = *s;
        } else {
            r.subject = kSubjectCycle[ri % 4];
        }

        // Clues are contiguous: stop at the first empty cell.
        for (size_t ci = 0; ci < 9; ++ci) {
            std::string c = trim(cell(row, std::optional<size_t>(clue_cols[ci])));
            if (c.empty()) break;
            r.clues.push_back(std::move(c));
        }
        if (r.clues.empty()) row_fail("empty 'Clue 1'");

        r.answer = trim(cell(row, answer_col));
        if (r.answer.empty()) row_fail("empty 'Answer'");

        for (size_t ai = 0; ai < 4; ++ai) {
            std::string a = trim(cell(row, std::optional<size_t>(alt_cols[ai])));
            if (!a.empty()) r.alt_answers.push_back(std::move(a));
        }

        r.id = make_row_id(r.year, ri + 1);
        try {
            validate_riddle(r);
        } catch (const ValidationError& e) {
            row_fail(e.what());
        }
        ds.riddles.push_back(std::move(r));
    }

    std::unordered_set<std::string> ids;
    for (const auto& r : ds.riddles)
        if (!ids.insert(r.id).second)
            throw ValidationError(path + ": duplicate riddle id " + r.id);
    return ds;
}

void write_riddle_dataset(const RiddleDataset& ds, const std::string& path) {
    std::ofstream ofs(path, std::ios::binary);
    if (!ofs) throw IoError("cannot write file: " + path);

    std::vector<std::string> header;
    for (int i = 1; i <= 9; ++i) header.push_back("Clue " + std::to_string(i));
    header.push_back("Answer");
    for (int i = 1; i <= 4; ++i) header.push_back("Answer " + std::to_string(i));
    header.insert(header.end(), {"Subject", "Contest", "Year"});
    write_csv_row(ofs, header);

    for (const auto& r : ds.riddles) {
        std::vector<std::string> row(17);
        for (size_t i = 0; i < 9; ++i) row[i] = i < r.clues.size() ? r.clues[i] : "";
        row[9] = r.answer;
        for (size_t i = 0; i < 4; ++i) row[10 + i] = i < r.alt_answers.size() ? r.alt_answers[i] : "";
        row[14] = std::string(subject_name(r.subject));
        row[15] = r.contest;
        row[16] = std::to_string(r.year);
        write_csv_row(ofs, row);
    }
    if (!ofs) throw IoError("write failed: " + path);
}

namespace {

bool parse_bool(const std::string& raw, const std::string& context) {
    std::string v = to_lower(trim(raw));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(context + ": bad boolean '" + raw + "'");
}

} // namespace

std::vector<HumanAnnotation> load_annotations(const std::string& path) {
    CsvDoc doc = read_csv_file(path);
    for (const char* name : {"riddle_id", "answered", "clue_number", "correct"})
        if (!doc.col(name))
            throw ValidationError(path + ": missing required column '" + std::string(name) + "'");

    size_t id_col = *doc.col("riddle_id");
    size_t ans_col = *doc.col("answered");
    size_t clue_col = *doc.col("clue_number");
    size_t cor_col = *doc.col("correct");

    std::vector<HumanAnnotation> out;
    for (size_t ri = 0; ri < doc.rows.size(); ++ri) {
        const auto& row = doc.rows[ri];
        std::string ctx = path + " row " + std::to_string(ri + 2);

        HumanAnnotation a;
        a.riddle_id = trim(cell(row, std::optional<size_t>(id_col)));
        if (a.riddle_id.empty()) throw ValidationError(ctx + ": empty riddle_id");
        a.answered = parse_bool(cell(row, std::optional<size_t>(ans_col)), ctx);
        a.correct = parse_bool(cell(row, std::optional<size_t>(cor_col)), ctx);

        std::string clue_cell = trim(cell(row, std::optional<size_t>(clue_col)));
        if (!clue_cell.empty()) {
            int n = 0;
            try {
                size_t pos = 0;
                n = std::stoi(clue_cell, &pos);
                if (pos != clue_cell.size()) throw std::invalid_argument(clue_cell);
            } catch (const std::exception&) {
                throw ValidationError(ctx + ": bad clue_number '" + clue_cell + "'");
            }
            if (n < 1) throw ValidationError(ctx + ": clue_number must be >= 1");
            a.clue_number = n;
        }

        if (!a.answered) {
            if (a.clue_number)
                throw ValidationError(ctx + ": clue_number given for an unanswered riddle");
            if (a.correct)
                throw ValidationError(ctx + ": correct=true for an unanswered riddle");
        } else if (!a.clue_number) {
            throw ValidationError(ctx + ": answered riddle missing clue_number");
        }
        out.push_back(std::move(a));
    }
    return out;
}

void write_annotations(const std::vector<HumanAnnotation>& anns, const std::string& path) {
    std::ofstream ofs(path, std::ios::binary);
    if (!ofs) throw IoError("cannot write file: " + path);
    write_csv_row(ofs, {"riddle_id", "answered", "clue_number", "correct"});
    for (const auto& a : anns) {
        write_csv_row(ofs, {a.riddle_id,
                            a.answered ? "true" : "false",
                            a.clue_number ? std::to_string(*a.clue_number) : "",
                            a.correct ? "true" : "false"});
    }
    if (!ofs) throw IoError("write failed: " + path);
}

} // namespace quizpipe
