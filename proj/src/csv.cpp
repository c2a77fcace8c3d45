#include "quizpipe/csv.hpp"

#include <fstream>
#include <sstream>

#include "quizpipe/errors.hpp"

namespace quizpipe {

std::optional<size_t> CsvDoc::col(std::string_view name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_started = false; // any char consumed for the current record

    auto end_field = [&]() {
        fields.push_back(field);
        field.clear();
    };
    auto end_record = [&]() {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
        field_started = false;
    };

    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') { field.push_back('"'); i += 2; continue; }
                in_quotes = false;
                ++i;
            } else {
                field.push_back(c);
                ++i;
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            field_started = true;
            ++i;
            break;
        case ',':
            end_field();
            field_started = true;
            ++i;
            break;
        case '\r':
            ++i;
            break;
        case '\n':
            end_record();
            ++i;
            break;
        default:
            field.push_back(c);
            field_started = true;
            ++i;
            break;
        }
    }
    if (in_quotes) throw ValidationError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !fields.empty()) end_record();
    return records;
}

CsvDoc read_csv_file(const std::string& path) {
    std::ifstream ifs(path, std::ios::binary);
    if (!ifs) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << ifs.rdbuf();
    auto records = parse_csv(buf.str());
    CsvDoc doc;
    if (records.empty()) return doc;
    doc.header = records.front();
    doc.rows.assign(records.begin() + 1, records.end());
    return doc;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        const std::string& f = fields[i];
        bool quote = f.find_first_of(",\"\r\n") != std::string::npos;
        if (!quote) {
            os << f;
            continue;
        }
        os << '"';
        for (char c : f) {
            if (c == '"') os << "\"\"";
            else os << c;
        }
        os << '"';
    }
    os << '\n';
}

} // namespace quizpipe
