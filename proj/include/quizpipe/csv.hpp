#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace quizpipe {

// A CSV document with the first record treated as the header.
struct CsvDoc {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<size_t> col(std::string_view name) const;
};

// RFC-4180 style parse: quoted fields, escaped quotes, embedded
// commas/newlines, CRLF line ends. Returns all records including the header.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

CsvDoc read_csv_file(const std::string& path);

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

} // namespace quizpipe
