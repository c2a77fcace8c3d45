#include <doctest.h>

#include <sstream>

#include "quizpipe/csv.hpp"
#include "quizpipe/errors.hpp"
#include "quizpipe/text.hpp"

using namespace quizpipe;

TEST_CASE("split and join are inverses for single-space text") {
    CHECK(split_ws("  one  two\tthree\n") == std::vector<std::string>{"one", "two", "three"});
    CHECK(join({"one", "two", "three"}, " ") == "one two three");
    CHECK(split_ws("") == std::vector<std::string>{});
    CHECK(join({}, ",") == "");
}

TEST_CASE("normalize_tokens lowercases, drops punctuation, keeps articles") {
    CHECK(normalize_tokens("The FIRST riddle!") ==
          std::vector<std::string>{"the", "first", "riddle"});
    CHECK(normalize_tokens("we begin...") == std::vector<std::string>{"we", "begin"});
    CHECK(normalize_tokens("  ") == std::vector<std::string>{});
    // punctuation is deleted, not turned into separators
    CHECK(normalize_tokens("don't") == std::vector<std::string>{"dont"});
}

TEST_CASE("contains_phrase needs a contiguous run") {
    auto tokens = normalize_tokens("and now the first riddle for today");
    CHECK(contains_phrase(tokens, {"first", "riddle"}));
    CHECK(contains_phrase(tokens, {"and"}));
    CHECK_FALSE(contains_phrase(tokens, {"first", "today"}));
    CHECK_FALSE(contains_phrase(tokens, {"riddle", "first"}));
    CHECK_FALSE(contains_phrase({}, {"x"}));
    CHECK(contains_token(tokens, "riddle"));
    CHECK_FALSE(contains_token(tokens, "riddles"));
}

TEST_CASE("csv parse handles quoting, escapes, and CRLF") {
    auto rows = parse_csv("a,b,c\r\n\"x,y\",\"he said \"\"hi\"\"\",\"line\nbreak\"\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(rows[1] == std::vector<std::string>{"x,y", "he said \"hi\"", "line\nbreak"});
}

TEST_CASE("csv parse rejects an unterminated quote") {
    CHECK_THROWS_AS(parse_csv("a,b\n\"oops,c\n"), ValidationError);
}

TEST_CASE("csv writer round-trips awkward fields") {
    std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "with\nnewline", ""};
    std::ostringstream out;
    write_csv_row(out, fields);
    auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == fields);
}

TEST_CASE("csv header lookup") {
    CsvDoc doc;
    doc.header = {"Clue 1", "Answer"};
    CHECK(doc.col("Answer") == size_t{1});
    CHECK_FALSE(doc.col("Missing").has_value());
}
