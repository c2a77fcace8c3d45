#include "quizpipe/text.hpp"

#include <cctype>

namespace quizpipe {

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

namespace {

// Keep ASCII letters/digits/whitespace and all bytes >= 0x80 (UTF-8 payload).
bool keep_char(unsigned char c) {
    return c >= 0x80 || std::isalnum(c) || std::isspace(c);
}

} // namespace

std::vector<std::string> normalize_tokens(std::string_view s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (!keep_char(c)) continue;
        cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    return split_ws(cleaned);
}

bool contains_phrase(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > tokens.size()) return false;
    for (size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
        bool hit = true;
        for (size_t j = 0; j < phrase.size(); ++j) {
            if (tokens[i + j] != phrase[j]) { hit = false; break; }
        }
        if (hit) return true;
    }
    return false;
}

bool contains_token(const std::vector<std::string>& tokens, std::string_view token) {
    for (const auto& t : tokens)
        if (t == token) return true;
    return false;
}

} // namespace quizpipe
