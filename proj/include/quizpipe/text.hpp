#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace quizpipe {

std::string to_lower(std::string_view s);

std::string trim(std::string_view s);

// Split on runs of whitespace; no empty tokens.
std::vector<std::string> split_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercase, strip punctuation (everything outside letters/digits/whitespace;
// bytes >= 0x80 are kept so UTF-8 letters survive), then split on whitespace.
// Articles are NOT removed here; phrase tables may contain them.
std::vector<std::string> normalize_tokens(std::string_view s);

// True if `phrase` occurs as a contiguous run inside `tokens`.
bool contains_phrase(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& phrase);

bool contains_token(const std::vector<std::string>& tokens, std::string_view token);

} // namespace quizpipe
