#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace knovo::text {

std::string trim(std::string_view s);
bool is_blank(std::string_view s);

// Lowercase, trim, and collapse internal whitespace to single spaces.
std::string normalize_key(std::string_view s);

bool is_stop_token(std::string_view token);

// Lowercased alphanumeric tokens with stop tokens removed, in order of appearance.
std::vector<std::string> content_tokens(std::string_view s);

// Filesystem-friendly form of a dimension key: "english to german bleu" -> "english-to-german-bleu".
std::string slug(std::string_view s);

}  // namespace knovo::text
