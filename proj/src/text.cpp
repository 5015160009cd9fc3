#include "knovo/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace knovo::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

constexpr std::array<std::string_view, 24> kStopTokens = {
    "a",  "an", "and", "are", "as",   "at",  "be",   "by",   "for",  "from", "in",  "into",
    "is", "it", "its", "of",  "on",   "or",  "than", "that", "the",  "this", "to",  "with",
};
static_assert(std::is_sorted(kStopTokens.begin(), kStopTokens.end()));

}  // namespace

std::string trim(std::string_view s) {
    auto begin = std::find_if_not(s.begin(), s.end(), is_space);
    auto end = std::find_if_not(s.rbegin(), s.rend(), is_space).base();
    return begin < end ? std::string(begin, end) : std::string();
}

bool is_blank(std::string_view s) { return std::all_of(s.begin(), s.end(), is_space); }

std::string normalize_key(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(lower(c));
    }
    return out;
}

bool is_stop_token(std::string_view token) {
    return std::binary_search(kStopTokens.begin(), kStopTokens.end(), token);
}

std::vector<std::string> content_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && !is_stop_token(current)) tokens.push_back(current);
        current.clear();
    };
    for (char c : s) {
        if (is_alnum(c)) {
            current.push_back(lower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::string slug(std::string_view s) {
    std::string out;
    for (char c : normalize_key(s)) {
        if (is_alnum(c)) {
            out.push_back(c);
        } else if (!out.empty() && out.back() != '-') {
            out.push_back('-');
        }
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? std::string("dimension") : out;
}

}  // namespace knovo::text
