#pragma once

// Token-set Jaccard using std::regex tokenization, independent of the engine's tokenizer.

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <string>

namespace oracle {

inline std::set<std::string> token_set(std::string s) {
    static const std::set<std::string> stop = {"a",  "an", "and", "are", "as",   "at",   "be",   "by",
                                               "for", "from", "in",  "into", "is",   "it",   "its",  "of",
                                               "on", "or", "than", "that", "the", "this", "to", "with"};
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::set<std::string> out;
    static const std::regex word("[a-z0-9]+");
    for (auto it = std::sregex_iterator(s.begin(), s.end(), word); it != std::sregex_iterator(); ++it) {
        if (!stop.contains(it->str())) out.insert(it->str());
    }
    return out;
}

inline double jaccard(const std::string& a, const std::string& b) {
    auto sa = token_set(a);
    auto sb = token_set(b);
    std::set<std::string> uni = sa;
    uni.insert(sb.begin(), sb.end());
    if (uni.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& t : sa) common += sb.contains(t) ? 1 : 0;
    return static_cast<double>(common) / static_cast<double>(uni.size());
}

}  // namespace oracle
