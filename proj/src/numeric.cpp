#include "knovo/numeric.hpp"

#include <cctype>
#include <charconv>

#include "knovo/text.hpp"

namespace knovo {

namespace {

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string canonical_unit(std::string unit) {
    for (char& c : unit) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (text::is_stop_token(unit)) return {};
    if (unit.size() > 3 && unit.back() == 's') unit.pop_back();
    return unit;
}

}  // namespace

std::optional<Magnitude> extract_magnitude(std::string_view s) {
    std::size_t i = 0;
    for (; i < s.size(); ++i) {
        if (digit(s[i])) break;
        if (s[i] == '.' && i + 1 < s.size() && digit(s[i + 1])) break;
    }
    if (i == s.size()) return std::nullopt;

    // Digits that continue a word ("GPT3", "v2") are identifiers, not magnitudes.
    if (i > 0 && alpha(s[i - 1])) {
        std::size_t end = i;
        while (end < s.size() && alnum(s[end])) ++end;
        return extract_magnitude(s.substr(end));
    }

    bool negative = false;
    if (i > 0 && (s[i - 1] == '-' || s[i - 1] == '+') && (i == 1 || !alnum(s[i - 2]))) {
        negative = s[i - 1] == '-';
    }

    std::string number;
    std::size_t j = i;
    while (j < s.size() && digit(s[j])) number.push_back(s[j++]);
    // Thousands separators: "1,000,000".
    while (j + 3 < s.size() && s[j] == ',' && digit(s[j + 1]) && digit(s[j + 2]) && digit(s[j + 3]) &&
           (j + 4 >= s.size() || !digit(s[j + 4]))) {
        number.append(s.substr(j + 1, 3));
        j += 4;
    }
    if (j + 1 < s.size() && s[j] == '.' && digit(s[j + 1])) {
        number.push_back(s[j++]);
        while (j < s.size() && digit(s[j])) number.push_back(s[j++]);
    }

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec != std::errc() || ptr != number.data() + number.size()) return std::nullopt;
    if (negative) value = -value;

    std::size_t k = j;
    while (k < s.size() && s[k] == ' ') ++k;
    Magnitude m{value, {}};
    if (k < s.size() && s[k] == '%') {
        m.unit = "%";
        return m;
    }
    if (k == j && k < s.size() && s[k] == '-') ++k;
    std::string unit;
    while (k < s.size() && alpha(s[k])) unit.push_back(s[k++]);
    m.unit = canonical_unit(std::move(unit));
    return m;
}

bool units_compatible(std::string_view a, std::string_view b) { return a.empty() || b.empty() || a == b; }

}  // namespace knovo
