#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace knovo {

// First number embedded in a value text, with the unit token that follows it.
// "28.4 BLEU on WMT 2014" -> {28.4, "bleu"}; "10-fold" -> {10, "fold"}; "26.54" -> {26.54, ""}.
struct Magnitude {
    double value = 0.0;
    std::string unit;

    bool operator==(const Magnitude&) const = default;
};

std::optional<Magnitude> extract_magnitude(std::string_view text);

// An empty unit is compatible with every unit.
bool units_compatible(std::string_view a, std::string_view b);

}  // namespace knovo
