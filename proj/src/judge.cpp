#include "knovo/judge.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "knovo/gateway.hpp"
#include "knovo/text.hpp"

namespace knovo {

using nlohmann::json;

ComparisonOutcome ExactMatchJudge::compare(const Dimension&, std::string_view target, std::string_view other) const {
    if (text::normalize_key(target) == text::normalize_key(other)) return {Score::zero, "same value"};
    return {Score::plus_one, "distinct value '" + std::string(target) + "' vs '" + std::string(other) + "'"};
}

ComparisonOutcome ExactMatchJudge::compare_history(const Dimension&, std::string_view value,
                                                   std::span<const std::string> history) const {
    const std::string v = text::normalize_key(value);
    bool seen = std::any_of(history.begin(), history.end(), [&](const auto& h) { return text::normalize_key(h) == v; });
    if (seen) return {Score::zero, "value already in the best-so-far history"};
    return {Score::plus_one, "new value '" + std::string(value) + "'"};
}

namespace {

ComparisonOutcome outcome_from(const std::optional<BackendResponse>& response) {
    if (!response) return {Score::not_applicable, "backend failure"};
    const json& out = response->structured_output;
    std::optional<int> score;
    if (!out["score"].is_null()) score = out["score"].get<int>();
    return {score_from_int(score), out["justification"].get<std::string>()};
}

}  // namespace

ComparisonOutcome GatewayJudge::compare(const Dimension& dim, std::string_view target, std::string_view other) const {
    InferenceTask task{TaskKind::compare,
                       "compare.v1",
                       json{{"dimension", dim.key},
                            {"target_value", std::string(target)},
                            {"other_value", std::string(other)},
                            {"value_type", to_string(dim.value_type)}},
                       "compare.v1"};
    try {
        return outcome_from(gateway_.invoke(task));
    } catch (const BackendUnavailable& e) {
        spdlog::warn("compare on '{}': {}", dim.key, e.what());
        return {Score::not_applicable, "backend failure"};
    }
}

ComparisonOutcome GatewayJudge::compare_history(const Dimension& dim, std::string_view value,
                                                std::span<const std::string> history) const {
    InferenceTask task{TaskKind::compare,
                       "compare_history.v1",
                       json{{"dimension", dim.key},
                            {"value", std::string(value)},
                            {"history", std::vector<std::string>(history.begin(), history.end())},
                            {"value_type", to_string(dim.value_type)}},
                       "compare.v1"};
    try {
        return outcome_from(gateway_.invoke(task));
    } catch (const BackendUnavailable& e) {
        spdlog::warn("history compare on '{}': {}", dim.key, e.what());
        return {Score::not_applicable, "backend failure"};
    }
}

}  // namespace knovo
