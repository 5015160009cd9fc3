#pragma once

#include <span>
#include <string>
#include <string_view>

#include "knovo/dimensions.hpp"
#include "knovo/score_matrix.hpp"

namespace knovo {

class Gateway;

// Semantic judgement for values that cannot be ordered by magnitude. Implementations may return
// any score; callers apply the clamping rules for categorical dimensions.
class Judge {
  public:
    virtual ~Judge() = default;
    virtual ComparisonOutcome compare(const Dimension& dim, std::string_view target, std::string_view other) const = 0;
    virtual ComparisonOutcome compare_history(const Dimension& dim, std::string_view value,
                                              std::span<const std::string> history) const = 0;
};

// Deterministic stand-in: distinct text counts as an advance, matching text as equivalent.
class ExactMatchJudge final : public Judge {
  public:
    ComparisonOutcome compare(const Dimension& dim, std::string_view target, std::string_view other) const override;
    ComparisonOutcome compare_history(const Dimension& dim, std::string_view value,
                                      std::span<const std::string> history) const override;
};

// Routes judgements through the gateway (prompts compare.v1 and compare_history.v1).
// Backend failure maps to not_applicable with justification "backend failure".
class GatewayJudge final : public Judge {
  public:
    explicit GatewayJudge(Gateway& gateway) : gateway_(gateway) {}
    ComparisonOutcome compare(const Dimension& dim, std::string_view target, std::string_view other) const override;
    ComparisonOutcome compare_history(const Dimension& dim, std::string_view value,
                                      std::span<const std::string> history) const override;

  private:
    Gateway& gateway_;
};

}  // namespace knovo
