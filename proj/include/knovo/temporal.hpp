#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "knovo/corpus.hpp"
#include "knovo/dimensions.hpp"
#include "knovo/judge.hpp"
#include "knovo/score_matrix.hpp"

namespace knovo {

// Best-so-far frontier of one dimension. Numeric dimensions keep a single magnitude and the text
// it came from; categorical dimensions keep the ordered history of distinct advancing values.
struct BestState {
    bool initialized = false;
    std::optional<double> magnitude;
    std::string source;
    std::vector<std::string> history;

    bool operator==(const BestState&) const = default;
};

ComparisonOutcome compare_against_best(const Dimension& dim, std::string_view value, const BestState& best,
                                       const Judge& judge);

BestState update_best(BestState best, const ComparisonOutcome& outcome, std::string_view value, const Dimension& dim);

struct SequenceStep {
    std::string paper_id;
    Date date;
    bool is_target = false;

    bool operator==(const SequenceStep&) const = default;
};

std::vector<SequenceStep> sequence_steps(const Sequence& sequence, std::string_view target_id);

// Step i of every per-step vector is the state after the (i+1)-th paper; nu(d, 0) = 0 is implicit.
struct TemporalSeries {
    std::vector<SequenceStep> steps;
    std::vector<std::string> dimensions;
    std::vector<std::vector<int>> cumulative;     // [dimension][step]
    std::vector<std::vector<BestState>> best;     // [dimension][step]
    std::vector<double> average;
    std::vector<double> marginal;
    ScoreMatrix matrix;  // rows = steps, mode temporal

    std::optional<std::size_t> target_position() const;
    bool operator==(const TemporalSeries&) const = default;
};

// Dimensions are folded independently and in parallel. Every step needs an assignment.
TemporalSeries run_temporal(std::span<const SequenceStep> steps, const DimensionSet& dims,
                            std::span<const ValueAssignment> assignments, const Judge& judge);

namespace reference {
TemporalSeries run_temporal(std::span<const SequenceStep> steps, const DimensionSet& dims,
                            std::span<const ValueAssignment> assignments, const Judge& judge);
}

// First difference of the average series with a leading zero.
std::vector<double> marginal_advancement(std::span<const double> average);

}  // namespace knovo
