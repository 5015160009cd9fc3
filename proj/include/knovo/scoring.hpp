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

inline constexpr double kDefaultAlpha = 0.5;

// Target value vs. a related paper's value on one dimension.
//  - empty related value -> not_applicable
//  - identical (normalized) text -> zero
//  - numeric dimension with magnitudes on both sides -> ordered by the improvement direction
//  - otherwise the judge decides; minus_one is clamped to zero on categorical dimensions
ComparisonOutcome compare_pair(const Dimension& dim, std::string_view target_value, std::string_view other_value,
                               const Judge& judge);

// Magnitude ordering alone; nullopt when either side has no magnitude.
std::optional<ComparisonOutcome> compare_magnitudes(const Dimension& dim, std::string_view target_value,
                                                    std::string_view other_value);

// Rows follow `related`, columns follow `dims`. Cells are evaluated in parallel.
ScoreMatrix build_score_matrix(const DimensionSet& dims, const ValueAssignment& target,
                               std::span<const ValueAssignment> related, const Judge& judge);

namespace reference {
ScoreMatrix build_score_matrix(const DimensionSet& dims, const ValueAssignment& target,
                               std::span<const ValueAssignment> related, const Judge& judge);
}

struct ColumnTally {
    std::size_t plus = 0;
    std::size_t zero = 0;
    std::size_t minus = 0;
    std::size_t null = 0;

    std::size_t non_null() const { return plus + zero + minus; }
};

ColumnTally tally(const ScoreMatrix& m, std::size_t column);

// w'_d = P_d(+1), normalized to sum 1; uniform 1/m when every raw weight is zero.
std::vector<double> compute_weights(const ScoreMatrix& m);

// P_d(+1) + alpha * P_d(0) - P_d(-1); 0 when the column has no non-null cell.
double dimension_score(const ScoreMatrix& m, std::size_t column, double alpha);

// Sum of weights[d] * Score_d with caller-supplied weights.
double weighted_novelty(const ScoreMatrix& m, std::span<const double> weights, double alpha);

struct DimensionScore {
    std::string key;
    std::size_t count = 0;  // N_d
    double p_plus = 0.0;
    double p_zero = 0.0;
    double p_minus = 0.0;
    double raw_weight = 0.0;
    double weight = 0.0;
    double score = 0.0;

    bool operator==(const DimensionScore&) const = default;
};

struct NoveltyReport {
    std::vector<DimensionScore> dimensions;
    double alpha = kDefaultAlpha;
    double omega = 0.0;
    std::optional<double> omega_refs_only;

    bool operator==(const NoveltyReport&) const = default;
};

NoveltyReport overall_novelty(const ScoreMatrix& m, double alpha = kDefaultAlpha);

// Rows kept when `keep(row_id)` is true, columns unchanged.
template <typename Pred>
ScoreMatrix select_rows(const ScoreMatrix& m, Pred keep) {
    ScoreMatrix out(m.mode, {}, m.columns);
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        if (!keep(m.rows[r])) continue;
        out.rows.push_back(m.rows[r]);
        for (std::size_t c = 0; c < m.column_count(); ++c) out.cells.push_back(m.at(r, c));
    }
    return out;
}

// Omega over the rows whose paper is a reference (either layer); nullopt when there are none.
std::optional<double> refs_only_novelty(const ScoreMatrix& m, const CitationNetwork& network,
                                        double alpha = kDefaultAlpha);

}  // namespace knovo
