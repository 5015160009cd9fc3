#include "knovo/scoring.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "knovo/numeric.hpp"
#include "knovo/parallel.hpp"
#include "knovo/text.hpp"

namespace knovo {

namespace {

void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}

ComparisonOutcome clamp_for(const Dimension& dim, ComparisonOutcome out) {
    if (dim.value_type == ValueType::categorical && out.score == Score::minus_one) {
        out.score = Score::zero;
        out.justification += " [inferiority is not scored on categorical dimensions]";
    }
    if (out.score != Score::not_applicable && text::is_blank(out.justification)) out.justification = "no justification given";
    return out;
}

void fill_row(ScoreMatrix& m, std::size_t r, const DimensionSet& dims, const ValueAssignment& target,
              const ValueAssignment& other, const Judge& judge) {
    for (std::size_t c = 0; c < dims.size(); ++c) {
        const auto& d = dims[c];
        m.at(r, c) = compare_pair(d, target.value(d.key), other.value(d.key), judge);
    }
}

std::vector<std::string> row_ids(std::span<const ValueAssignment> related) {
    std::vector<std::string> ids;
    ids.reserve(related.size());
    for (const auto& a : related) ids.push_back(a.paper_id);
    return ids;
}

}  // namespace

std::optional<ComparisonOutcome> compare_magnitudes(const Dimension& dim, std::string_view target_value,
                                                    std::string_view other_value) {
    auto t = extract_magnitude(target_value);
    auto o = extract_magnitude(other_value);
    if (!t || !o) return std::nullopt;
    const bool higher = dim.direction == Direction::higher_better;
    const char* rule = higher ? "higher is better" : "lower is better";
    if (t->value == o->value) return ComparisonOutcome{Score::zero, fmt::format("equal magnitude {} ({})", t->value, rule)};
    const bool target_better = higher ? t->value > o->value : t->value < o->value;
    if (target_better) {
        return ComparisonOutcome{Score::plus_one, fmt::format("target {} beats {} ({})", t->value, o->value, rule)};
    }
    return ComparisonOutcome{Score::minus_one, fmt::format("target {} trails {} ({})", t->value, o->value, rule)};
}

ComparisonOutcome compare_pair(const Dimension& dim, std::string_view target_value, std::string_view other_value,
                               const Judge& judge) {
    if (text::is_blank(target_value)) return {Score::not_applicable, "target value missing"};
    if (text::is_blank(other_value)) return {Score::not_applicable, "not addressed in the related paper"};
    if (text::normalize_key(target_value) == text::normalize_key(other_value)) return {Score::zero, "identical values"};
    if (dim.value_type == ValueType::numeric) {
        if (auto out = compare_magnitudes(dim, target_value, other_value)) return *out;
    }
    return clamp_for(dim, judge.compare(dim, target_value, other_value));
}

ScoreMatrix build_score_matrix(const DimensionSet& dims, const ValueAssignment& target,
                               std::span<const ValueAssignment> related, const Judge& judge) {
    ScoreMatrix m(MatrixMode::overall, row_ids(related), dims.keys());
    const std::size_t cols = dims.size();
    parallel_for(related.size() * cols, [&](std::size_t cell) {
        const std::size_t r = cell / cols;
        const std::size_t c = cell % cols;
        const auto& d = dims[c];
        m.at(r, c) = compare_pair(d, target.value(d.key), related[r].value(d.key), judge);
    });
    return m;
}

namespace reference {
ScoreMatrix build_score_matrix(const DimensionSet& dims, const ValueAssignment& target,
                               std::span<const ValueAssignment> related, const Judge& judge) {
    ScoreMatrix m(MatrixMode::overall, row_ids(related), dims.keys());
    for (std::size_t r = 0; r < related.size(); ++r) fill_row(m, r, dims, target, related[r], judge);
    return m;
}
}  // namespace reference

ColumnTally tally(const ScoreMatrix& m, std::size_t column) {
    ColumnTally t;
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        switch (m.at(r, column).score) {
            case Score::plus_one: ++t.plus; break;
            case Score::zero: ++t.zero; break;
            case Score::minus_one: ++t.minus; break;
            case Score::not_applicable: ++t.null; break;
        }
    }
    return t;
}

std::vector<double> compute_weights(const ScoreMatrix& m) {
    const std::size_t cols = m.column_count();
    std::vector<double> w(cols, 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
        auto t = tally(m, c);
        w[c] = t.non_null() > 0 ? static_cast<double>(t.plus) / static_cast<double>(t.non_null()) : 0.0;
        total += w[c];
    }
    for (auto& x : w) x = total > 0.0 ? x / total : 1.0 / static_cast<double>(cols);
    return w;
}

double dimension_score(const ScoreMatrix& m, std::size_t column, double alpha) {
    check_alpha(alpha);
    auto t = tally(m, column);
    if (t.non_null() == 0) return 0.0;
    const double n = static_cast<double>(t.non_null());
    return static_cast<double>(t.plus) / n + alpha * (static_cast<double>(t.zero) / n) - static_cast<double>(t.minus) / n;
}

double weighted_novelty(const ScoreMatrix& m, std::span<const double> weights, double alpha) {
    if (weights.size() != m.column_count()) throw std::invalid_argument("one weight per column required");
    double omega = 0.0;
    for (std::size_t c = 0; c < m.column_count(); ++c) omega += weights[c] * dimension_score(m, c, alpha);
    return omega;
}

NoveltyReport overall_novelty(const ScoreMatrix& m, double alpha) {
    check_alpha(alpha);
    NoveltyReport report;
    report.alpha = alpha;
    auto weights = compute_weights(m);
    for (std::size_t c = 0; c < m.column_count(); ++c) {
        auto t = tally(m, c);
        DimensionScore d;
        d.key = m.columns[c];
        d.count = t.non_null();
        if (d.count > 0) {
            const double n = static_cast<double>(d.count);
            d.p_plus = static_cast<double>(t.plus) / n;
            d.p_zero = static_cast<double>(t.zero) / n;
            d.p_minus = static_cast<double>(t.minus) / n;
        }
        d.raw_weight = d.p_plus;
        d.weight = weights[c];
        d.score = dimension_score(m, c, alpha);
        report.omega += d.weight * d.score;
        report.dimensions.push_back(std::move(d));
    }
    return report;
}

std::optional<double> refs_only_novelty(const ScoreMatrix& m, const CitationNetwork& network, double alpha) {
    auto refs = select_rows(m, [&](const std::string& id) {
        const PaperRecord* p = network.find(id);
        return p && p->relation == Relation::reference;
    });
    if (refs.row_count() == 0) return std::nullopt;
    return overall_novelty(refs, alpha).omega;
}

}  // namespace knovo
