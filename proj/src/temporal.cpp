#include "knovo/temporal.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "knovo/numeric.hpp"
#include "knovo/parallel.hpp"
#include "knovo/text.hpp"

namespace knovo {

namespace {

ComparisonOutcome numeric_against_best(const Dimension& dim, std::string_view value, const BestState& best) {
    auto m = extract_magnitude(value);
    if (!m) return {Score::not_applicable, "no comparable magnitude in '" + std::string(value) + "'"};
    if (!best.initialized) return {Score::plus_one, fmt::format("first observation {}", m->value)};
    auto b = extract_magnitude(best.source);
    if (b && !units_compatible(m->unit, b->unit)) {
        return {Score::not_applicable, fmt::format("unit '{}' not comparable with '{}'", m->unit, b->unit)};
    }
    const double frontier = *best.magnitude;
    const bool higher = dim.direction == Direction::higher_better;
    const char* rule = higher ? "higher is better" : "lower is better";
    if (m->value == frontier) return {Score::zero, fmt::format("ties best so far {} ({})", frontier, rule)};
    const bool better = higher ? m->value > frontier : m->value < frontier;
    if (better) return {Score::plus_one, fmt::format("{} improves on best so far {} ({})", m->value, frontier, rule)};
    return {Score::minus_one, fmt::format("{} trails best so far {} ({})", m->value, frontier, rule)};
}

ComparisonOutcome categorical_against_best(const Dimension& dim, std::string_view value, const BestState& best,
                                           const Judge& judge) {
    if (!best.initialized) return {Score::plus_one, "first observation"};
    const std::string v = text::normalize_key(value);
    for (const auto& h : best.history) {
        if (text::normalize_key(h) == v) return {Score::zero, "already in the best-so-far history as '" + h + "'"};
    }
    auto out = judge.compare_history(dim, value, best.history);
    if (out.score == Score::minus_one) {
        out.score = Score::zero;
        out.justification += " [inferiority is not scored on categorical dimensions]";
    }
    if (out.score == Score::not_applicable) {
        spdlog::warn("history comparison on '{}' failed: {}", dim.key, out.justification);
    } else if (text::is_blank(out.justification)) {
        out.justification = "no justification given";
    }
    return out;
}

struct Fold {
    std::vector<int> cumulative;
    std::vector<BestState> best;
    std::vector<ComparisonOutcome> outcomes;
};

Fold fold_dimension(const Dimension& dim, std::span<const ValueAssignment* const> column, const Judge& judge) {
    Fold f;
    BestState state;
    int nu = 0;
    for (const ValueAssignment* a : column) {
        const std::string& value = a->value(dim.key);
        auto out = compare_against_best(dim, value, state, judge);
        state = update_best(std::move(state), out, value, dim);
        if (out.score == Score::plus_one) ++nu;
        f.cumulative.push_back(nu);
        f.best.push_back(state);
        f.outcomes.push_back(std::move(out));
    }
    return f;
}

std::vector<const ValueAssignment*> align(std::span<const SequenceStep> steps,
                                          std::span<const ValueAssignment> assignments) {
    std::map<std::string_view, const ValueAssignment*> by_id;
    for (const auto& a : assignments) by_id.emplace(a.paper_id, &a);
    std::vector<const ValueAssignment*> out;
    out.reserve(steps.size());
    for (const auto& s : steps) {
        auto it = by_id.find(s.paper_id);
        if (it == by_id.end()) throw std::invalid_argument("no value assignment for sequence paper " + s.paper_id);
        out.push_back(it->second);
    }
    return out;
}

TemporalSeries assemble(std::span<const SequenceStep> steps, const DimensionSet& dims, std::vector<Fold> folds) {
    TemporalSeries s;
    s.steps.assign(steps.begin(), steps.end());
    s.dimensions = dims.keys();
    std::vector<std::string> ids;
    for (const auto& st : steps) ids.push_back(st.paper_id);
    s.matrix = ScoreMatrix(MatrixMode::temporal, std::move(ids), s.dimensions);
    s.average.assign(steps.size(), 0.0);
    for (std::size_t d = 0; d < folds.size(); ++d) {
        for (std::size_t i = 0; i < steps.size(); ++i) {
            s.matrix.at(i, d) = std::move(folds[d].outcomes[i]);
            s.average[i] += folds[d].cumulative[i];
        }
        s.cumulative.push_back(std::move(folds[d].cumulative));
        s.best.push_back(std::move(folds[d].best));
    }
    if (!dims.empty()) {
        for (auto& v : s.average) v /= static_cast<double>(dims.size());
    }
    s.marginal = marginal_advancement(s.average);
    return s;
}

}  // namespace

ComparisonOutcome compare_against_best(const Dimension& dim, std::string_view value, const BestState& best,
                                       const Judge& judge) {
    if (text::is_blank(value)) return {Score::not_applicable, "not addressed"};
    if (dim.value_type == ValueType::numeric) return numeric_against_best(dim, value, best);
    return categorical_against_best(dim, value, best, judge);
}

BestState update_best(BestState best, const ComparisonOutcome& outcome, std::string_view value, const Dimension& dim) {
    if (outcome.score != Score::plus_one) return best;
    best.initialized = true;
    if (dim.value_type == ValueType::numeric) {
        auto m = extract_magnitude(value);
        if (!m) return best;
        best.magnitude = m->value;
        best.source = std::string(value);
    } else {
        best.history.emplace_back(value);
    }
    return best;
}

std::vector<SequenceStep> sequence_steps(const Sequence& sequence, std::string_view target_id) {
    std::vector<SequenceStep> steps;
    steps.reserve(sequence.papers.size());
    for (const auto& p : sequence.papers) {
        steps.push_back({p.paper_id, p.effective_date().value_or(Date{}), p.paper_id == target_id});
    }
    return steps;
}

std::optional<std::size_t> TemporalSeries::target_position() const {
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].is_target) return i;
    }
    return std::nullopt;
}

TemporalSeries run_temporal(std::span<const SequenceStep> steps, const DimensionSet& dims,
                            std::span<const ValueAssignment> assignments, const Judge& judge) {
    auto column = align(steps, assignments);
    std::vector<Fold> folds(dims.size());
    parallel_for(dims.size(), [&](std::size_t d) { folds[d] = fold_dimension(dims[d], column, judge); });
    return assemble(steps, dims, std::move(folds));
}

namespace reference {
TemporalSeries run_temporal(std::span<const SequenceStep> steps, const DimensionSet& dims,
                            std::span<const ValueAssignment> assignments, const Judge& judge) {
    auto column = align(steps, assignments);
    std::vector<Fold> folds;
    for (const auto& d : dims) folds.push_back(fold_dimension(d, column, judge));
    return assemble(steps, dims, std::move(folds));
}
}  // namespace reference

std::vector<double> marginal_advancement(std::span<const double> average) {
    std::vector<double> out;
    out.reserve(average.size());
    double previous = 0.0;
    for (double v : average) {
        out.push_back(v - previous);
        previous = v;
    }
    return out;
}

}  // namespace knovo
