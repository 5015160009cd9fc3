#include <doctest.h>

#include <algorithm>
#include <random>

#include "knovo/judge.hpp"
#include "knovo/parallel.hpp"
#include "knovo/scoring.hpp"
#include "oracles/omega_oracle.hpp"

using namespace knovo;

namespace {

class FixedJudge final : public Judge {
  public:
    FixedJudge(Score s, std::string j) : outcome_{s, std::move(j)} {}
    ComparisonOutcome compare(const Dimension&, std::string_view, std::string_view) const override { return outcome_; }
    ComparisonOutcome compare_history(const Dimension&, std::string_view, std::span<const std::string>) const override {
        return outcome_;
    }

  private:
    ComparisonOutcome outcome_;
};

ScoreMatrix from_columns(const std::vector<oracle::Column>& cols) {
    std::size_t rows = cols.empty() ? 0 : cols[0].size();
    std::vector<std::string> row_ids, col_ids;
    for (std::size_t r = 0; r < rows; ++r) row_ids.push_back("r" + std::to_string(r));
    for (std::size_t c = 0; c < cols.size(); ++c) col_ids.push_back("d" + std::to_string(c));
    ScoreMatrix m(MatrixMode::overall, row_ids, col_ids);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) m.at(r, c).score = score_from_int(cols[c][r]);
    return m;
}

std::vector<oracle::Column> random_columns(std::mt19937& rng) {
    std::uniform_int_distribution<int> dims(1, 5), rows(0, 7), cell(-2, 1);
    std::vector<oracle::Column> cols(dims(rng));
    int n = rows(rng);
    for (auto& c : cols) {
        for (int r = 0; r < n; ++r) {
            int v = cell(rng);
            c.push_back(v == -2 ? std::nullopt : std::optional<int>(v));
        }
    }
    return cols;
}

const Dimension kBleu{"english to german bleu", ValueType::numeric};
const Dimension kTime{"training time", ValueType::numeric, Origin::extracted, Direction::lower_better};
const Dimension kArch{"architecture type"};

}  // namespace

TEST_CASE("pairwise comparison rules") {
    ExactMatchJudge judge;
    auto r = compare_pair(kBleu, "28.4 BLEU on WMT 2014 English-to-German", "26.54", judge);
    CHECK(r.score == Score::plus_one);
    CHECK(r.justification == "target 28.4 beats 26.54 (higher is better)");
    CHECK(compare_pair(kBleu, "28.4", "29.3 BLEU", judge).score == Score::minus_one);
    CHECK(compare_pair(kBleu, "28.4", "28.40", judge).score == Score::zero);
    CHECK(compare_pair(kTime, "3.5 days", "10 days", judge).score == Score::plus_one);
    CHECK(compare_pair(kArch, "Transformer", "  transformer ", judge).score == Score::zero);
    CHECK(compare_pair(kArch, "Transformer", "", judge).score == Score::not_applicable);
    CHECK(compare_pair(kArch, "", "RNN", judge).score == Score::not_applicable);
    auto na = compare_pair(kArch, "Transformer", " ", judge);
    CHECK(na.justification == "not addressed in the related paper");
}

TEST_CASE("categorical inferiority is clamped to equivalence") {
    FixedJudge minus(Score::minus_one, "older idea");
    auto r = compare_pair(kArch, "Transformer", "RNN", minus);
    CHECK(r.score == Score::zero);
    CHECK(r.justification.find("older idea") == 0);
    // Numeric dimension without magnitudes keeps the judge's minus_one.
    CHECK(compare_pair(kBleu, "state of the art", "strong", minus).score == Score::minus_one);
    FixedJudge silent(Score::plus_one, "");
    CHECK(compare_pair(kArch, "Transformer", "RNN", silent).justification == "no justification given");
    FixedJudge failed(Score::not_applicable, "backend failure");
    CHECK(compare_pair(kArch, "Transformer", "RNN", failed).score == Score::not_applicable);
}

TEST_CASE("score matrix is a complete grid with not_applicable rows for empty assignments") {
    DimensionSet dims;
    dims.add(kBleu);
    dims.add(kArch);
    ValueAssignment target{"t", {{"english to german bleu", "28.4"}, {"architecture type", "Transformer"}}};
    std::vector<ValueAssignment> related{
        {"a", {{"english to german bleu", "26.54"}, {"architecture type", "ConvS2S"}}},
        {"b", {{"english to german bleu", ""}, {"architecture type", ""}}},
        {"c", {{"english to german bleu", "29.3"}, {"architecture type", "Transformer"}}},
    };
    ExactMatchJudge judge;
    auto m = build_score_matrix(dims, target, related, judge);
    CHECK(m.cells.size() == 6);
    CHECK(m.rows == std::vector<std::string>{"a", "b", "c"});
    CHECK(m.at(1, 0).score == Score::not_applicable);
    CHECK(m.at(1, 1).score == Score::not_applicable);
    CHECK(m.at(2, 0).score == Score::minus_one);
    CHECK(m.at(2, 1).score == Score::zero);
    CHECK(m == reference::build_score_matrix(dims, target, related, judge));
    for (const auto& c : m.cells) {
        if (c.score != Score::not_applicable) CHECK_FALSE(c.justification.empty());
    }
    CHECK(justification(m, "a", "architecture type"));
    CHECK_FALSE(justification(m, "zz", "architecture type"));
}

TEST_CASE("worked two-dimension example") {
    std::vector<oracle::Column> cols{{1, 1, 0}, {1, -1, std::nullopt}};
    auto m = from_columns(cols);
    auto w = compute_weights(m);
    CHECK(w[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
    CHECK(dimension_score(m, 0, 0.5) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(dimension_score(m, 1, 0.5) == doctest::Approx(0.0));
    auto report = overall_novelty(m);
    CHECK(report.omega == doctest::Approx(10.0 / 21.0).epsilon(1e-12));
    CHECK(report.dimensions[1].count == 2);
    CHECK(report.dimensions[0].raw_weight == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("degenerate matrices") {
    auto all_null = from_columns({{std::nullopt, std::nullopt}, {std::nullopt, std::nullopt}});
    CHECK(compute_weights(all_null) == std::vector<double>{0.5, 0.5});
    CHECK(overall_novelty(all_null).omega == 0.0);
    auto single = from_columns({{1, 1, 1}});
    CHECK(compute_weights(single) == std::vector<double>{1.0});
    CHECK(overall_novelty(single).omega == 1.0);
    CHECK(dimension_score(from_columns({{1, -1}}), 0, 0.5) == 0.0);
    CHECK_THROWS_AS(overall_novelty(single, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(overall_novelty(single, -0.1), std::invalid_argument);
}

TEST_CASE("engine matches the rational oracle on random matrices") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        auto cols = random_columns(rng);
        auto m = from_columns(cols);
        for (auto [num, den] : {std::pair{0, 1}, {1, 2}, {1, 1}, {1, 3}}) {
            double alpha = static_cast<double>(num) / den;
            CHECK(overall_novelty(m, alpha).omega == doctest::Approx(oracle::omega(cols, {num, den}).value()).epsilon(1e-9));
        }
    }
}

TEST_CASE("report invariants hold on random matrices") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        auto cols = random_columns(rng);
        auto m = from_columns(cols);
        auto r = overall_novelty(m);
        CHECK(r.omega >= -1.0 - 1e-12);
        CHECK(r.omega <= 1.0 + 1e-12);
        double wsum = 0;
        for (const auto& d : r.dimensions) {
            wsum += d.weight;
            if (d.count > 0) CHECK(d.p_plus + d.p_zero + d.p_minus == doctest::Approx(1.0));
            for (double p : {d.p_plus, d.p_zero, d.p_minus}) {
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
            }
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));

        // Omega is 1 exactly when every non-null cell of every positively weighted column is +1.
        // An all-null matrix is the explicit Omega = 0 case, not a vacuous Omega = 1.
        bool all_plus = true;
        bool any_scored = false;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (r.dimensions[c].weight <= 0) continue;
            for (auto v : cols[c]) {
                all_plus &= !v || *v == 1;
                any_scored |= v.has_value();
            }
        }
        if (any_scored) {
            CHECK((std::abs(r.omega - 1.0) < 1e-12) == all_plus);
        } else {
            CHECK(r.omega == 0.0);
        }
    }
}

TEST_CASE("omega is invariant under row and column permutations") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        auto cols = random_columns(rng);
        double base = overall_novelty(from_columns(cols)).omega;
        auto shuffled = cols;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (!shuffled.empty() && !shuffled[0].empty()) {
            std::vector<std::size_t> perm(shuffled[0].size());
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (auto& c : shuffled) {
                oracle::Column p;
                for (auto i : perm) p.push_back(c[i]);
                c = p;
            }
        }
        CHECK(overall_novelty(from_columns(shuffled)).omega == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("flipping zero to plus_one never lowers omega under fixed weights") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        auto cols = random_columns(rng);
        auto m = from_columns(cols);
        auto w = compute_weights(m);
        double before = weighted_novelty(m, w, 0.5);
        for (std::size_t i = 0; i < m.cells.size(); ++i) {
            if (m.cells[i].score != Score::zero) continue;
            auto flipped = m;
            flipped.cells[i].score = Score::plus_one;
            CHECK(weighted_novelty(flipped, w, 0.5) >= before - 1e-12);
        }
    }
}

TEST_CASE("alpha sensitivity equals the equivalence proportion") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        auto m = from_columns(random_columns(rng));
        for (std::size_t c = 0; c < m.column_count(); ++c) {
            double d = dimension_score(m, c, 1.0) - dimension_score(m, c, 0.0);
            CHECK(d == doctest::Approx(tally(m, c).non_null() ? static_cast<double>(tally(m, c).zero) / tally(m, c).non_null() : 0.0));
        }
        auto t0 = overall_novelty(m, 0.0);
        for (const auto& d : t0.dimensions) CHECK(d.score == doctest::Approx(d.p_plus - d.p_minus));
    }
}

TEST_CASE("refs-only novelty uses reference rows of both layers") {
    CitationNetwork net;
    net.target.paper_id = "t";
    auto add = [&](std::string id, Relation rel, int layer) {
        PaperRecord p;
        p.paper_id = std::move(id);
        p.relation = rel;
        p.layer = layer;
        net.related.push_back(p);
    };
    add("r0", Relation::reference, 1);
    add("r1", Relation::reference, 2);
    add("r2", Relation::citation, 1);
    auto m = from_columns({{1, 1, -1}});
    auto refs = refs_only_novelty(m, net);
    REQUIRE(refs);
    CHECK(*refs == 1.0);
    CHECK(overall_novelty(m).omega != doctest::Approx(*refs));

    CitationNetwork citations_only = net;
    for (auto& p : citations_only.related) p.relation = Relation::citation;
    CHECK_FALSE(refs_only_novelty(m, citations_only));
}
