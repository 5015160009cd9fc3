#include <doctest.h>

#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "knovo/backends.hpp"
#include "knovo/evolution.hpp"
#include "knovo/gateway.hpp"
#include "knovo/judge.hpp"
#include "knovo/parallel.hpp"
#include "oracles/forest_oracle.hpp"
#include "oracles/lexical_oracle.hpp"

using namespace knovo;

namespace {

AdvancingPaper node(std::string id, int year, std::string value = "v", int cluster = kNoise) {
    AdvancingPaper p;
    p.paper_id = std::move(id);
    p.year = year;
    p.date = Date{year, 1, 1};
    p.value = std::move(value);
    p.cluster = cluster;
    return p;
}

AdvancingPaper at(std::vector<double> e) {
    AdvancingPaper p = node("x", 2000);
    double n = 0;
    for (double x : e) n += x * x;
    for (double& x : e) x /= std::sqrt(n);
    p.embedding = std::move(e);
    return p;
}

RelateFn always(std::optional<bool> answer, std::atomic<int>* calls = nullptr) {
    return [answer, calls](const AdvancingPaper&, const AdvancingPaper&) {
        if (calls) ++*calls;
        return answer;
    };
}

// Confidences keyed by "from>to".
RelateFn table(const std::map<std::string, int>& conf) {
    return [conf](const AdvancingPaper& a, const AdvancingPaper& b) -> std::optional<bool> {
        return conf.contains(a.paper_id + ">" + b.paper_id);
    };
}

}  // namespace

TEST_CASE("advancing set follows the plus_one cells") {
    ExactMatchJudge judge;
    DimensionSet dims;
    dims.add({"accuracy", ValueType::numeric});
    dims.add({"architecture type"});
    std::vector<SequenceStep> steps;
    std::vector<ValueAssignment> values;
    std::vector<std::string> acc{"0.70", "0.65", "0.80", "0.80"};
    std::vector<std::string> arch{"", "", "", ""};
    for (int i = 0; i < 4; ++i) {
        std::string id = "p" + std::to_string(i + 1);
        steps.push_back({id, Date{2014 + i, 3, 1}, false});
        values.push_back({id, {{"accuracy", acc[i]}, {"architecture type", arch[i]}}});
    }
    auto series = run_temporal(steps, dims, values, judge);
    auto adv = advancing_set(series, "accuracy");
    REQUIRE(adv.size() == 2);
    CHECK(adv[0].paper_id == "p1");
    CHECK(adv[1].paper_id == "p3");
    CHECK(adv[1].value == "0.80");
    CHECK(adv[1].year == 2016);
    CHECK(adv[1].date == Date{2016, 3, 1});
    CHECK(advancing_set(series, "architecture type").empty());
}

TEST_CASE("lexical overlap") {
    auto o = lexical_overlap("transformer encoder", "transformer decoder");
    CHECK(o.score == doctest::Approx(1.0 / 3.0));
    CHECK(o.band == OverlapBand::low);
    auto same = lexical_overlap("Multi-Head Attention", "multi-head attention");
    CHECK(same.score == 1.0);
    CHECK(same.band == OverlapBand::high);
    CHECK(lexical_overlap("convolution", "recurrence").score == 0.0);
    CHECK(lexical_overlap("the encoder", "an encoder").band == OverlapBand::high);

    std::mt19937 rng(23);
    const std::vector<std::string> words{"the", "attention", "of", "self", "encoder", "decoder", "RNN", "lstm", "and", "2014"};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(1, 5);
    for (int t = 0; t < 500; ++t) {
        std::string a, b;
        for (std::size_t i = 0, n = len(rng); i < n; ++i) a += words[pick(rng)] + " ";
        for (std::size_t i = 0, n = len(rng); i < n; ++i) b += words[pick(rng)] + " ";
        auto got = lexical_overlap(a, b);
        double want = oracle::jaccard(a, b);
        if (oracle::token_set(a).empty() && oracle::token_set(b).empty()) continue;
        CHECK(got.score == doctest::Approx(want));
        CHECK((got.band == OverlapBand::high) == (want >= 0.5));
    }
}

TEST_CASE("density clustering over cosine distance") {
    std::vector<AdvancingPaper> twins{at({1, 0}), at({1, 0})};
    cluster_values(twins);
    CHECK(twins[0].cluster == 0);
    CHECK(twins[1].cluster == 0);

    std::vector<AdvancingPaper> lone{at({1, 0})};
    cluster_values(lone);
    CHECK(lone[0].cluster == kNoise);

    // Two tight groups and one outlier; labels follow the first core point.
    std::vector<AdvancingPaper> mixed{at({0, 1, 0}), at({1, 0, 0}), at({0.95, 0.05, 0}), at({0.05, 0.95, 0}), at({0, 0, 1})};
    cluster_values(mixed);
    CHECK(mixed[0].cluster == 0);
    CHECK(mixed[3].cluster == 0);
    CHECK(mixed[1].cluster == 1);
    CHECK(mixed[2].cluster == 1);
    CHECK(mixed[4].cluster == kNoise);

    std::vector<AdvancingPaper> far{at({1, 0}), at({0, 1})};
    cluster_values(far);
    CHECK(far[0].cluster == kNoise);
    CHECK(far[1].cluster == kNoise);

    CHECK_THROWS_AS(cluster_values(twins, {0.0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(cluster_values(twins, {0.35, 1}), std::invalid_argument);
}

TEST_CASE("cosine distances are symmetric and match the serial version") {
    std::mt19937 rng(29);
    std::normal_distribution<double> g;
    std::vector<AdvancingPaper> papers;
    for (int i = 0; i < 40; ++i) papers.push_back(at({g(rng), g(rng), g(rng), g(rng)}));
    set_thread_count(4);
    auto d = cosine_distances(papers);
    CHECK(d == reference::cosine_distances(papers));
    for (std::size_t i = 0; i < papers.size(); ++i) {
        CHECK(d[i * papers.size() + i] == doctest::Approx(0.0));
        for (std::size_t j = 0; j < papers.size(); ++j) CHECK(d[i * papers.size() + j] == d[j * papers.size() + i]);
    }
}

TEST_CASE("confidence follows the prioritized branches") {
    std::atomic<int> calls{0};
    auto a = node("a", 2014, "self attention", 2);
    auto b = node("b", 2015, "self attention layers", 2);
    auto c = node("c", 2016, "multi-head attention mechanism", 2);
    CHECK(lexical_overlap(a.value, b.value).score >= 0.5);
    CHECK(confidence(a, b, always(false, &calls)) == 5);
    CHECK(confidence(a, c, always(true, &calls)) == 4);
    CHECK(calls == 0);

    auto n1 = node("n1", 2014, "x");
    auto n2 = node("n2", 2015, "y");
    auto k = node("k", 2015, "z", 1);
    CHECK(confidence(k, b, always(true)) == 3);
    CHECK(confidence(n1, b, always(true)) == 2);
    CHECK(confidence(b, n2, always(true)) == 2);
    CHECK(confidence(n1, n2, always(true)) == 1);
    CHECK(confidence(n1, n2, always(false)) == 0);
    CHECK(confidence(n1, b, always(std::nullopt)) == 0);
    CHECK(calls == 0);
}

TEST_CASE("graph construction") {
    std::vector<AdvancingPaper> three{node("a", 2014), node("b", 2015), node("c", 2016)};
    CHECK(build_relationship_graph("d", three, always(false)).edges.empty());

    auto g = build_relationship_graph("d", {node("late", 2017), node("early", 2015)}, always(true));
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].from == "early");
    CHECK(g.edges[0].to == "late");
    CHECK(g.edges[0].confidence == 1);
    CHECK(g.nodes[0].paper_id == "early");

    auto x = node("x", 2016);
    auto y = node("y", 2016);
    y.date = Date{2016, 2, 1};
    x.date = Date{2016, 9, 1};
    auto same_year = build_relationship_graph("d", {x, y}, always(true));
    CHECK(same_year.edges[0].from == "y");
    auto tie = build_relationship_graph("d", {node("q", 2016), node("p", 2016)}, always(true));
    CHECK(tie.edges[0].from == "p");
}

TEST_CASE("graph construction matches the serial version and never asks about shared clusters") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> year(2010, 2016), cl(-1, 2), coin(0, 1);
    set_thread_count(4);
    for (int t = 0; t < 50; ++t) {
        std::vector<AdvancingPaper> papers;
        for (int i = 0; i < 9; ++i) papers.push_back(node("p" + std::to_string(i), year(rng), "v" + std::to_string(i), cl(rng)));
        std::set<std::pair<std::string, std::string>> related;
        for (auto& a : papers)
            for (auto& b : papers)
                if (coin(rng)) related.emplace(a.paper_id, b.paper_id);
        std::atomic<int> bad{0};
        RelateFn relate = [&](const AdvancingPaper& a, const AdvancingPaper& b) -> std::optional<bool> {
            if (a.cluster != kNoise && a.cluster == b.cluster) ++bad;
            return related.contains({a.paper_id, b.paper_id});
        };
        auto g = build_relationship_graph("d", papers, relate);
        CHECK(g == reference::build_relationship_graph("d", papers, relate));
        CHECK(bad == 0);
        for (const auto& e : g.edges) {
            CHECK(g.node(e.from)->year <= g.node(e.to)->year);
            CHECK(e.confidence > 0);
        }
    }
}

TEST_CASE("three-node forest") {
    RelationshipGraph g;
    g.nodes = {node("A", 2014), node("B", 2015), node("C", 2016)};
    g.edges = {{"A", "B", 5}, {"A", "C", 3}, {"B", "C", 4}};
    auto f = build_forest(g, 1.0, 1.0);
    std::map<std::string, RelationshipEdge> by;
    for (const auto& e : f.edges) by[e.from + e.to] = e;
    CHECK(by["AB"].sigma == doctest::Approx(2.5));
    CHECK(by["BC"].sigma == doctest::Approx(2.0));
    CHECK(by["AC"].sigma == doctest::Approx(1.0));
    CHECK(by["AB"].in_forest);
    CHECK(by["BC"].in_forest);
    CHECK_FALSE(by["AC"].in_forest);
    auto roots = forest_roots(f);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0].paper_id == "A");

    // Brute force over every edge subset agrees on this instance.
    std::vector<oracle::WeightedEdge> w{{0, 1, 25}, {0, 2, 10}, {1, 2, 20}};
    CHECK(oracle::max_forest_weight(3, w) == 45);
}

TEST_CASE("forest edge cases") {
    RelationshipGraph empty;
    for (int i = 0; i < 4; ++i) empty.nodes.push_back(node("n" + std::to_string(i), 2010 + i));
    auto f = build_forest(empty);
    CHECK(forest_roots(f).size() == 4);

    CHECK(edge_sigma(4, 0, 1.0, 1.0) == 4.0);
    CHECK(edge_sigma(4, 1, 2.0, 0.0) == 16.0);
    CHECK(edge_sigma(3, 2, 0.0, 1.0) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(build_forest(empty, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_forest(empty, 1.0, -0.5), std::invalid_argument);

    RelationshipGraph backwards;
    backwards.nodes = {node("a", 2014), node("b", 2016)};
    backwards.edges = {{"b", "a", 3}};
    CHECK_THROWS_AS(build_forest(backwards), std::invalid_argument);

    // Equal sigma: (from, to) order decides which edge closes the cycle.
    RelationshipGraph tied;
    tied.nodes = {node("a", 2015), node("b", 2015), node("c", 2015)};
    tied.edges = {{"b", "c", 2}, {"a", "c", 2}, {"a", "b", 2}};
    auto t = build_forest(tied);
    for (const auto& e : t.edges) CHECK(e.in_forest == (e.from == "a"));
}

TEST_CASE("greedy forest is maximal on random small instances") {
    std::mt19937 rng(37);
    std::uniform_int_distribution<int> size(2, 6), year(0, 5), conf(0, 5);
    for (int t = 0; t < 100; ++t) {
        int n = size(rng);
        std::vector<AdvancingPaper> papers;
        for (int i = 0; i < n; ++i) papers.push_back(node(std::string(1, static_cast<char>('a' + i)), 2010 + year(rng)));
        std::map<std::string, int> conf_of;
        RelateFn relate = [&](const AdvancingPaper& a, const AdvancingPaper& b) -> std::optional<bool> {
            return conf_of.at(a.paper_id + b.paper_id) > 0;
        };
        for (auto& a : papers)
            for (auto& b : papers)
                if (a.paper_id != b.paper_id) conf_of[a.paper_id + b.paper_id] = conf(rng);
        auto g = build_relationship_graph("d", papers, relate);
        // Replace the relate-derived confidences with arbitrary 0..5 weights.
        std::vector<RelationshipEdge> edges;
        for (auto e : g.edges) {
            e.confidence = conf_of.at(e.from + e.to);
            if (e.confidence > 0) edges.push_back(e);
        }
        g.edges = edges;
        auto f = build_forest(g, 1.0, 1.0);

        std::map<std::string, int> index;
        for (std::size_t i = 0; i < f.nodes.size(); ++i) index[f.nodes[i].paper_id] = static_cast<int>(i);
        std::vector<oracle::WeightedEdge> weighted;
        std::int64_t chosen = 0;
        std::size_t chosen_count = 0;
        for (const auto& e : f.edges) {
            int gap = f.node(e.to)->year - f.node(e.from)->year;
            CHECK(gap >= 0);
            std::int64_t w = e.confidence * 60 / (gap + 1);
            CHECK(e.sigma * 60 == doctest::Approx(static_cast<double>(w)));
            weighted.push_back({index[e.from], index[e.to], w});
            if (e.in_forest) {
                chosen += w;
                ++chosen_count;
            }
        }
        CHECK(chosen == oracle::max_forest_weight(n, weighted));
        CHECK(static_cast<int>(chosen_count) == n - oracle::components(n, weighted));
        std::vector<oracle::WeightedEdge> picked;
        for (std::size_t k = 0; k < f.edges.size(); ++k)
            if (f.edges[k].in_forest) picked.push_back(weighted[k]);
        CHECK(oracle::acyclic(n, picked, (1u << picked.size()) - 1));
    }
}

TEST_CASE("relatedness through the gateway") {
    auto earlier = node("e", 2014, "encoder-decoder");
    auto later = node("l", 2017, "transformer");
    nlohmann::json payload = {{"dimension", "architecture type"},
                              {"earlier", {{"value", "encoder-decoder"}, {"year", 2014}}},
                              {"later", {{"value", "transformer"}, {"year", 2017}}}};
    nlohmann::json manifest = {
        {"entries", nlohmann::json::array({{{"prompt_id", "relate.v1"}, {"payload", payload}, {"output", {{"related", true}}}}})}};
    GatewayOptions o;
    o.sleep = [](std::chrono::milliseconds) {};
    Gateway gw(std::make_shared<ScriptedBackend>(manifest), o);
    auto relate = gateway_relate(gw, "architecture type");
    CHECK(relate(earlier, later) == true);
    CHECK(relate(later, earlier) == std::nullopt);
}
