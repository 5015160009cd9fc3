// Parallel kernels against their serial reference twins.

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <random>

#include "knovo/evolution.hpp"
#include "knovo/judge.hpp"
#include "knovo/parallel.hpp"
#include "knovo/scoring.hpp"
#include "knovo/temporal.hpp"

using namespace knovo;

namespace {

struct Workload {
    DimensionSet dims;
    ValueAssignment target;
    std::vector<ValueAssignment> related;
    std::vector<SequenceStep> steps;
};

const Workload& workload(std::size_t papers) {
    static std::map<std::size_t, Workload> cache;
    auto [it, fresh] = cache.try_emplace(papers);
    if (!fresh) return it->second;
    Workload& w = it->second;
    std::mt19937 rng(static_cast<unsigned>(papers));
    std::uniform_int_distribution<int> pick(0, 40);
    for (int d = 0; d < 16; ++d) {
        w.dims.add({"dim " + std::to_string(d), d % 2 ? ValueType::numeric : ValueType::categorical});
        w.target.values[w.dims[d].key] = d % 2 ? "20.5 points" : "method 7";
    }
    w.target.paper_id = "t";
    for (std::size_t i = 0; i < papers; ++i) {
        ValueAssignment a{"p" + std::to_string(i), {}};
        for (const auto& d : w.dims) {
            int v = pick(rng);
            a.values[d.key] = v == 0 ? "" : d.value_type == ValueType::numeric ? std::to_string(v) + " points" : "method " + std::to_string(v);
        }
        w.related.push_back(std::move(a));
        w.steps.push_back({"p" + std::to_string(i), Date{1990 + static_cast<int>(i % 30), 1, 1}, false});
    }
    return w;
}

std::vector<AdvancingPaper> advancing(std::size_t n) {
    std::mt19937 rng(static_cast<unsigned>(n));
    std::normal_distribution<double> g;
    std::vector<AdvancingPaper> out;
    for (std::size_t i = 0; i < n; ++i) {
        AdvancingPaper p;
        p.paper_id = "n" + std::to_string(i);
        p.year = 1990 + static_cast<int>(i % 30);
        p.date = Date{p.year, 1, 1};
        p.value = "value " + std::to_string(i % 13);
        p.embedding.resize(64);
        double norm = 0;
        for (double& x : p.embedding) {
            x = g(rng);
            norm += x * x;
        }
        for (double& x : p.embedding) x /= std::sqrt(norm);
        p.cluster = static_cast<int>(i % 5) - 1;
        out.push_back(std::move(p));
    }
    return out;
}

template <bool Parallel>
void BM_ScoreMatrix(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    ExactMatchJudge judge;
    for (auto _ : state) {
        auto m = Parallel ? build_score_matrix(w.dims, w.target, w.related, judge)
                          : reference::build_score_matrix(w.dims, w.target, w.related, judge);
        benchmark::DoNotOptimize(m.cells.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(w.dims.size()));
}

template <bool Parallel>
void BM_Temporal(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    ExactMatchJudge judge;
    for (auto _ : state) {
        auto s = Parallel ? run_temporal(w.steps, w.dims, w.related, judge)
                          : reference::run_temporal(w.steps, w.dims, w.related, judge);
        benchmark::DoNotOptimize(s.average.data());
    }
}

template <bool Parallel>
void BM_CosineDistances(benchmark::State& state) {
    auto papers = advancing(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto d = Parallel ? cosine_distances(papers) : reference::cosine_distances(papers);
        benchmark::DoNotOptimize(d.data());
    }
}

template <bool Parallel>
void BM_RelationshipGraph(benchmark::State& state) {
    auto papers = advancing(static_cast<std::size_t>(state.range(0)));
    RelateFn relate = [](const AdvancingPaper& a, const AdvancingPaper& b) -> std::optional<bool> {
        return lexical_overlap(a.value, b.value).score > 0.0;
    };
    for (auto _ : state) {
        auto g = Parallel ? build_relationship_graph("d", papers, relate)
                          : reference::build_relationship_graph("d", papers, relate);
        benchmark::DoNotOptimize(g.edges.data());
    }
}

}  // namespace

BENCHMARK(BM_ScoreMatrix<true>)->Arg(100)->Arg(1000);
BENCHMARK(BM_ScoreMatrix<false>)->Arg(100)->Arg(1000);
BENCHMARK(BM_Temporal<true>)->Arg(100)->Arg(1000);
BENCHMARK(BM_Temporal<false>)->Arg(100)->Arg(1000);
BENCHMARK(BM_CosineDistances<true>)->Arg(200)->Arg(800);
BENCHMARK(BM_CosineDistances<false>)->Arg(200)->Arg(800);
BENCHMARK(BM_RelationshipGraph<true>)->Arg(100)->Arg(300);
BENCHMARK(BM_RelationshipGraph<false>)->Arg(100)->Arg(300);

BENCHMARK_MAIN();
