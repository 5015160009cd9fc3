#include "knovo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "knovo/gateway.hpp"
#include "knovo/parallel.hpp"
#include "knovo/text.hpp"

namespace knovo {

std::vector<AdvancingPaper> advancing_set(const TemporalSeries& series, std::string_view dimension) {
    auto col = series.matrix.column_index(dimension);
    if (!col) throw std::invalid_argument("unknown dimension '" + std::string(dimension) + "'");
    std::vector<AdvancingPaper> out;
    for (std::size_t i = 0; i < series.steps.size(); ++i) {
        if (series.matrix.at(i, *col).score != Score::plus_one) continue;
        const BestState& b = series.best[*col][i];
        AdvancingPaper p;
        p.paper_id = series.steps[i].paper_id;
        p.date = series.steps[i].date;
        p.year = p.date.year;
        p.value = b.history.empty() ? b.source : b.history.back();
        out.push_back(std::move(p));
    }
    return out;
}

void embed_values(Gateway& gateway, std::vector<AdvancingPaper>& papers) {
    parallel_for(papers.size(), [&](std::size_t i) { papers[i].embedding = gateway.embed(papers[i].value); });
}

namespace {

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("embedding dimensionality mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    return std::clamp(1.0 - dot / std::sqrt(na * nb), 0.0, 2.0);
}

}  // namespace

std::vector<double> cosine_distances(const std::vector<AdvancingPaper>& papers) {
    const std::size_t n = papers.size();
    std::vector<double> d(n * n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d[i * n + j] = d[j * n + i] = cosine_distance(papers[i].embedding, papers[j].embedding);
        }
    });
    return d;
}

namespace reference {
std::vector<double> cosine_distances(const std::vector<AdvancingPaper>& papers) {
    const std::size_t n = papers.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d[i * n + j] = d[j * n + i] = cosine_distance(papers[i].embedding, papers[j].embedding);
        }
    }
    return d;
}
}  // namespace reference

void cluster_values(std::vector<AdvancingPaper>& papers, const ClusterParams& params) {
    if (!(params.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (params.min_points < 2) throw std::invalid_argument("min_points must be at least 2");
    for (auto& p : papers) p.cluster = kNoise;
    const std::size_t n = papers.size();
    if (n < 2) return;

    const auto dist = cosine_distances(papers);
    auto neighbours = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j) {
            if (dist[i * n + j] <= params.eps) out.push_back(j);
        }
        return out;
    };

    std::vector<bool> visited(n, false);
    int next_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (visited[i]) continue;
        visited[i] = true;
        auto seeds = neighbours(i);
        if (seeds.size() < params.min_points) continue;
        const int label = next_label++;
        papers[i].cluster = label;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const std::size_t j = seeds[k];
            if (papers[j].cluster == kNoise) papers[j].cluster = label;
            if (visited[j]) continue;
            visited[j] = true;
            auto more = neighbours(j);
            if (more.size() >= params.min_points) {
                for (std::size_t m : more) {
                    if (std::find(seeds.begin(), seeds.end(), m) == seeds.end()) seeds.push_back(m);
                }
            }
        }
    }
}

LexicalOverlap lexical_overlap(std::string_view a, std::string_view b) {
    auto ta = text::content_tokens(a);
    auto tb = text::content_tokens(b);
    std::set<std::string> sa(ta.begin(), ta.end());
    std::set<std::string> sb(tb.begin(), tb.end());
    std::vector<std::string> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    const std::size_t uni = sa.size() + sb.size() - common.size();
    double score = 0.0;
    if (uni == 0) {
        score = text::normalize_key(a) == text::normalize_key(b) ? 1.0 : 0.0;
    } else {
        score = static_cast<double>(common.size()) / static_cast<double>(uni);
    }
    return {score, score >= kHighOverlap ? OverlapBand::high : OverlapBand::low};
}

RelateFn gateway_relate(Gateway& gateway, std::string dimension) {
    return [&gateway, dimension = std::move(dimension)](const AdvancingPaper& earlier,
                                                        const AdvancingPaper& later) -> std::optional<bool> {
        InferenceTask task{TaskKind::relate,
                           "relate.v1",
                           nlohmann::json{{"dimension", dimension},
                                          {"earlier", {{"value", earlier.value}, {"year", earlier.year}}},
                                          {"later", {{"value", later.value}, {"year", later.year}}}},
                           "relate.v1"};
        try {
            auto r = gateway.invoke(task);
            if (!r) return std::nullopt;
            return r->structured_output["related"].get<bool>();
        } catch (const BackendUnavailable& e) {
            spdlog::warn("relate {} -> {}: {}", earlier.paper_id, later.paper_id, e.what());
            return std::nullopt;
        }
    };
}

int confidence(const AdvancingPaper& earlier, const AdvancingPaper& later, const RelateFn& relate) {
    if (earlier.cluster != kNoise && earlier.cluster == later.cluster) {
        return lexical_overlap(earlier.value, later.value).band == OverlapBand::high ? 5 : 4;
    }
    auto related = relate(earlier, later);
    if (!related) {
        spdlog::warn("relatedness of {} -> {} unavailable; treated as unrelated", earlier.paper_id, later.paper_id);
        return 0;
    }
    if (!*related) return 0;
    const int noise = (earlier.cluster == kNoise ? 1 : 0) + (later.cluster == kNoise ? 1 : 0);
    return 3 - noise;
}

const AdvancingPaper* RelationshipGraph::node(std::string_view paper_id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const auto& n) { return n.paper_id == paper_id; });
    return it == nodes.end() ? nullptr : &*it;
}

namespace {

void sort_chronologically(std::vector<AdvancingPaper>& papers) {
    std::stable_sort(papers.begin(), papers.end(), [](const auto& a, const auto& b) {
        return std::tie(a.date, a.paper_id) < std::tie(b.date, b.paper_id);
    });
}

std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const std::vector<AdvancingPaper>& nodes) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (nodes[i].year <= nodes[j].year) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

RelationshipGraph collect_edges(std::string dimension, std::vector<AdvancingPaper> nodes,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                const std::vector<int>& weights) {
    RelationshipGraph g;
    g.dimension = std::move(dimension);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (weights[k] <= 0) continue;
        g.edges.push_back({nodes[pairs[k].first].paper_id, nodes[pairs[k].second].paper_id, weights[k], 0.0, false});
    }
    g.nodes = std::move(nodes);
    return g;
}

class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<int> rank_;
};

}  // namespace

RelationshipGraph build_relationship_graph(std::string dimension, std::vector<AdvancingPaper> papers,
                                           const RelateFn& relate) {
    sort_chronologically(papers);
    auto pairs = candidate_pairs(papers);
    std::vector<int> weights(pairs.size(), 0);
    parallel_for(pairs.size(), [&](std::size_t k) {
        weights[k] = confidence(papers[pairs[k].first], papers[pairs[k].second], relate);
    });
    return collect_edges(std::move(dimension), std::move(papers), pairs, weights);
}

namespace reference {
RelationshipGraph build_relationship_graph(std::string dimension, std::vector<AdvancingPaper> papers,
                                           const RelateFn& relate) {
    sort_chronologically(papers);
    auto pairs = candidate_pairs(papers);
    std::vector<int> weights;
    for (const auto& [i, j] : pairs) weights.push_back(confidence(papers[i], papers[j], relate));
    return collect_edges(std::move(dimension), std::move(papers), pairs, weights);
}
}  // namespace reference

double edge_sigma(int confidence, int year_gap, double gamma, double delta) {
    return std::pow(static_cast<double>(confidence), gamma) / std::pow(static_cast<double>(year_gap) + 1.0, delta);
}

RelationshipGraph build_forest(RelationshipGraph graph, double gamma, double delta) {
    if (!(gamma >= 0.0) || !(delta >= 0.0)) throw std::invalid_argument("gamma and delta must be non-negative");
    graph.gamma = gamma;
    graph.delta = delta;
    auto index_of = [&](const std::string& id) {
        for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
            if (graph.nodes[i].paper_id == id) return i;
        }
        throw std::invalid_argument("edge references unknown node " + id);
    };

    std::vector<std::pair<std::size_t, std::size_t>> ends;
    for (auto& e : graph.edges) {
        const std::size_t a = index_of(e.from);
        const std::size_t b = index_of(e.to);
        const int gap = graph.nodes[b].year - graph.nodes[a].year;
        if (gap < 0) throw std::invalid_argument("edge " + e.from + " -> " + e.to + " runs backwards in time");
        e.sigma = edge_sigma(e.confidence, gap, gamma, delta);
        e.in_forest = false;
        ends.emplace_back(a, b);
    }

    std::vector<std::size_t> order(graph.edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto& ex = graph.edges[x];
        const auto& ey = graph.edges[y];
        if (ex.sigma != ey.sigma) return ex.sigma > ey.sigma;
        return std::tie(ex.from, ex.to) < std::tie(ey.from, ey.to);
    });

    DisjointSets sets(graph.nodes.size());
    for (std::size_t k : order) {
        if (sets.unite(ends[k].first, ends[k].second)) graph.edges[k].in_forest = true;
    }
    return graph;
}

std::vector<ForestRoot> forest_roots(const RelationshipGraph& graph) {
    std::set<std::string> has_parent;
    for (const auto& e : graph.edges) {
        if (e.in_forest) has_parent.insert(e.to);
    }
    std::vector<ForestRoot> roots;
    for (const auto& n : graph.nodes) {
        if (!has_parent.contains(n.paper_id)) roots.push_back({n.paper_id, n.year, n.value});
    }
    std::stable_sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) { return a.year < b.year; });
    return roots;
}

}  // namespace knovo
