#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "knovo/corpus.hpp"
#include "knovo/temporal.hpp"

namespace knovo {

class Gateway;

inline constexpr int kNoise = -1;

struct AdvancingPaper {
    std::string paper_id;
    int year = 0;
    Date date;
    std::string value;
    std::vector<double> embedding;
    int cluster = kNoise;

    bool operator==(const AdvancingPaper&) const = default;
};

// Papers whose temporal cell on `dimension` is plus_one, in sequence order. The value is the
// text that advanced the frontier at that step.
std::vector<AdvancingPaper> advancing_set(const TemporalSeries& series, std::string_view dimension);

// Fills every embedding through the gateway. Throws when an embedding cannot be produced.
void embed_values(Gateway& gateway, std::vector<AdvancingPaper>& papers);

struct ClusterParams {
    double eps = 0.35;
    std::size_t min_points = 2;
};

// Symmetric matrix of 1 - cos(a, b), row-major.
std::vector<double> cosine_distances(const std::vector<AdvancingPaper>& papers);

namespace reference {
std::vector<double> cosine_distances(const std::vector<AdvancingPaper>& papers);
}

// DBSCAN over cosine distance. Labels are 0, 1, ... in order of first core point; fewer than two
// papers leaves everything as noise.
void cluster_values(std::vector<AdvancingPaper>& papers, const ClusterParams& params = {});

enum class OverlapBand { low, high };

struct LexicalOverlap {
    double score = 0.0;
    OverlapBand band = OverlapBand::low;
};

inline constexpr double kHighOverlap = 0.5;

LexicalOverlap lexical_overlap(std::string_view a, std::string_view b);

// Relatedness judgement for a chronological pair; nullopt when the backend failed.
using RelateFn = std::function<std::optional<bool>(const AdvancingPaper& earlier, const AdvancingPaper& later)>;

RelateFn gateway_relate(Gateway& gateway, std::string dimension);

// 5/4 for a shared cluster by overlap band, then 3/2/1 by noise count when relate holds, else 0.
int confidence(const AdvancingPaper& earlier, const AdvancingPaper& later, const RelateFn& relate);

struct RelationshipEdge {
    std::string from;
    std::string to;
    int confidence = 0;
    double sigma = 0.0;
    bool in_forest = false;

    bool operator==(const RelationshipEdge&) const = default;
};

struct RelationshipGraph {
    std::string dimension;
    std::vector<AdvancingPaper> nodes;  // chronological
    std::vector<RelationshipEdge> edges;
    double gamma = 1.0;
    double delta = 1.0;

    const AdvancingPaper* node(std::string_view paper_id) const;
    bool operator==(const RelationshipGraph&) const = default;
};

// Nodes are sorted by (date, paper_id); every earlier->later pair with year(from) <= year(to) and
// positive confidence becomes an edge. Pair confidences are evaluated in parallel.
RelationshipGraph build_relationship_graph(std::string dimension, std::vector<AdvancingPaper> papers,
                                           const RelateFn& relate);

namespace reference {
RelationshipGraph build_relationship_graph(std::string dimension, std::vector<AdvancingPaper> papers,
                                           const RelateFn& relate);
}

double edge_sigma(int confidence, int year_gap, double gamma, double delta);

// Sets sigma on every edge and marks the maximum spanning forest (Kruskal, ties by (from, to)).
RelationshipGraph build_forest(RelationshipGraph graph, double gamma = 1.0, double delta = 1.0);

struct ForestRoot {
    std::string paper_id;
    int year = 0;
    std::string value;

    bool operator==(const ForestRoot&) const = default;
};

// Nodes without an incoming forest edge, by year.
std::vector<ForestRoot> forest_roots(const RelationshipGraph& graph);

}  // namespace knovo
