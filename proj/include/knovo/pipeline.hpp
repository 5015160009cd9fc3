#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "knovo/corpus.hpp"
#include "knovo/dimensions.hpp"
#include "knovo/evolution.hpp"
#include "knovo/exporters.hpp"
#include "knovo/judge.hpp"
#include "knovo/scoring.hpp"
#include "knovo/temporal.hpp"

namespace knovo {

class Gateway;

struct DimensionOptions {
    std::size_t cap = kDefaultDimensionCap;
    std::optional<DimensionOverrides> overrides;
};

// Target dimensions (with overrides), related values, value types and directions for a network
// that already went through filter_comparable.
DimensionStore build_dimension_store(Gateway& gateway, const CitationNetwork& comparable,
                                     const DimensionOptions& options = {});

struct OverallResult {
    ScoreMatrix matrix;
    NoveltyReport novelty;
};

OverallResult score_overall(const DimensionStore& store, const CitationNetwork& comparable, const Judge& judge,
                            double alpha = kDefaultAlpha);

struct TemporalResult {
    TemporalSeries series;
    std::vector<std::string> excluded_no_year;
};

TemporalResult score_temporal(const DimensionStore& store, const CitationNetwork& comparable, const Judge& judge);

struct EvolveOptions {
    ClusterParams cluster;
    double gamma = 1.0;
    double delta = 1.0;
};

RelationshipGraph evolve_dimension(Gateway& gateway, const TemporalSeries& series, std::string_view dimension,
                                   const EvolveOptions& options = {});

struct AnalysisOptions {
    double alpha = kDefaultAlpha;
    DimensionOptions dims;
    EvolveOptions evolve;
    std::vector<std::string> evolve_dimensions;  // empty: every dimension
    std::vector<std::string> radar_selection;    // empty: every scored paper
};

struct Analysis {
    ComparableNetwork comparable;
    DimensionStore store;
    OverallResult overall;
    TemporalResult temporal;
    std::vector<RelationshipGraph> graphs;
    RadarSheet radar;
    Report report;
};

// Runs every stage. A preset store skips extraction.
Analysis analyze(Gateway& gateway, const CitationNetwork& network, const AnalysisOptions& options = {},
                 const DimensionStore* preset = nullptr);

Report make_report(const CitationNetwork& network, const ComparableNetwork& comparable, const DimensionStore& store,
                   const NoveltyReport& novelty, const std::vector<std::string>& excluded_no_year);

// dims.json, matrix.json, report.json, report.md, radar.json, series.json and one
// evolution-<slug>.json / .dot pair per evolved dimension.
void write_bundle(const Analysis& analysis, const std::filesystem::path& dir, bool justifications = false);

std::string evolution_stem(std::string_view dimension);

}  // namespace knovo
