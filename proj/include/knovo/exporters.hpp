#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "knovo/dimensions.hpp"
#include "knovo/evolution.hpp"
#include "knovo/score_matrix.hpp"
#include "knovo/scoring.hpp"
#include "knovo/temporal.hpp"

namespace knovo {

using ojson = nlohmann::ordered_json;

class ExportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Two-space indented JSON with a trailing newline; the on-disk form of every product.
std::string render(const ojson& j);
ojson read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

ojson matrix_to_json(const ScoreMatrix& m);
ScoreMatrix matrix_from_json(const ojson& j);

struct RadarPolygon {
    std::string paper_id;
    std::vector<std::pair<std::string, int>> vertices;  // dimension order, nulls omitted

    bool operator==(const RadarPolygon&) const = default;
};

struct RadarSheet {
    std::vector<std::string> dimensions;
    std::vector<RadarPolygon> polygons;

    bool operator==(const RadarSheet&) const = default;
};

// Throws ExportError for an empty selection or an id that is not a matrix row.
RadarSheet make_radar(const ScoreMatrix& m, std::span<const std::string> selection);
ojson radar_to_json(const RadarSheet& sheet);
RadarSheet radar_from_json(const ojson& j);

ojson series_to_json(const TemporalSeries& series);
TemporalSeries series_from_json(const ojson& j);

ojson graph_to_json(const RelationshipGraph& graph);
RelationshipGraph graph_from_json(const ojson& j);
std::string graph_to_dot(const RelationshipGraph& graph);

struct Report {
    std::string target_id;
    std::string target_title;
    std::optional<int> target_year;
    std::size_t network_size = 0;
    std::vector<std::string> excluded_no_abstract;
    std::vector<std::string> excluded_no_year;
    DimensionSet dims;
    NoveltyReport novelty;

    bool operator==(const Report&) const = default;
};

// Keys of the highest-weighted dimensions, ties kept in dimension order.
std::vector<std::string> top_dimensions(const NoveltyReport& novelty, std::size_t count = 5);

ojson report_to_json(const Report& report);
Report report_from_json(const ojson& j);

// Human-readable summary. With a matrix, every non-null cell's justification is listed.
std::string report_markdown(const Report& report, const ScoreMatrix* justifications = nullptr);

}  // namespace knovo
