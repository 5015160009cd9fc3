#include "knovo/exporters.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace knovo {

namespace {

ojson score_json(Score s) {
    auto v = to_int(s);
    return v ? ojson(*v) : ojson();
}

Score score_from(const ojson& j) {
    if (j.is_null()) return Score::not_applicable;
    return score_from_int(j.get<int>());
}

template <typename T>
T required(const ojson& j, const char* key) {
    if (!j.contains(key)) throw ExportError(std::string("missing field '") + key + "'");
    return j.at(key).get<T>();
}

Date date_from(const ojson& j) {
    auto d = Date::parse(j.get<std::string>());
    if (!d) throw ExportError("bad date '" + j.get<std::string>() + "'");
    return *d;
}

}  // namespace

std::string render(const ojson& j) { return j.dump(2) + "\n"; }

ojson read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ExportError("cannot open " + path.string());
    try {
        return ojson::parse(in);
    } catch (const ojson::parse_error& e) {
        throw ExportError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExportError("cannot write " + path.string());
    out << content;
}

ojson matrix_to_json(const ScoreMatrix& m) {
    ojson cells = ojson::array();
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        ojson row = ojson::array();
        for (std::size_t c = 0; c < m.column_count(); ++c) {
            const auto& cell = m.at(r, c);
            row.push_back({{"score", score_json(cell.score)}, {"justification", cell.justification}});
        }
        cells.push_back(std::move(row));
    }
    return {{"mode", to_string(m.mode)}, {"rows", m.rows}, {"columns", m.columns}, {"cells", std::move(cells)}};
}

ScoreMatrix matrix_from_json(const ojson& j) {
    const auto mode = required<std::string>(j, "mode");
    if (mode != "overall" && mode != "temporal") throw ExportError("unknown matrix mode '" + mode + "'");
    ScoreMatrix m(mode == "overall" ? MatrixMode::overall : MatrixMode::temporal,
                  required<std::vector<std::string>>(j, "rows"), required<std::vector<std::string>>(j, "columns"));
    const auto& cells = j.at("cells");
    if (cells.size() != m.row_count()) throw ExportError("matrix cell rows do not match row ids");
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        if (cells[r].size() != m.column_count()) throw ExportError("matrix row " + m.rows[r] + " has wrong width");
        for (std::size_t c = 0; c < m.column_count(); ++c) {
            m.at(r, c) = {score_from(cells[r][c].at("score")), cells[r][c].at("justification").get<std::string>()};
        }
    }
    return m;
}

RadarSheet make_radar(const ScoreMatrix& m, std::span<const std::string> selection) {
    if (selection.empty()) throw ExportError("radar selection is empty");
    RadarSheet sheet{m.columns, {}};
    for (const auto& id : selection) {
        auto r = m.row_index(id);
        if (!r) throw ExportError("radar selection names unknown paper " + id);
        RadarPolygon poly{id, {}};
        for (std::size_t c = 0; c < m.column_count(); ++c) {
            if (auto v = to_int(m.at(*r, c).score)) poly.vertices.emplace_back(m.columns[c], *v);
        }
        if (poly.vertices.empty()) spdlog::warn("radar: paper {} has no applicable dimension", id);
        sheet.polygons.push_back(std::move(poly));
    }
    return sheet;
}

ojson radar_to_json(const RadarSheet& sheet) {
    ojson polys = ojson::array();
    for (const auto& p : sheet.polygons) {
        ojson scores = ojson::object();
        for (const auto& [key, v] : p.vertices) scores[key] = v;
        polys.push_back({{"paper_id", p.paper_id}, {"scores", std::move(scores)}});
    }
    return {{"dimensions", sheet.dimensions}, {"papers", std::move(polys)}};
}

RadarSheet radar_from_json(const ojson& j) {
    RadarSheet sheet;
    sheet.dimensions = required<std::vector<std::string>>(j, "dimensions");
    for (const auto& p : j.at("papers")) {
        RadarPolygon poly{p.at("paper_id").get<std::string>(), {}};
        const auto& scores = p.at("scores");
        for (const auto& key : sheet.dimensions) {
            if (!scores.contains(key)) continue;
            const int v = scores.at(key).get<int>();
            if (v < -1 || v > 1) throw ExportError("radar score out of range for " + poly.paper_id);
            poly.vertices.emplace_back(key, v);
        }
        if (poly.vertices.size() != scores.size()) throw ExportError("radar paper " + poly.paper_id + " names unknown dimensions");
        sheet.polygons.push_back(std::move(poly));
    }
    return sheet;
}

namespace {

ojson best_to_json(const BestState& b) {
    return {{"initialized", b.initialized},
            {"magnitude", b.magnitude ? ojson(*b.magnitude) : ojson()},
            {"source", b.source},
            {"history", b.history}};
}

BestState best_from_json(const ojson& j) {
    BestState b;
    b.initialized = j.at("initialized").get<bool>();
    if (!j.at("magnitude").is_null()) b.magnitude = j.at("magnitude").get<double>();
    b.source = j.at("source").get<std::string>();
    b.history = j.at("history").get<std::vector<std::string>>();
    return b;
}

}  // namespace

ojson series_to_json(const TemporalSeries& s) {
    ojson steps = ojson::array();
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        ojson cumulative = ojson::object();
        for (std::size_t d = 0; d < s.dimensions.size(); ++d) cumulative[s.dimensions[d]] = s.cumulative[d][i];
        steps.push_back({{"index", i + 1},
                         {"paper_id", s.steps[i].paper_id},
                         {"date", s.steps[i].date.iso()},
                         {"is_target", s.steps[i].is_target},
                         {"average", s.average[i]},
                         {"log_score", std::log1p(s.average[i])},
                         {"marginal", s.marginal[i]},
                         {"cumulative", std::move(cumulative)}});
    }
    ojson best = ojson::array();
    for (std::size_t d = 0; d < s.dimensions.size(); ++d) {
        ojson states = ojson::array();
        for (const auto& b : s.best[d]) states.push_back(best_to_json(b));
        best.push_back({{"dimension", s.dimensions[d]}, {"states", std::move(states)}});
    }
    auto target = s.target_position();
    return {{"dimensions", s.dimensions},
            {"target_position", target ? ojson(*target + 1) : ojson()},
            {"steps", std::move(steps)},
            {"best", std::move(best)},
            {"matrix", matrix_to_json(s.matrix)}};
}

TemporalSeries series_from_json(const ojson& j) {
    TemporalSeries s;
    s.dimensions = required<std::vector<std::string>>(j, "dimensions");
    s.cumulative.assign(s.dimensions.size(), {});
    for (const auto& st : j.at("steps")) {
        s.steps.push_back({st.at("paper_id").get<std::string>(), date_from(st.at("date")), st.at("is_target").get<bool>()});
        s.average.push_back(st.at("average").get<double>());
        s.marginal.push_back(st.at("marginal").get<double>());
        const auto& cum = st.at("cumulative");
        for (std::size_t d = 0; d < s.dimensions.size(); ++d) s.cumulative[d].push_back(cum.at(s.dimensions[d]).get<int>());
    }
    const auto& best = j.at("best");
    if (best.size() != s.dimensions.size()) throw ExportError("series best-state block does not match dimensions");
    for (std::size_t d = 0; d < best.size(); ++d) {
        if (best[d].at("dimension").get<std::string>() != s.dimensions[d]) throw ExportError("series best-state order mismatch");
        std::vector<BestState> states;
        for (const auto& b : best[d].at("states")) states.push_back(best_from_json(b));
        if (states.size() != s.steps.size()) throw ExportError("series best-state length mismatch");
        s.best.push_back(std::move(states));
    }
    s.matrix = matrix_from_json(j.at("matrix"));
    if (s.matrix.mode != MatrixMode::temporal) throw ExportError("series matrix must be temporal");
    return s;
}

ojson graph_to_json(const RelationshipGraph& g) {
    ojson nodes = ojson::array();
    for (const auto& n : g.nodes) {
        nodes.push_back({{"paper_id", n.paper_id},
                         {"year", n.year},
                         {"date", n.date.iso()},
                         {"value", n.value},
                         {"cluster", n.cluster == kNoise ? ojson() : ojson(n.cluster)},
                         {"embedding", n.embedding}});
    }
    ojson edges = ojson::array();
    for (const auto& e : g.edges) {
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"confidence", e.confidence},
                         {"sigma", e.sigma},
                         {"in_forest", e.in_forest}});
    }
    ojson roots = ojson::array();
    for (const auto& r : forest_roots(g)) roots.push_back({{"paper_id", r.paper_id}, {"year", r.year}, {"value", r.value}});
    return {{"dimension", g.dimension},
            {"gamma", g.gamma},
            {"delta", g.delta},
            {"nodes", std::move(nodes)},
            {"edges", std::move(edges)},
            {"roots", std::move(roots)}};
}

RelationshipGraph graph_from_json(const ojson& j) {
    RelationshipGraph g;
    g.dimension = required<std::string>(j, "dimension");
    g.gamma = required<double>(j, "gamma");
    g.delta = required<double>(j, "delta");
    for (const auto& n : j.at("nodes")) {
        AdvancingPaper p;
        p.paper_id = n.at("paper_id").get<std::string>();
        p.year = n.at("year").get<int>();
        p.date = date_from(n.at("date"));
        p.value = n.at("value").get<std::string>();
        p.cluster = n.at("cluster").is_null() ? kNoise : n.at("cluster").get<int>();
        p.embedding = n.at("embedding").get<std::vector<double>>();
        g.nodes.push_back(std::move(p));
    }
    for (const auto& e : j.at("edges")) {
        RelationshipEdge edge{e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                              e.at("confidence").get<int>(), e.at("sigma").get<double>(), e.at("in_forest").get<bool>()};
        if (!g.node(edge.from) || !g.node(edge.to)) throw ExportError("edge " + edge.from + " -> " + edge.to + " names unknown node");
        g.edges.push_back(std::move(edge));
    }
    return g;
}

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string graph_to_dot(const RelationshipGraph& g) {
    std::ostringstream out;
    out << "digraph evolution {\n";
    out << "  label=" << dot_quote(g.dimension) << ";\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box];\n";
    for (const auto& n : g.nodes) {
        out << "  " << dot_quote(n.paper_id) << " [label=" << dot_quote(fmt::format("{} ({})\n{}", n.paper_id, n.year, n.value))
            << ", year=" << n.year << ", cluster=" << dot_quote(n.cluster == kNoise ? "noise" : std::to_string(n.cluster))
            << "];\n";
    }
    for (const auto& e : g.edges) {
        out << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to) << " [label=" << dot_quote(fmt::format("{} / {}", e.confidence, e.sigma))
            << ", confidence=" << e.confidence << ", sigma=" << dot_quote(fmt::format("{}", e.sigma))
            << ", in_forest=" << (e.in_forest ? "true" : "false") << ", style=" << (e.in_forest ? "bold" : "dashed") << "];\n";
    }
    out << "}\n";
    return out.str();
}

std::vector<std::string> top_dimensions(const NoveltyReport& novelty, std::size_t count) {
    std::vector<std::size_t> order(novelty.dimensions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return novelty.dimensions[a].weight > novelty.dimensions[b].weight;
    });
    std::vector<std::string> keys;
    for (std::size_t i = 0; i < order.size() && i < count; ++i) keys.push_back(novelty.dimensions[order[i]].key);
    return keys;
}

ojson report_to_json(const Report& r) {
    ojson dims = ojson::array();
    for (std::size_t i = 0; i < r.novelty.dimensions.size(); ++i) {
        const auto& s = r.novelty.dimensions[i];
        const Dimension* d = r.dims.find(s.key);
        if (!d) throw ExportError("report scores unknown dimension " + s.key);
        dims.push_back({{"key", s.key},
                        {"value_type", to_string(d->value_type)},
                        {"direction", to_string(d->direction)},
                        {"origin", to_string(d->origin)},
                        {"count", s.count},
                        {"p_plus", s.p_plus},
                        {"p_zero", s.p_zero},
                        {"p_minus", s.p_minus},
                        {"raw_weight", s.raw_weight},
                        {"weight", s.weight},
                        {"score", s.score}});
    }
    return {{"target", {{"paper_id", r.target_id}, {"title", r.target_title}, {"year", r.target_year ? ojson(*r.target_year) : ojson()}}},
            {"network_size", r.network_size},
            {"excluded", {{"no_abstract", r.excluded_no_abstract}, {"no_year", r.excluded_no_year}}},
            {"dims", r.dims.size()},
            {"alpha", r.novelty.alpha},
            {"omega", r.novelty.omega},
            {"omega_refs", r.novelty.omega_refs_only ? ojson(*r.novelty.omega_refs_only) : ojson("N/A")},
            {"top_dimensions", top_dimensions(r.novelty)},
            {"dimensions", std::move(dims)}};
}

Report report_from_json(const ojson& j) {
    Report r;
    const auto& t = j.at("target");
    r.target_id = t.at("paper_id").get<std::string>();
    r.target_title = t.at("title").get<std::string>();
    if (!t.at("year").is_null()) r.target_year = t.at("year").get<int>();
    r.network_size = required<std::size_t>(j, "network_size");
    r.excluded_no_abstract = j.at("excluded").at("no_abstract").get<std::vector<std::string>>();
    r.excluded_no_year = j.at("excluded").at("no_year").get<std::vector<std::string>>();
    r.novelty.alpha = required<double>(j, "alpha");
    r.novelty.omega = required<double>(j, "omega");
    const auto& refs = j.at("omega_refs");
    if (refs.is_number()) {
        r.novelty.omega_refs_only = refs.get<double>();
    } else if (refs != "N/A") {
        throw ExportError("omega_refs must be a number or \"N/A\"");
    }
    for (const auto& d : j.at("dimensions")) {
        Dimension dim;
        dim.key = d.at("key").get<std::string>();
        auto vt = value_type_from_string(d.at("value_type").get<std::string>());
        auto dir = direction_from_string(d.at("direction").get<std::string>());
        auto origin = origin_from_string(d.at("origin").get<std::string>());
        if (!vt || !dir || !origin) throw ExportError("bad dimension metadata for " + dim.key);
        dim.value_type = *vt;
        dim.direction = *dir;
        dim.origin = *origin;
        r.dims.add(dim);
        DimensionScore s;
        s.key = dim.key;
        s.count = d.at("count").get<std::size_t>();
        s.p_plus = d.at("p_plus").get<double>();
        s.p_zero = d.at("p_zero").get<double>();
        s.p_minus = d.at("p_minus").get<double>();
        s.raw_weight = d.at("raw_weight").get<double>();
        s.weight = d.at("weight").get<double>();
        s.score = d.at("score").get<double>();
        r.novelty.dimensions.push_back(std::move(s));
    }
    if (j.at("dims").get<std::size_t>() != r.dims.size()) throw ExportError("dimension count does not match listing");
    return r;
}

std::string report_markdown(const Report& r, const ScoreMatrix* justifications) {
    std::ostringstream out;
    out << "# Novelty report: " << (r.target_title.empty() ? r.target_id : r.target_title) << "\n\n";
    out << "- Target: `" << r.target_id << "`";
    if (r.target_year) out << " (" << *r.target_year << ")";
    out << "\n";
    out << "- Network size: " << r.network_size << " related papers\n";
    out << "- Excluded without abstract: " << r.excluded_no_abstract.size() << "\n";
    out << "- Excluded from the timeline without year: " << r.excluded_no_year.size() << "\n";
    out << "- Dimensions: " << r.dims.size() << "\n";
    out << fmt::format("- Overall novelty: {:.4f} (alpha {})\n", r.novelty.omega, r.novelty.alpha);
    out << "- Reference-only novelty: "
        << (r.novelty.omega_refs_only ? fmt::format("{:.4f}", *r.novelty.omega_refs_only) : std::string("N/A")) << "\n\n";

    out << "| Dimension | Type | N | P(+1) | P(0) | P(-1) | Weight | Score |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& s : r.novelty.dimensions) {
        const Dimension* d = r.dims.find(s.key);
        out << fmt::format("| {} | {} | {} | {:.3f} | {:.3f} | {:.3f} | {:.3f} | {:.3f} |\n", s.key,
                           d ? to_string(d->value_type) : "?", s.count, s.p_plus, s.p_zero, s.p_minus, s.weight, s.score);
    }
    auto top = top_dimensions(r.novelty);
    if (!top.empty()) {
        out << "\nTop-weighted dimensions: ";
        for (std::size_t i = 0; i < top.size(); ++i) out << (i ? ", " : "") << top[i];
        out << "\n";
    }

    if (justifications) {
        out << "\n## Justifications\n";
        for (std::size_t c = 0; c < justifications->column_count(); ++c) {
            out << "\n### " << justifications->columns[c] << "\n\n";
            for (std::size_t row = 0; row < justifications->row_count(); ++row) {
                const auto& cell = justifications->at(row, c);
                auto v = to_int(cell.score);
                if (!v) continue;
                out << fmt::format("- `{}` ({:+d}): {}\n", justifications->rows[row], *v, cell.justification);
            }
        }
    }
    return out.str();
}

}  // namespace knovo
