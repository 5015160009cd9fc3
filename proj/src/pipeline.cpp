#include "knovo/pipeline.hpp"

#include <algorithm>
#include <set>


#include "knovo/gateway.hpp"
#include "knovo/text.hpp"

namespace knovo {

DimensionStore build_dimension_store(Gateway& gateway, const CitationNetwork& comparable,
                                     const DimensionOptions& options) {
    auto extraction = extract_target_dimensions(gateway, comparable.target, options.cap);
    DimensionStore store;
    store.target_id = comparable.target.paper_id;
    store.dims = std::move(extraction.dims);
    store.target = std::move(extraction.values);

    std::set<std::string> typed_by_override;
    if (options.overrides) {
        DimensionSet edited = apply_overrides(store.dims, *options.overrides);
        store.target = apply_overrides(store.target, *options.overrides, edited);
        store.dims = std::move(edited);
        for (const auto& a : options.overrides->add) {
            if (a.value_type) typed_by_override.insert(text::normalize_key(a.key));
        }
    }

    store.related = extract_all_related_values(gateway, store.dims, comparable.related);

    for (auto& dim : store.dims) {
        if (!typed_by_override.contains(dim.key)) {
            std::vector<std::string> samples{store.target.value(dim.key)};
            for (const auto& r : store.related) samples.push_back(r.value(dim.key));
            dim.value_type = classify_value_type(dim, samples, &gateway).type;
        }
        if (dim.value_type == ValueType::numeric) dim.direction = decide_direction(dim, store.target.value(dim.key), &gateway);
    }
    return store;
}

OverallResult score_overall(const DimensionStore& store, const CitationNetwork& comparable, const Judge& judge,
                            double alpha) {
    OverallResult out;
    out.matrix = build_score_matrix(store.dims, store.target, store.related, judge);
    out.novelty = overall_novelty(out.matrix, alpha);
    out.novelty.omega_refs_only = refs_only_novelty(out.matrix, comparable, alpha);
    return out;
}

TemporalResult score_temporal(const DimensionStore& store, const CitationNetwork& comparable, const Judge& judge) {
    auto sequence = order_sequence(comparable);
    auto steps = sequence_steps(sequence, comparable.target.paper_id);
    std::vector<ValueAssignment> assignments{store.target};
    assignments.insert(assignments.end(), store.related.begin(), store.related.end());
    return {run_temporal(steps, store.dims, assignments, judge), sequence.excluded_ids};
}

RelationshipGraph evolve_dimension(Gateway& gateway, const TemporalSeries& series, std::string_view dimension,
                                   const EvolveOptions& options) {
    auto papers = advancing_set(series, dimension);
    embed_values(gateway, papers);
    cluster_values(papers, options.cluster);
    auto graph = build_relationship_graph(std::string(dimension), std::move(papers),
                                          gateway_relate(gateway, std::string(dimension)));
    return build_forest(std::move(graph), options.gamma, options.delta);
}

Report make_report(const CitationNetwork& network, const ComparableNetwork& comparable, const DimensionStore& store,
                   const NoveltyReport& novelty, const std::vector<std::string>& excluded_no_year) {
    Report r;
    r.target_id = network.target.paper_id;
    r.target_title = network.target.title;
    r.target_year = network.target.year;
    r.network_size = comparable.network.related.size();
    r.excluded_no_abstract = comparable.excluded_ids;
    r.excluded_no_year = excluded_no_year;
    r.dims = store.dims;
    r.novelty = novelty;
    return r;
}

Analysis analyze(Gateway& gateway, const CitationNetwork& network, const AnalysisOptions& options,
                 const DimensionStore* preset) {
    Analysis a;
    a.comparable = filter_comparable(network);
    const CitationNetwork& net = a.comparable.network;
    a.store = preset ? *preset : build_dimension_store(gateway, net, options.dims);

    GatewayJudge judge(gateway);
    a.overall = score_overall(a.store, net, judge, options.alpha);
    a.temporal = score_temporal(a.store, net, judge);

    auto dims = options.evolve_dimensions.empty() ? a.store.dims.keys() : options.evolve_dimensions;
    for (const auto& d : dims) {
        if (!a.store.dims.find(d)) throw DimensionError("cannot evolve unknown dimension '" + d + "'; known: " + a.store.dims.describe_keys());
        a.graphs.push_back(evolve_dimension(gateway, a.temporal.series, d, options.evolve));
    }

    auto selection = options.radar_selection.empty() ? a.overall.matrix.rows : options.radar_selection;
    if (!selection.empty()) a.radar = make_radar(a.overall.matrix, selection);
    a.report = make_report(network, a.comparable, a.store, a.overall.novelty, a.temporal.excluded_no_year);
    return a;
}

std::string evolution_stem(std::string_view dimension) { return "evolution-" + text::slug(dimension); }

void write_bundle(const Analysis& a, const std::filesystem::path& dir, bool justifications) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "dims.json", to_json(a.store).dump(2) + "\n");
    write_text_file(dir / "matrix.json", render(matrix_to_json(a.overall.matrix)));
    write_text_file(dir / "report.json", render(report_to_json(a.report)));
    write_text_file(dir / "report.md", report_markdown(a.report, justifications ? &a.overall.matrix : nullptr));
    if (!a.radar.polygons.empty()) write_text_file(dir / "radar.json", render(radar_to_json(a.radar)));
    write_text_file(dir / "series.json", render(series_to_json(a.temporal.series)));
    for (const auto& g : a.graphs) {
        const auto stem = evolution_stem(g.dimension);
        write_text_file(dir / (stem + ".json"), render(graph_to_json(g)));
        write_text_file(dir / (stem + ".dot"), graph_to_dot(g));
    }
}

}  // namespace knovo
