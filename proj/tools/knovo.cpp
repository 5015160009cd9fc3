#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "knovo/backends.hpp"
#include "knovo/corpus.hpp"
#include "knovo/gateway.hpp"
#include "knovo/parallel.hpp"
#include "knovo/pipeline.hpp"
#include "knovo/scholar.hpp"

namespace fs = std::filesystem;
using namespace knovo;

namespace {

struct Common {
    std::string backend;
    std::string cache_dir;
    int threads = 0;
    std::string log_level = "info";
};

CitationNetwork read_network(const std::string& path) {
    auto loaded = load_corpus(path);
    for (const auto& w : loaded.report.warnings) spdlog::warn("{}", w);
    for (const auto& r : loaded.report.rejected) spdlog::warn("line {} ({}): rejected, {}", r.line, r.paper_id, r.reason);
    return std::move(loaded.network);
}

std::unique_ptr<Gateway> open_gateway(const Common& c) {
    if (c.backend.empty()) throw CLI::ValidationError("--backend", "a backend config file is required for this command");
    std::optional<fs::path> cache;
    if (!c.cache_dir.empty()) cache = fs::path(c.cache_dir);
    return load_gateway(c.backend, cache);
}

DimensionStore read_or_extract(Gateway& gw, const CitationNetwork& comparable, const std::string& dims_path,
                               const DimensionOptions& options) {
    if (!dims_path.empty()) return dimension_store_from_json(read_json_file(dims_path));
    return build_dimension_store(gw, comparable, options);
}

void report_stats(const Gateway& gw) {
    auto s = gw.stats();
    spdlog::info("gateway: {} requests, {} cache hits, {} backend calls, {} rejections, {} failures", s.requests,
                 s.cache_hits, s.backend_calls, s.rejections, s.failures);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"knovo: novelty analysis over a paper's citation network"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--backend", common.backend, "Inference backend config (JSON)");
    app.add_option("--cache-dir", common.cache_dir, "Response cache directory (overrides the config)");
    app.add_option("--threads", common.threads, "Worker threads for parallel stages");
    app.add_option("--log-level", common.log_level, "trace, debug, info, warn, error");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Fetch or normalize a citation network into a corpus file");
    std::string target_id, offline, ingest_out;
    std::size_t cap = 50;
    double rate = 1.0;
    ingest->add_option("--target", target_id, "Target paper id");
    ingest->add_option("--offline", offline, "Existing corpus file to validate and rewrite")->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_out, "Output corpus file")->required();
    ingest->add_option("--cap", cap, "Citations kept per layer and per parent")->capture_default_str();
    ingest->add_option("--rate", rate, "API requests per second")->capture_default_str();

    std::string corpus, dims_path, overrides_path, out;
    std::size_t max_dims = kDefaultDimensionCap;
    double alpha = kDefaultAlpha;
    auto corpus_opts = [&](CLI::App* sub) {
        sub->add_option("--corpus", corpus, "Corpus file")->required()->check(CLI::ExistingFile);
    };
    auto dims_in = [&](CLI::App* sub) {
        sub->add_option("--dims", dims_path, "Dimension store from `knovo dims`")->check(CLI::ExistingFile);
        sub->add_option("--override", overrides_path, "Dimension override document (YAML)")->check(CLI::ExistingFile);
        sub->add_option("--max-dims", max_dims, "Dimension cap")->capture_default_str();
    };

    auto* dims = app.add_subcommand("dims", "Extract dimensions and values");
    corpus_opts(dims);
    dims->add_option("--override", overrides_path, "Dimension override document (YAML)")->check(CLI::ExistingFile);
    dims->add_option("--max-dims", max_dims, "Dimension cap")->capture_default_str();
    dims->add_option("--out", out, "Dimension store output")->required();

    auto* score = app.add_subcommand("score", "Overall novelty score and matrix");
    corpus_opts(score);
    dims_in(score);
    bool refs_only = false;
    score->add_option("--alpha", alpha, "Equivalence weight")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    score->add_option("--out,--matrix", out, "Matrix output")->required();
    score->add_flag("--refs-only", refs_only, "Also print the reference-only score");

    auto* temporal = app.add_subcommand("temporal", "Temporal novelty series");
    corpus_opts(temporal);
    dims_in(temporal);
    temporal->add_option("--out", out, "Series output")->required();

    auto* evolve = app.add_subcommand("evolve", "Evolution graph and forest for one dimension");
    corpus_opts(evolve);
    dims_in(evolve);
    std::string dim, series_path;
    EvolveOptions evolve_opts;
    evolve->add_option("--dim", dim, "Dimension key")->required();
    evolve->add_option("--series", series_path, "Series from `knovo temporal`")->check(CLI::ExistingFile);
    evolve->add_option("--out", out, "Graph output (a .dot file is written alongside)")->required();
    auto graph_opts = [&](CLI::App* sub) {
        sub->add_option("--gamma", evolve_opts.gamma, "Confidence exponent")->check(CLI::NonNegativeNumber)->capture_default_str();
        sub->add_option("--delta", evolve_opts.delta, "Year-gap exponent")->check(CLI::NonNegativeNumber)->capture_default_str();
        sub->add_option("--eps", evolve_opts.cluster.eps, "Clustering radius (cosine distance)")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--min-points", evolve_opts.cluster.min_points, "Clustering density threshold")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    };
    graph_opts(evolve);

    auto* report = app.add_subcommand("report", "Run every stage and write all products");
    corpus_opts(report);
    dims_in(report);
    std::vector<std::string> evolve_dims, radar;
    bool justifications = false;
    report->add_option("--alpha", alpha, "Equivalence weight")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    report->add_option("--out", out, "Output directory")->required();
    report->add_option("--evolve", evolve_dims, "Dimensions to evolve (default: all)");
    report->add_option("--radar", radar, "Papers on the radar sheet (default: all)");
    report->add_flag("--justifications", justifications, "List every cell justification in report.md");
    graph_opts(report);

    auto* explain = app.add_subcommand("explain", "Print the justification of one matrix cell");
    std::string matrix_path, paper;
    explain->add_option("--matrix", matrix_path, "Matrix file")->required()->check(CLI::ExistingFile);
    explain->add_option("--paper", paper, "Row paper id")->required();
    explain->add_option("--dim", dim, "Dimension key")->required();

    CLI11_PARSE(app, argc, argv);

    spdlog::set_default_logger(spdlog::stderr_color_mt("knovo"));
    spdlog::set_level(spdlog::level::from_str(common.log_level));
    set_thread_count(common.threads);

    auto dim_options = [&] {
        DimensionOptions o;
        o.cap = max_dims;
        if (!overrides_path.empty()) o.overrides = load_overrides(overrides_path);
        return o;
    };

    try {
        if (*ingest) {
            if (offline.empty() == target_id.empty()) {
                throw CLI::ValidationError("ingest", "give exactly one of --target and --offline");
            }
            CitationNetwork network;
            if (!offline.empty()) {
                network = read_network(offline);
            } else {
                auto transport = make_http_transport_from_env();
                TokenBucket bucket(rate, 1.0);
                ScholarClient client(*transport, bucket);
                auto fetched = fetch_network(client, target_id, FetchCaps{cap});
                for (const auto& w : fetched.warnings) spdlog::warn("{}", w);
                network = std::move(fetched.network);
            }
            save_corpus(network, ingest_out);
            spdlog::info("wrote {} papers to {}", network.size(), ingest_out);
            return 0;
        }
        if (*explain) {
            auto m = matrix_from_json(read_json_file(matrix_path));
            auto j = justification(m, paper, dim);
            if (!j) {
                std::cerr << "no cell for paper '" << paper << "' and dimension '" << dim << "'\n";
                return 1;
            }
            std::cout << *j << "\n";
            return 0;
        }

        auto network = read_network(corpus);
        auto gw = open_gateway(common);

        if (*dims) {
            auto comparable = filter_comparable(network);
            auto store = build_dimension_store(*gw, comparable.network, dim_options());
            write_text_file(out, to_json(store).dump(2) + "\n");
            spdlog::info("{} dimensions: {}", store.dims.size(), store.dims.describe_keys());
        } else if (*score) {
            auto comparable = filter_comparable(network);
            auto store = read_or_extract(*gw, comparable.network, dims_path, dim_options());
            GatewayJudge judge(*gw);
            auto result = score_overall(store, comparable.network, judge, alpha);
            write_text_file(out, render(matrix_to_json(result.matrix)));
            std::cout << "omega " << result.novelty.omega << "\n";
            if (refs_only) {
                std::cout << "omega_refs ";
                if (result.novelty.omega_refs_only) {
                    std::cout << *result.novelty.omega_refs_only << "\n";
                } else {
                    std::cout << "N/A\n";
                }
            }
        } else if (*temporal) {
            auto comparable = filter_comparable(network);
            auto store = read_or_extract(*gw, comparable.network, dims_path, dim_options());
            GatewayJudge judge(*gw);
            auto result = score_temporal(store, comparable.network, judge);
            write_text_file(out, render(series_to_json(result.series)));
        } else if (*evolve) {
            auto comparable = filter_comparable(network);
            auto store = read_or_extract(*gw, comparable.network, dims_path, dim_options());
            TemporalSeries series;
            if (!series_path.empty()) {
                series = series_from_json(read_json_file(series_path));
            } else {
                GatewayJudge judge(*gw);
                series = score_temporal(store, comparable.network, judge).series;
            }
            auto graph = evolve_dimension(*gw, series, dim, evolve_opts);
            write_text_file(out, render(graph_to_json(graph)));
            write_text_file(fs::path(out).replace_extension(".dot"), graph_to_dot(graph));
            for (const auto& r : forest_roots(graph)) std::cout << r.year << "\t" << r.paper_id << "\t" << r.value << "\n";
        } else if (*report) {
            AnalysisOptions options;
            options.alpha = alpha;
            options.dims = dim_options();
            options.evolve = evolve_opts;
            options.evolve_dimensions = evolve_dims;
            options.radar_selection = radar;
            std::optional<DimensionStore> preset;
            if (!dims_path.empty()) preset = dimension_store_from_json(read_json_file(dims_path));
            auto analysis = analyze(*gw, network, options, preset ? &*preset : nullptr);
            write_bundle(analysis, out, justifications);
            std::cout << report_markdown(analysis.report);
        }
        report_stats(*gw);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
