#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "knovo/backends.hpp"
#include "knovo/corpus.hpp"
#include "knovo/parallel.hpp"
#include "knovo/pipeline.hpp"

using namespace knovo;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(KNOVO_FIXTURES) / "attention-mini";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Analysis run_fixture(int threads) {
    set_thread_count(threads);
    auto gateway = load_gateway(kFixture / "backend.json");
    auto corpus = load_corpus(kFixture / "corpus.jsonl");
    return analyze(*gateway, corpus.network);
}

fs::path write(const Analysis& a, const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    write_bundle(a, dir);
    return dir;
}

}  // namespace

TEST_CASE("fixture run reproduces the frozen products byte for byte") {
    auto first = write(run_fixture(4), "knovo-golden-a");
    auto second = write(run_fixture(1), "knovo-golden-b");
    std::set<std::string> produced;
    for (const auto& e : fs::directory_iterator(first)) produced.insert(e.path().filename().string());
    std::set<std::string> frozen;
    for (const auto& e : fs::directory_iterator(kFixture / "golden")) frozen.insert(e.path().filename().string());
    CHECK(produced == frozen);
    for (const auto& name : frozen) {
        CAPTURE(name);
        auto golden = slurp(kFixture / "golden" / name);
        CHECK(slurp(first / name) == golden);
        CHECK(slurp(second / name) == golden);
    }
    fs::remove_all(first);
    fs::remove_all(second);
}

TEST_CASE("fixture scores agree with the exact oracle") {
    auto a = run_fixture(4);
    // oracle.py: 112249/127920 overall, 1 over reference rows.
    CHECK(a.overall.novelty.omega == doctest::Approx(112249.0 / 127920.0).epsilon(1e-12));
    REQUIRE(a.overall.novelty.omega_refs_only);
    CHECK(*a.overall.novelty.omega_refs_only == 1.0);
    CHECK(*a.overall.novelty.omega_refs_only != a.overall.novelty.omega);

    CHECK(a.report.network_size == 10);
    CHECK(a.store.dims.size() == 5);
    CHECK(a.store.target.value("architecture type") == "Transformer");
    CHECK(a.store.target.value("technique used") == "Attention Mechanism");
    CHECK(a.store.target.value("english to german bleu") == "28.4 BLEU on WMT 2014 English-to-German");
    for (const auto& c : a.overall.matrix.cells) {
        if (c.score != Score::not_applicable) CHECK_FALSE(c.justification.empty());
    }
    auto convs2s = a.overall.matrix.row_index("p-convs2s");
    REQUIRE(convs2s);
    CHECK(a.overall.matrix.at(*convs2s, *a.overall.matrix.column_index("english to german bleu")).score == Score::plus_one);
    CHECK(a.overall.matrix.at(*convs2s, *a.overall.matrix.column_index("english to french bleu")).score == Score::plus_one);
}

TEST_CASE("architecture evolution on the fixture") {
    auto a = run_fixture(4);
    const RelationshipGraph* arch = nullptr;
    for (const auto& g : a.graphs)
        if (g.dimension == "architecture type") arch = &g;
    REQUIRE(arch);
    bool tree = false;
    for (const auto& n : arch->nodes) tree |= n.year == 1993 && n.value == "tree-structured";
    CHECK(tree);

    auto roots = forest_roots(*arch);
    auto has_root = [&](int year, const std::string& value) {
        for (const auto& r : roots)
            if (r.year == year && r.value == value) return true;
        return false;
    };
    CHECK(has_root(1993, "tree-structured"));
    CHECK(has_root(2015, "encoder-decoder"));

    auto cluster_of = [&](const std::string& id) { return arch->node(id)->cluster; };
    int transformer = cluster_of("p-transformer");
    int attention = cluster_of("p-align");
    int recurrent = cluster_of("p-seq2seq");
    CHECK(std::set<int>{transformer, attention, recurrent}.size() == 3);
    CHECK(transformer != kNoise);
    CHECK(attention != kNoise);
    CHECK(recurrent != kNoise);
    CHECK(cluster_of("p-gpt3") == transformer);
    CHECK(cluster_of("p-convs2s") == attention);
    CHECK(cluster_of("p-gnmt") == recurrent);
}
