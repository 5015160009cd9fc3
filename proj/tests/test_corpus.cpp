#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "knovo/corpus.hpp"

using namespace knovo;

namespace {

std::string line(const std::string& id, const std::string& type, int layer, const std::string& extra = "") {
    return R"({"paperId":")" + id + R"(","title":"T )" + id + R"(","abstract":"About )" + id + R"(","year":2015,"type":")" +
           type + R"(","layer":)" + std::to_string(layer) + extra + "}\n";
}

LoadedCorpus parse(const std::string& s) {
    std::istringstream in(s);
    return parse_corpus(in, "test");
}

PaperRecord paper(const std::string& id, std::optional<int> year, std::optional<Date> date = std::nullopt,
                  Relation rel = Relation::reference, int layer = 1) {
    PaperRecord p;
    p.paper_id = id;
    p.title = id;
    p.abstract = "abstract of " + id;
    p.year = year;
    p.publication_date = date;
    p.relation = rel;
    p.layer = layer;
    return p;
}

}  // namespace

TEST_CASE("a small corpus loads with the target at layer 0") {
    auto c = parse(line("t", "target", 0) + line("r1", "reference", 1) + line("r2", "reference", 1) +
                   line("c1", "citation", 1));
    CHECK(c.network.size() == 4);
    CHECK(c.network.target.paper_id == "t");
    CHECK(c.network.target.layer == 0);
    CHECK(c.network.related.size() == 3);
    CHECK(c.report.rejected.empty());
    CHECK(c.network.provenance == "test");
}

TEST_CASE("duplicates keep the minimal layer occurrence") {
    auto c = parse(line("t", "target", 0) + line("x", "reference", 2) + line("x", "reference", 1));
    REQUIRE(c.network.related.size() == 1);
    CHECK(c.network.related[0].layer == 1);
}

TEST_CASE("a duplicate with conflicting metadata keeps the first occurrence and warns") {
    auto c = parse(line("t", "target", 0) + line("x", "reference", 1) +
                   R"({"paperId":"x","title":"Other title","year":2015,"type":"reference","layer":2})" "\n");
    REQUIRE(c.network.related.size() == 1);
    CHECK(c.network.related[0].title == "T x");
    CHECK_FALSE(c.report.warnings.empty());
}

TEST_CASE("layer and relation invariants reject records") {
    auto c = parse(line("t", "target", 0) + line("bad", "citation", 0) + line("bad2", "reference", 3) +
                   line("ok", "citation", 2));
    CHECK(c.network.related.size() == 1);
    REQUIRE(c.report.rejected.size() == 2);
    CHECK(c.report.rejected[0].paper_id == "bad");
    CHECK(c.report.rejected[0].line == 2);
}

TEST_CASE("fatal corpus errors") {
    CHECK_THROWS_AS(parse("{not json\n"), CorpusError);
    CHECK_THROWS_AS(parse(line("r", "reference", 1)), CorpusError);
    CHECK_THROWS_AS(parse(line("t", "target", 0) + line("u", "target", 0)), CorpusError);
}

TEST_CASE("semantic scholar nested fields are accepted") {
    auto c = parse(R"({"paperId":"t","title":"x","authors":[{"authorId":"1","name":"Ada"}],)"
                   R"("publicationVenue":{"name":"Venue"},"openAccessPdf":{"url":"http://pdf"},)"
                   R"("journal":{"name":"J"},"year":2017,"publicationDate":"2017-06-12","type":"target","layer":0})" "\n");
    const auto& t = c.network.target;
    CHECK(t.authors == std::vector<std::string>{"Ada"});
    CHECK(t.publication_venue == "Venue");
    CHECK(t.open_access_pdf == "http://pdf");
    CHECK(t.journal == "J");
    CHECK(t.publication_date == Date{2017, 6, 12});
}

TEST_CASE("load, save, load is the identity on the retained records") {
    auto first = parse(line("t", "target", 0) + line("a", "reference", 1) + line("a", "reference", 2) +
                       line("b", "citation", 2, R"(,"publicationDate":"2016-02-03","fieldsOfStudy":["CS"])"));
    auto path = std::filesystem::temp_directory_path() / "knovo-corpus-roundtrip.jsonl";
    save_corpus(first.network, path);
    auto second = load_corpus(path);
    std::filesystem::remove(path);
    CHECK(second.network.target == first.network.target);
    CHECK(second.network.related == first.network.related);
}

TEST_CASE("record json uses the corpus field names") {
    auto j = record_to_json(paper("p", 2014, Date{2014, 9, 10}));
    for (const char* key : {"paperId", "title", "abstract", "authors", "publicationVenue", "year", "referenceCount",
                            "citationCount", "influentialCitationCount", "isOpenAccess", "openAccessPdf",
                            "fieldsOfStudy", "publicationDate", "journal", "type", "layer"}) {
        CHECK_MESSAGE(j.contains(key), key);
    }
    CHECK(j["type"] == "reference");
    CHECK(j["publicationDate"] == "2014-09-10");
}

TEST_CASE("order_sequence sorts by effective date then paper id") {
    CitationNetwork n;
    n.target = paper("t", 2017, std::nullopt, Relation::target, 0);
    n.related = {paper("late", 2019), paper("early", 2014), paper("b", 2016, Date{2016, 5, 1}),
                 paper("a", 2016, Date{2016, 5, 1}), paper("jan", 2016), paper("none", std::nullopt)};
    auto seq = order_sequence(n);
    std::vector<std::string> ids;
    for (const auto& p : seq.papers) ids.push_back(p.paper_id);
    CHECK(ids == std::vector<std::string>{"early", "jan", "a", "b", "t", "late"});
    CHECK(seq.excluded_ids == std::vector<std::string>{"none"});
}

TEST_CASE("effective date falls back to January 1") {
    auto p = paper("x", 2016);
    CHECK(p.effective_date() == Date{2016, 1, 1});
    CHECK(paper("y", std::nullopt).effective_date() == std::nullopt);
    CHECK(Date::parse("2017-06-12")->iso() == "2017-06-12");
    CHECK_FALSE(Date::parse("June 2017"));
}

TEST_CASE("filter_comparable drops papers without abstracts") {
    CitationNetwork n;
    n.target = paper("t", 2017, std::nullopt, Relation::target, 0);
    for (int i = 0; i < 10; ++i) {
        auto p = paper("p" + std::to_string(i), 2015);
        if (i < 3) p.abstract.reset();
        if (i == 3) p.abstract = "   ";
        n.related.push_back(p);
    }
    auto c = filter_comparable(n);
    CHECK(c.network.related.size() == 6);
    CHECK(c.excluded_ids == std::vector<std::string>{"p0", "p1", "p2", "p3"});
    for (const auto& p : c.network.related) CHECK(p.has_abstract());

    n.target.abstract.reset();
    CHECK_THROWS_AS(filter_comparable(n), CorpusError);
}

TEST_CASE("filter_comparable is the identity when every abstract is present") {
    CitationNetwork n;
    n.target = paper("t", 2017, std::nullopt, Relation::target, 0);
    n.related = {paper("a", 2014), paper("b", 2015)};
    auto c = filter_comparable(n);
    CHECK(c.network == n);
    CHECK(c.excluded_ids.empty());
}
