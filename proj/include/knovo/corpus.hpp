#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace knovo {

class CorpusError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    static std::optional<Date> parse(std::string_view iso);
    std::string iso() const;
};

enum class Relation { target, reference, citation };

std::string_view to_string(Relation r);
std::optional<Relation> relation_from_string(std::string_view s);

// One paper of the citation network, with the metadata columns of the corpus file.
struct PaperRecord {
    std::string paper_id;
    std::string title;
    std::optional<std::string> abstract;
    std::vector<std::string> authors;
    std::optional<std::string> publication_venue;
    std::optional<int> year;
    std::optional<Date> publication_date;
    std::int64_t reference_count = 0;
    std::int64_t citation_count = 0;
    std::int64_t influential_citation_count = 0;
    bool is_open_access = false;
    std::optional<std::string> open_access_pdf;
    std::vector<std::string> fields_of_study;
    std::optional<std::string> journal;
    Relation relation = Relation::reference;
    int layer = 1;

    bool operator==(const PaperRecord&) const = default;

    // publicationDate when present, otherwise January 1 of year.
    std::optional<Date> effective_date() const;
    bool has_abstract() const;
    // Everything except network role (relation, layer).
    bool same_metadata(const PaperRecord& other) const;
};

struct CitationNetwork {
    PaperRecord target;
    std::vector<PaperRecord> related;
    std::string provenance;

    std::size_t size() const { return related.size() + 1; }
    const PaperRecord* find(std::string_view paper_id) const;

    bool operator==(const CitationNetwork&) const = default;
};

struct RejectedRecord {
    std::size_t line = 0;
    std::string paper_id;
    std::string reason;
};

struct LoadReport {
    std::vector<RejectedRecord> rejected;
    std::vector<std::string> warnings;
};

struct LoadedCorpus {
    CitationNetwork network;
    LoadReport report;
};

nlohmann::ordered_json record_to_json(const PaperRecord& record);
// Accepts both the flat corpus form and Semantic Scholar's nested objects
// (authors[].name, publicationVenue.name, openAccessPdf.url, journal{name,volume,pages}).
PaperRecord record_from_json(const nlohmann::json& j, Relation relation, int layer);
PaperRecord record_from_json(const nlohmann::json& j);

// One JSON object per line. Parse failures and a missing target are fatal (CorpusError);
// records violating the layer/relation invariants are rejected into the report.
LoadedCorpus parse_corpus(std::istream& in, std::string provenance);
LoadedCorpus load_corpus(const std::filesystem::path& path);

// Builds a network from records in arbitrary order, applying validation and min-layer dedup.
LoadedCorpus assemble_network(std::vector<PaperRecord> records, std::string provenance);

void write_corpus(const CitationNetwork& network, std::ostream& out);
void save_corpus(const CitationNetwork& network, const std::filesystem::path& path);

struct Sequence {
    std::vector<PaperRecord> papers;
    std::vector<std::string> excluded_ids;  // no year
};

// Target and related papers ascending by (effective date, paper_id).
Sequence order_sequence(const CitationNetwork& network);

struct ComparableNetwork {
    CitationNetwork network;
    std::vector<std::string> excluded_ids;  // related papers without abstract
};

// Drops related papers without an abstract. Throws CorpusError when the target has none.
ComparableNetwork filter_comparable(const CitationNetwork& network);

}  // namespace knovo
