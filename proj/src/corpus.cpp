#include "knovo/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "knovo/text.hpp"

namespace knovo {

using nlohmann::json;

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void field_error(std::string_view field, std::string_view expected) {
    throw CorpusError("field '" + std::string(field) + "': expected " + std::string(expected));
}

const json* field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return nullptr;
    return &*it;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    const json* v = field(j, key);
    if (!v) return std::nullopt;
    if (!v->is_string()) field_error(key, "string");
    return v->get<std::string>();
}

// Either a plain string or an object whose listed members are joined with ", ".
std::optional<std::string> flat_string(const json& j, const char* key, std::initializer_list<const char*> members) {
    const json* v = field(j, key);
    if (!v) return std::nullopt;
    if (v->is_string()) return v->get<std::string>();
    if (!v->is_object()) field_error(key, "string or object");
    std::string out;
    for (const char* m : members) {
        auto it = v->find(m);
        if (it == v->end() || !it->is_string()) continue;
        std::string part = text::trim(it->get<std::string>());
        if (part.empty()) continue;
        if (!out.empty()) out += ", ";
        out += part;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    const json* v = field(j, key);
    if (!v) return out;
    if (!v->is_array()) field_error(key, "array");
    for (const auto& item : *v) {
        if (item.is_string()) {
            out.push_back(item.get<std::string>());
        } else if (item.is_object() && item.contains("name") && item["name"].is_string()) {
            out.push_back(item["name"].get<std::string>());
        } else if (!item.is_null()) {
            field_error(key, "array of strings");
        }
    }
    return out;
}

std::int64_t count(const json& j, const char* key) {
    const json* v = field(j, key);
    if (!v) return 0;
    if (!v->is_number_integer()) field_error(key, "integer");
    return v->get<std::int64_t>();
}

std::optional<std::string> validate(const PaperRecord& r) {
    if (r.paper_id.empty()) return "missing paperId";
    if (r.relation == Relation::target && r.layer != 0) return "target record must have layer 0";
    if (r.relation != Relation::target && r.layer != 1 && r.layer != 2)
        return std::string(to_string(r.relation)) + " record must have layer 1 or 2";
    if (r.reference_count < 0 || r.citation_count < 0 || r.influential_citation_count < 0)
        return "negative count";
    return std::nullopt;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view iso) {
    // YYYY-MM-DD, optionally followed by a time part.
    if (iso.size() < 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    Date d;
    if (!parse_int(iso.substr(0, 4), d.year) || !parse_int(iso.substr(5, 2), d.month) ||
        !parse_int(iso.substr(8, 2), d.day))
        return std::nullopt;
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
    return d;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::target: return "target";
        case Relation::reference: return "reference";
        case Relation::citation: return "citation";
    }
    return "reference";
}

std::optional<Relation> relation_from_string(std::string_view s) {
    if (s == "target") return Relation::target;
    if (s == "reference") return Relation::reference;
    if (s == "citation") return Relation::citation;
    return std::nullopt;
}

std::optional<Date> PaperRecord::effective_date() const {
    if (publication_date) return publication_date;
    if (year) return Date{*year, 1, 1};
    return std::nullopt;
}

bool PaperRecord::has_abstract() const { return abstract && !text::is_blank(*abstract); }

bool PaperRecord::same_metadata(const PaperRecord& other) const {
    PaperRecord a = *this;
    a.relation = other.relation;
    a.layer = other.layer;
    return a == other;
}

const PaperRecord* CitationNetwork::find(std::string_view paper_id) const {
    if (target.paper_id == paper_id) return &target;
    auto it = std::find_if(related.begin(), related.end(), [&](const auto& r) { return r.paper_id == paper_id; });
    return it == related.end() ? nullptr : &*it;
}

nlohmann::ordered_json record_to_json(const PaperRecord& r) {
    auto opt = [](const auto& v) -> nlohmann::ordered_json {
        if (!v) return nullptr;
        return *v;
    };
    nlohmann::ordered_json j;
    j["paperId"] = r.paper_id;
    j["title"] = r.title;
    j["abstract"] = opt(r.abstract);
    j["authors"] = r.authors;
    j["publicationVenue"] = opt(r.publication_venue);
    j["year"] = opt(r.year);
    j["referenceCount"] = r.reference_count;
    j["citationCount"] = r.citation_count;
    j["influentialCitationCount"] = r.influential_citation_count;
    j["isOpenAccess"] = r.is_open_access;
    j["openAccessPdf"] = opt(r.open_access_pdf);
    j["fieldsOfStudy"] = r.fields_of_study;
    j["publicationDate"] = r.publication_date ? nlohmann::ordered_json(r.publication_date->iso()) : nlohmann::ordered_json();
    j["journal"] = opt(r.journal);
    j["type"] = std::string(to_string(r.relation));
    j["layer"] = r.layer;
    return j;
}

PaperRecord record_from_json(const json& j, Relation relation, int layer) {
    if (!j.is_object()) throw CorpusError("record is not an object");
    PaperRecord r;
    r.paper_id = opt_string(j, "paperId").value_or("");
    r.title = opt_string(j, "title").value_or("");
    r.abstract = opt_string(j, "abstract");
    r.authors = string_list(j, "authors");
    r.publication_venue = flat_string(j, "publicationVenue", {"name"});
    if (const json* y = field(j, "year")) {
        if (!y->is_number_integer()) field_error("year", "integer");
        r.year = y->get<int>();
    }
    if (auto date = opt_string(j, "publicationDate")) {
        r.publication_date = Date::parse(*date);
        if (!r.publication_date) spdlog::warn("paper {}: ignoring malformed publicationDate '{}'", r.paper_id, *date);
    }
    r.reference_count = count(j, "referenceCount");
    r.citation_count = count(j, "citationCount");
    r.influential_citation_count = count(j, "influentialCitationCount");
    if (const json* oa = field(j, "isOpenAccess")) {
        if (!oa->is_boolean()) field_error("isOpenAccess", "boolean");
        r.is_open_access = oa->get<bool>();
    }
    r.open_access_pdf = flat_string(j, "openAccessPdf", {"url"});
    r.fields_of_study = string_list(j, "fieldsOfStudy");
    r.journal = flat_string(j, "journal", {"name", "volume", "pages"});
    r.relation = relation;
    r.layer = layer;
    return r;
}

PaperRecord record_from_json(const json& j) {
    if (!j.is_object()) throw CorpusError("record is not an object");
    auto type = opt_string(j, "type");
    if (!type) throw CorpusError("missing 'type'");
    auto relation = relation_from_string(*type);
    if (!relation) throw CorpusError("unknown type '" + *type + "'");
    const json* layer = field(j, "layer");
    if (!layer || !layer->is_number_integer()) field_error("layer", "integer");
    return record_from_json(j, *relation, layer->get<int>());
}

LoadedCorpus assemble_network(std::vector<PaperRecord> records, std::string provenance) {
    LoadReport report;
    std::vector<PaperRecord> kept;
    std::unordered_map<std::string, std::size_t> index;

    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        if (auto reason = validate(r)) {
            spdlog::warn("rejecting record {} ({}): {}", i + 1, r.paper_id, *reason);
            report.rejected.push_back({i + 1, r.paper_id, *reason});
            continue;
        }
        auto [it, inserted] = index.try_emplace(r.paper_id, kept.size());
        if (inserted) {
            kept.push_back(std::move(r));
            continue;
        }
        PaperRecord& existing = kept[it->second];
        if (existing.relation == Relation::target && r.relation == Relation::target && !existing.same_metadata(r)) {
            throw CorpusError("conflicting target records for " + r.paper_id);
        }
        if (!existing.same_metadata(r)) {
            std::string msg = "duplicate paperId " + r.paper_id + " with conflicting metadata; keeping first occurrence at layer " +
                              std::to_string(std::min(existing.layer, r.layer));
            spdlog::warn("{}", msg);
            report.warnings.push_back(std::move(msg));
        }
        if (r.layer < existing.layer) existing = std::move(r);
    }

    CitationNetwork network;
    network.provenance = std::move(provenance);
    std::size_t targets = 0;
    for (auto& r : kept) {
        if (r.relation == Relation::target) {
            ++targets;
            network.target = std::move(r);
        } else {
            network.related.push_back(std::move(r));
        }
    }
    if (targets == 0) throw CorpusError("corpus has no target record");
    if (targets > 1) throw CorpusError("corpus has " + std::to_string(targets) + " target records");
    return {std::move(network), std::move(report)};
}

LoadedCorpus parse_corpus(std::istream& in, std::string provenance) {
    std::vector<PaperRecord> records;
    std::vector<std::size_t> line_of;
    LoadReport report;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_blank(line)) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object()) throw CorpusError("line " + std::to_string(line_no) + ": record is not an object");
        auto type = j.contains("type") && j["type"].is_string() ? relation_from_string(j["type"].get<std::string>())
                                                                 : std::nullopt;
        if (!type || !j.contains("layer") || !j["layer"].is_number_integer()) {
            std::string id = j.contains("paperId") && j["paperId"].is_string() ? j["paperId"].get<std::string>() : "";
            spdlog::warn("line {}: rejecting record {}: missing or invalid type/layer", line_no, id);
            report.rejected.push_back({line_no, id, "missing or invalid type/layer"});
            continue;
        }
        try {
            records.push_back(record_from_json(j, *type, j["layer"].get<int>()));
        } catch (const CorpusError& e) {
            throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
        }
        line_of.push_back(line_no);
    }

    auto loaded = assemble_network(std::move(records), std::move(provenance));
    for (auto& rej : loaded.report.rejected) {
        rej.line = line_of[rej.line - 1];
        report.rejected.push_back(std::move(rej));
    }
    std::sort(report.rejected.begin(), report.rejected.end(),
              [](const RejectedRecord& a, const RejectedRecord& b) { return a.line < b.line; });
    report.warnings = std::move(loaded.report.warnings);
    loaded.report = std::move(report);
    return loaded;
}

LoadedCorpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file " + path.string());
    return parse_corpus(in, path.string());
}

void write_corpus(const CitationNetwork& network, std::ostream& out) {
    out << record_to_json(network.target).dump() << '\n';
    for (const auto& r : network.related) out << record_to_json(r).dump() << '\n';
}

void save_corpus(const CitationNetwork& network, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorpusError("cannot write corpus file " + path.string());
    write_corpus(network, out);
}

Sequence order_sequence(const CitationNetwork& network) {
    Sequence seq;
    auto take = [&](const PaperRecord& r) {
        if (!r.year) {
            spdlog::info("paper {} has no year; excluded from the temporal sequence", r.paper_id);
            seq.excluded_ids.push_back(r.paper_id);
            return;
        }
        seq.papers.push_back(r);
    };
    take(network.target);
    for (const auto& r : network.related) take(r);
    std::sort(seq.papers.begin(), seq.papers.end(), [](const PaperRecord& a, const PaperRecord& b) {
        auto da = *a.effective_date();
        auto db = *b.effective_date();
        if (da != db) return da < db;
        return a.paper_id < b.paper_id;
    });
    return seq;
}

ComparableNetwork filter_comparable(const CitationNetwork& network) {
    if (!network.target.has_abstract())
        throw CorpusError("target paper " + network.target.paper_id + " has no abstract; analysis impossible");
    ComparableNetwork out;
    out.network.target = network.target;
    out.network.provenance = network.provenance;
    for (const auto& r : network.related) {
        if (r.has_abstract()) {
            out.network.related.push_back(r);
        } else {
            out.excluded_ids.push_back(r.paper_id);
        }
    }
    if (!out.excluded_ids.empty())
        spdlog::info("excluded {} related papers without abstracts", out.excluded_ids.size());
    return out;
}

}  // namespace knovo
