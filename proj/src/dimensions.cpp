#include "knovo/dimensions.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include "knovo/gateway.hpp"
#include "knovo/numeric.hpp"
#include "knovo/parallel.hpp"
#include "knovo/text.hpp"

namespace knovo {

using nlohmann::json;

std::string_view to_string(ValueType t) { return t == ValueType::numeric ? "numeric" : "categorical"; }
std::string_view to_string(Origin o) { return o == Origin::extracted ? "extracted" : "human_added"; }
std::string_view to_string(Direction d) { return d == Direction::higher_better ? "higher_better" : "lower_better"; }

std::optional<ValueType> value_type_from_string(std::string_view s) {
    if (s == "numeric") return ValueType::numeric;
    if (s == "categorical") return ValueType::categorical;
    return std::nullopt;
}

std::optional<Origin> origin_from_string(std::string_view s) {
    if (s == "extracted") return Origin::extracted;
    if (s == "human_added") return Origin::human_added;
    return std::nullopt;
}

std::optional<Direction> direction_from_string(std::string_view s) {
    if (s == "higher_better") return Direction::higher_better;
    if (s == "lower_better") return Direction::lower_better;
    return std::nullopt;
}

void DimensionSet::add(Dimension d) {
    d.key = text::normalize_key(d.key);
    if (d.key.empty()) throw DimensionError("dimension key is empty");
    if (find(d.key)) throw DimensionError("duplicate dimension '" + d.key + "'");
    dims_.push_back(std::move(d));
}

void DimensionSet::remove(std::string_view key) {
    auto idx = index_of(key);
    if (!idx) throw DimensionError("unknown dimension '" + text::normalize_key(key) + "'; known: " + describe_keys());
    dims_.erase(dims_.begin() + static_cast<std::ptrdiff_t>(*idx));
}

void DimensionSet::rename(std::string_view from, std::string_view to) {
    auto idx = index_of(from);
    if (!idx) throw DimensionError("unknown dimension '" + text::normalize_key(from) + "'; known: " + describe_keys());
    std::string key = text::normalize_key(to);
    if (key.empty()) throw DimensionError("rename of '" + dims_[*idx].key + "' to an empty key");
    if (key == dims_[*idx].key) return;
    if (find(key)) throw DimensionError("rename of '" + dims_[*idx].key + "' collides with existing '" + key + "'");
    dims_[*idx].key = std::move(key);
}

const Dimension* DimensionSet::find(std::string_view key) const {
    auto idx = index_of(key);
    return idx ? &dims_[*idx] : nullptr;
}

Dimension* DimensionSet::find(std::string_view key) {
    auto idx = index_of(key);
    return idx ? &dims_[*idx] : nullptr;
}

std::optional<std::size_t> DimensionSet::index_of(std::string_view key) const {
    std::string k = text::normalize_key(key);
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (dims_[i].key == k) return i;
    return std::nullopt;
}

std::vector<std::string> DimensionSet::keys() const {
    std::vector<std::string> out;
    out.reserve(dims_.size());
    for (const auto& d : dims_) out.push_back(d.key);
    return out;
}

std::string DimensionSet::describe_keys() const {
    std::string out;
    for (const auto& d : dims_) {
        if (!out.empty()) out += ", ";
        out += d.key;
    }
    return out.empty() ? "(none)" : out;
}

const std::string& ValueAssignment::value(std::string_view key) const {
    static const std::string kEmpty;
    auto it = values.find(std::string(key));
    return it == values.end() ? kEmpty : it->second;
}

bool ValueAssignment::covers_exactly(const DimensionSet& dims) const {
    if (values.size() != dims.size()) return false;
    return std::all_of(dims.begin(), dims.end(), [&](const Dimension& d) { return values.count(d.key) == 1; });
}

ValueAssignment empty_assignment(const DimensionSet& dims, std::string paper_id) {
    ValueAssignment a{std::move(paper_id), {}};
    for (const auto& d : dims) a.values[d.key] = "";
    return a;
}

TargetExtraction extract_target_dimensions(Gateway& gateway, const PaperRecord& target, std::size_t cap) {
    if (!target.has_abstract()) throw DimensionError("target " + target.paper_id + " has no abstract");
    InferenceTask task{TaskKind::extract_dimensions,
                       "extract_dimensions.v1",
                       json{{"abstract", *target.abstract}, {"max_dimensions", cap}},
                       "dimensions.v1"};
    auto response = gateway.invoke(task);
    if (!response) throw DimensionError("dimension extraction failed for target " + target.paper_id);

    TargetExtraction out;
    out.values.paper_id = target.paper_id;
    const auto& items = response->structured_output["dimensions"];
    std::size_t dropped = 0;
    for (const auto& item : items) {
        std::string key = text::normalize_key(item["key"].get<std::string>());
        std::string value = text::trim(item["value"].get<std::string>());
        if (value.empty()) {
            out.warnings.push_back("dimension '" + key + "' has no target value; skipped");
            continue;
        }
        if (out.dims.find(key)) {
            out.warnings.push_back("duplicate dimension '" + key + "'; keeping the first");
            continue;
        }
        if (out.dims.size() == cap) {
            ++dropped;
            continue;
        }
        out.dims.add(Dimension{key});
        out.values.values[key] = value;
    }
    if (dropped > 0) {
        out.warnings.push_back("dimension cap " + std::to_string(cap) + " reached; dropped " + std::to_string(dropped) +
                               " trailing dimensions");
    }
    if (out.dims.empty()) throw DimensionError("no usable dimensions extracted for target " + target.paper_id);
    for (const auto& [a, b] : near_duplicate_keys(out.dims)) {
        out.warnings.push_back("near-duplicate dimensions '" + a + "' and '" + b + "'; consider an override");
    }
    for (const auto& w : out.warnings) spdlog::warn("{}", w);
    return out;
}

ValueAssignment extract_related_values(Gateway& gateway, const DimensionSet& dims, const PaperRecord& paper) {
    ValueAssignment out = empty_assignment(dims, paper.paper_id);
    if (!paper.has_abstract() || dims.empty()) return out;
    InferenceTask task{TaskKind::extract_values,
                       "extract_values.v1",
                       json{{"abstract", *paper.abstract}, {"dimensions", dims.keys()}},
                       "values.v1"};
    try {
        auto response = gateway.invoke(task);
        if (!response) {
            spdlog::warn("value extraction failed for {}; using empty values", paper.paper_id);
            return out;
        }
        for (const auto& d : dims) out.values[d.key] = text::trim(response->structured_output["values"][d.key].get<std::string>());
    } catch (const BackendUnavailable& e) {
        spdlog::warn("value extraction for {}: {}; using empty values", paper.paper_id, e.what());
    }
    return out;
}

std::vector<ValueAssignment> extract_all_related_values(Gateway& gateway, const DimensionSet& dims,
                                                        std::span<const PaperRecord> papers) {
    std::vector<ValueAssignment> out(papers.size());
    parallel_for(papers.size(), [&](std::size_t i) { out[i] = extract_related_values(gateway, dims, papers[i]); });
    return out;
}

namespace reference {
std::vector<ValueAssignment> extract_all_related_values(Gateway& gateway, const DimensionSet& dims,
                                                        std::span<const PaperRecord> papers) {
    std::vector<ValueAssignment> out;
    out.reserve(papers.size());
    for (const auto& p : papers) out.push_back(extract_related_values(gateway, dims, p));
    return out;
}
}  // namespace reference

TypeDecision classify_value_type(const Dimension& dim, std::span<const std::string> samples, Gateway* gateway) {
    TypeDecision decision;
    std::vector<std::string> present;
    std::size_t numeric = 0;
    std::set<std::string> units;
    for (const auto& s : samples) {
        if (text::is_blank(s)) continue;
        present.push_back(text::trim(s));
        if (auto m = extract_magnitude(s)) {
            ++numeric;
            if (!m->unit.empty()) units.insert(m->unit);
        }
    }
    if (present.empty()) {
        decision.warning = "dimension '" + dim.key + "' has no non-empty samples; treating as categorical";
        spdlog::warn("{}", *decision.warning);
        return decision;
    }
    if (units.size() > 1) return decision;
    if (2 * numeric > present.size()) {
        decision.type = ValueType::numeric;
        return decision;
    }
    if (2 * numeric < present.size() || !gateway) return decision;

    InferenceTask task{TaskKind::value_type, "value_type.v1", json{{"dimension", dim.key}, {"samples", present}},
                       "value_type.v1"};
    try {
        if (auto response = gateway->invoke(task)) {
            decision.used_backend = true;
            decision.type = *value_type_from_string(response->structured_output["value_type"].get<std::string>());
        }
    } catch (const BackendUnavailable& e) {
        spdlog::warn("value-type tie-break for '{}': {}; treating as categorical", dim.key, e.what());
    }
    return decision;
}

Direction keyword_direction(std::string_view key) {
    for (const auto& token : text::content_tokens(key)) {
        for (std::string_view kw : {"error", "time", "cost"}) {
            if (token.find(kw) != std::string::npos) return Direction::lower_better;
        }
    }
    return Direction::higher_better;
}

Direction decide_direction(const Dimension& dim, std::string_view target_value, Gateway* gateway) {
    if (gateway) {
        InferenceTask task{TaskKind::direction, "direction.v1",
                           json{{"dimension", dim.key}, {"value", std::string(target_value)}}, "direction.v1"};
        try {
            if (auto response = gateway->invoke(task)) {
                return *direction_from_string(response->structured_output["direction"].get<std::string>());
            }
        } catch (const BackendUnavailable& e) {
            spdlog::warn("direction for '{}': {}; using keyword rule", dim.key, e.what());
        }
    }
    return keyword_direction(dim.key);
}

std::vector<std::pair<std::string, std::string>> near_duplicate_keys(const DimensionSet& dims, double threshold) {
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::set<std::string>> tokens;
    for (const auto& d : dims) {
        auto t = text::content_tokens(d.key);
        tokens.emplace_back(t.begin(), t.end());
    }
    for (std::size_t i = 0; i < dims.size(); ++i) {
        for (std::size_t j = i + 1; j < dims.size(); ++j) {
            std::size_t common = 0;
            for (const auto& t : tokens[i]) common += tokens[j].count(t);
            std::size_t unions = tokens[i].size() + tokens[j].size() - common;
            if (unions > 0 && static_cast<double>(common) / static_cast<double>(unions) >= threshold)
                out.emplace_back(dims[i].key, dims[j].key);
        }
    }
    return out;
}

DimensionOverrides parse_overrides(const std::string& yaml_text) {
    DimensionOverrides out;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw DimensionError(std::string("override document: ") + e.what());
    }
    if (root.IsNull()) return out;
    if (!root.IsMap()) throw DimensionError("override document must be a mapping with remove/rename/add");
    for (const auto& kv : root) {
        auto section = kv.first.as<std::string>();
        if (section != "remove" && section != "rename" && section != "add")
            throw DimensionError("unknown override section '" + section + "'");
    }
    try {
        if (auto remove = root["remove"]) {
            if (!remove.IsSequence()) throw DimensionError("'remove' must be a list of keys");
            for (const auto& n : remove) out.remove.push_back(n.as<std::string>());
        }
        if (auto rename = root["rename"]) {
            if (rename.IsMap()) {
                for (const auto& kv : rename) out.rename.emplace_back(kv.first.as<std::string>(), kv.second.as<std::string>());
            } else if (rename.IsSequence()) {
                for (const auto& n : rename) out.rename.emplace_back(n["from"].as<std::string>(), n["to"].as<std::string>());
            } else {
                throw DimensionError("'rename' must map old keys to new keys");
            }
        }
        if (auto add = root["add"]) {
            if (!add.IsSequence()) throw DimensionError("'add' must be a list");
            for (const auto& n : add) {
                AddedDimension a;
                if (n.IsScalar()) {
                    a.key = n.as<std::string>();
                } else {
                    a.key = n["key"].as<std::string>();
                    if (n["value_type"]) {
                        a.value_type = value_type_from_string(n["value_type"].as<std::string>());
                        if (!a.value_type) throw DimensionError("bad value_type for added dimension '" + a.key + "'");
                    }
                    if (n["value"]) a.target_value = n["value"].as<std::string>();
                }
                out.add.push_back(std::move(a));
            }
        }
    } catch (const YAML::Exception& e) {
        throw DimensionError(std::string("override document: ") + e.what());
    }
    return out;
}

DimensionOverrides load_overrides(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DimensionError("cannot open override document " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_overrides(buf.str());
}

DimensionSet apply_overrides(const DimensionSet& dims, const DimensionOverrides& overrides) {
    DimensionSet out = dims;
    for (const auto& key : overrides.remove) out.remove(key);
    for (const auto& [from, to] : overrides.rename) out.rename(from, to);
    for (const auto& a : overrides.add) {
        std::string key = text::normalize_key(a.key);
        if (out.find(key)) throw DimensionError("added dimension '" + key + "' already exists; known: " + out.describe_keys());
        Dimension d{key};
        d.origin = Origin::human_added;
        if (a.value_type) d.value_type = *a.value_type;
        d.direction = keyword_direction(key);
        out.add(std::move(d));
    }
    return out;
}

ValueAssignment apply_overrides(const ValueAssignment& values, const DimensionOverrides& overrides,
                                const DimensionSet& result) {
    std::map<std::string, std::string> current = values.values;
    for (const auto& key : overrides.remove) current.erase(text::normalize_key(key));
    for (const auto& [from, to] : overrides.rename) {
        auto node = current.extract(text::normalize_key(from));
        if (node.empty()) continue;
        node.key() = text::normalize_key(to);
        current.insert(std::move(node));
    }
    for (const auto& a : overrides.add) current[text::normalize_key(a.key)] = text::trim(a.target_value);

    ValueAssignment out{values.paper_id, {}};
    for (const auto& d : result) {
        auto it = current.find(d.key);
        out.values[d.key] = it == current.end() ? "" : it->second;
    }
    return out;
}

const ValueAssignment* DimensionStore::values_for(std::string_view paper_id) const {
    if (target.paper_id == paper_id) return &target;
    auto it = std::find_if(related.begin(), related.end(), [&](const auto& a) { return a.paper_id == paper_id; });
    return it == related.end() ? nullptr : &*it;
}

json to_json(const DimensionStore& store) {
    json dims = json::array();
    for (const auto& d : store.dims) {
        dims.push_back({{"key", d.key},
                        {"value_type", to_string(d.value_type)},
                        {"origin", to_string(d.origin)},
                        {"direction", to_string(d.direction)}});
    }
    json related = json::array();
    for (const auto& a : store.related) related.push_back({{"paper_id", a.paper_id}, {"values", a.values}});
    return {{"target_id", store.target_id},
            {"dimensions", dims},
            {"target_values", store.target.values},
            {"related_values", related}};
}

DimensionStore dimension_store_from_json(const json& j) {
    DimensionStore store;
    try {
        store.target_id = j.at("target_id").get<std::string>();
        for (const auto& d : j.at("dimensions")) {
            Dimension dim{d.at("key").get<std::string>()};
            auto vt = value_type_from_string(d.at("value_type").get<std::string>());
            auto origin = origin_from_string(d.at("origin").get<std::string>());
            auto dir = direction_from_string(d.value("direction", "higher_better"));
            if (!vt || !origin || !dir) throw DimensionError("bad dimension record for '" + dim.key + "'");
            dim.value_type = *vt;
            dim.origin = *origin;
            dim.direction = *dir;
            store.dims.add(std::move(dim));
        }
        store.target = {store.target_id, j.at("target_values").get<std::map<std::string, std::string>>()};
        for (const auto& a : j.at("related_values")) {
            store.related.push_back(
                {a.at("paper_id").get<std::string>(), a.at("values").get<std::map<std::string, std::string>>()});
        }
    } catch (const json::exception& e) {
        throw DimensionError(std::string("dimension store: ") + e.what());
    }
    auto check = [&](const ValueAssignment& a) {
        if (!a.covers_exactly(store.dims)) throw DimensionError("values of " + a.paper_id + " do not match the dimension set");
    };
    check(store.target);
    for (const auto& a : store.related) check(a);
    return store;
}

}  // namespace knovo
