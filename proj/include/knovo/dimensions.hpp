#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "knovo/corpus.hpp"

namespace knovo {

class Gateway;

class DimensionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class ValueType { numeric, categorical };
enum class Origin { extracted, human_added };
enum class Direction { higher_better, lower_better };

std::string_view to_string(ValueType t);
std::string_view to_string(Origin o);
std::string_view to_string(Direction d);
std::optional<ValueType> value_type_from_string(std::string_view s);
std::optional<Origin> origin_from_string(std::string_view s);
std::optional<Direction> direction_from_string(std::string_view s);

struct Dimension {
    std::string key;
    ValueType value_type = ValueType::categorical;
    Origin origin = Origin::extracted;
    Direction direction = Direction::higher_better;

    bool operator==(const Dimension&) const = default;
};

// Ordered set of dimensions with unique, normalized keys. Order is the extraction order and
// is reused as column order in score matrices and as vertex order in radar sheets.
class DimensionSet {
  public:
    DimensionSet() = default;

    // Normalizes the key; throws DimensionError on an empty or duplicate key.
    void add(Dimension d);
    void remove(std::string_view key);
    void rename(std::string_view from, std::string_view to);

    const Dimension* find(std::string_view key) const;
    Dimension* find(std::string_view key);
    std::optional<std::size_t> index_of(std::string_view key) const;
    const Dimension& operator[](std::size_t i) const { return dims_[i]; }
    Dimension& operator[](std::size_t i) { return dims_[i]; }

    std::size_t size() const { return dims_.size(); }
    bool empty() const { return dims_.empty(); }
    auto begin() const { return dims_.begin(); }
    auto end() const { return dims_.end(); }
    auto begin() { return dims_.begin(); }
    auto end() { return dims_.end(); }
    std::vector<std::string> keys() const;
    std::string describe_keys() const;

    bool operator==(const DimensionSet&) const = default;

  private:
    std::vector<Dimension> dims_;
};

// Per-paper values over the dimension keys; an empty string means "not addressed".
struct ValueAssignment {
    std::string paper_id;
    std::map<std::string, std::string> values;

    const std::string& value(std::string_view key) const;
    bool covers_exactly(const DimensionSet& dims) const;

    bool operator==(const ValueAssignment&) const = default;
};

ValueAssignment empty_assignment(const DimensionSet& dims, std::string paper_id);

struct TargetExtraction {
    DimensionSet dims;
    ValueAssignment values;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultDimensionCap = 20;

// Throws DimensionError when the backend yields no usable dimension.
TargetExtraction extract_target_dimensions(Gateway& gateway, const PaperRecord& target,
                                           std::size_t cap = kDefaultDimensionCap);

// Never throws for backend trouble: a failed extraction yields an all-empty assignment.
ValueAssignment extract_related_values(Gateway& gateway, const DimensionSet& dims, const PaperRecord& paper);

// One assignment per paper, in input order. OpenMP fan-out over papers.
std::vector<ValueAssignment> extract_all_related_values(Gateway& gateway, const DimensionSet& dims,
                                                        std::span<const PaperRecord> papers);

namespace reference {
std::vector<ValueAssignment> extract_all_related_values(Gateway& gateway, const DimensionSet& dims,
                                                        std::span<const PaperRecord> papers);
}

struct TypeDecision {
    ValueType type = ValueType::categorical;
    bool used_backend = false;
    std::optional<std::string> warning;
};

// Numeric iff most non-empty samples carry a magnitude and their units agree; an exact tie is
// settled by the backend when one is given, otherwise categorical.
TypeDecision classify_value_type(const Dimension& dim, std::span<const std::string> samples, Gateway* gateway = nullptr);

// Backend judgement first, then the keyword rule ("error", "time", "cost" -> lower is better).
Direction decide_direction(const Dimension& dim, std::string_view target_value, Gateway* gateway = nullptr);
Direction keyword_direction(std::string_view key);

// Pairs of keys whose token sets overlap heavily; candidates for a human merge.
std::vector<std::pair<std::string, std::string>> near_duplicate_keys(const DimensionSet& dims, double threshold = 0.5);

struct AddedDimension {
    std::string key;
    std::optional<ValueType> value_type;
    std::string target_value;
};

struct DimensionOverrides {
    std::vector<std::string> remove;
    std::vector<std::pair<std::string, std::string>> rename;
    std::vector<AddedDimension> add;
};

DimensionOverrides parse_overrides(const std::string& yaml_text);
DimensionOverrides load_overrides(const std::filesystem::path& path);

// Removals, then renames, then additions. Unknown keys and key collisions throw DimensionError.
DimensionSet apply_overrides(const DimensionSet& dims, const DimensionOverrides& overrides);
// Carries the target's values through the same edits so they match `result`.
ValueAssignment apply_overrides(const ValueAssignment& values, const DimensionOverrides& overrides,
                                const DimensionSet& result);

// Persisted dimensions and values for one network.
struct DimensionStore {
    std::string target_id;
    DimensionSet dims;
    ValueAssignment target;
    std::vector<ValueAssignment> related;

    const ValueAssignment* values_for(std::string_view paper_id) const;
    bool operator==(const DimensionStore&) const = default;
};

nlohmann::json to_json(const DimensionStore& store);
DimensionStore dimension_store_from_json(const nlohmann::json& j);

}  // namespace knovo
