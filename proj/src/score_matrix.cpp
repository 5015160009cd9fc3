#include "knovo/score_matrix.hpp"

#include <algorithm>

namespace knovo {

std::optional<int> to_int(Score s) {
    switch (s) {
        case Score::plus_one: return 1;
        case Score::zero: return 0;
        case Score::minus_one: return -1;
        case Score::not_applicable: return std::nullopt;
    }
    return std::nullopt;
}

Score score_from_int(std::optional<int> v) {
    if (!v) return Score::not_applicable;
    if (*v > 0) return Score::plus_one;
    if (*v < 0) return Score::minus_one;
    return Score::zero;
}

std::string_view to_string(MatrixMode m) { return m == MatrixMode::overall ? "overall" : "temporal"; }

ScoreMatrix::ScoreMatrix(MatrixMode m, std::vector<std::string> row_ids, std::vector<std::string> column_keys)
    : mode(m), rows(std::move(row_ids)), columns(std::move(column_keys)), cells(rows.size() * columns.size()) {}

std::optional<std::size_t> ScoreMatrix::row_index(std::string_view paper_id) const {
    auto it = std::find(rows.begin(), rows.end(), paper_id);
    if (it == rows.end()) return std::nullopt;
    return static_cast<std::size_t>(it - rows.begin());
}

std::optional<std::size_t> ScoreMatrix::column_index(std::string_view key) const {
    auto it = std::find(columns.begin(), columns.end(), key);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

std::optional<std::string> justification(const ScoreMatrix& m, std::string_view paper_id, std::string_view dimension) {
    auto r = m.row_index(paper_id);
    auto c = m.column_index(dimension);
    if (!r || !c) return std::nullopt;
    return m.at(*r, *c).justification;
}

}  // namespace knovo
