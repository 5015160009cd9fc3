#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace knovo {

enum class Score { plus_one, zero, minus_one, not_applicable };

std::optional<int> to_int(Score s);
Score score_from_int(std::optional<int> v);

struct ComparisonOutcome {
    Score score = Score::not_applicable;
    std::string justification;

    bool operator==(const ComparisonOutcome&) const = default;
};

enum class MatrixMode { overall, temporal };

std::string_view to_string(MatrixMode m);

// Papers x dimensions grid of comparison outcomes, row-major.
struct ScoreMatrix {
    MatrixMode mode = MatrixMode::overall;
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<ComparisonOutcome> cells;

    ScoreMatrix() = default;
    ScoreMatrix(MatrixMode m, std::vector<std::string> row_ids, std::vector<std::string> column_keys);

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return columns.size(); }
    ComparisonOutcome& at(std::size_t row, std::size_t col) { return cells[row * columns.size() + col]; }
    const ComparisonOutcome& at(std::size_t row, std::size_t col) const { return cells[row * columns.size() + col]; }

    std::optional<std::size_t> row_index(std::string_view paper_id) const;
    std::optional<std::size_t> column_index(std::string_view key) const;

    bool operator==(const ScoreMatrix&) const = default;
};

// Justification for one cell, or nullopt when the paper or dimension is unknown.
std::optional<std::string> justification(const ScoreMatrix& m, std::string_view paper_id, std::string_view dimension);

}  // namespace knovo
