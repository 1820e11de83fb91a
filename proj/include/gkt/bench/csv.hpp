#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "gkt/matrix.hpp"

namespace gkt::bench {

/// Numeric CSV with a required header row. Blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  /// Index of a named column; throws invalid-config when absent.
  std::size_t column(const std::string& name) const;
};

/// Parse errors carry the 1-based row (header is row 1) and column. NaN or
/// infinite cells are invalid-input.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

/// Splits rows by the value in `group_col` (two distinct values required,
/// in order of first appearance); the group column is dropped.
std::pair<Matrix, Matrix> split_groups(const CsvTable& table, std::size_t group_col);

/// "1,2,3" -> {1, 2, 3}. Throws invalid-config.
std::vector<std::size_t> parse_widths(const std::string& text);

}  // namespace gkt::bench
