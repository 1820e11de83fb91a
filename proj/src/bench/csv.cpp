#include "gkt/bench/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gkt/error.hpp"

namespace gkt::bench {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  fail(ErrorKind::invalid_config, "no column named '" + name + "'");
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t row = 0;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(line);
    if (table.header.empty()) {
      for (std::size_t j = 0; j < cells.size(); ++j)
        if (cells[j].empty()) fail(ErrorKind::parse_error, "empty header name at " + where(row, j + 1));
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      fail(ErrorKind::parse_error, "expected " + std::to_string(table.header.size()) +
                                       " cells, found " + std::to_string(cells.size()) + " at " +
                                       where(row, std::min(cells.size(), table.header.size()) + 1));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string& c = cells[j];
      const std::string lower = [&] {
        std::string l;
        for (char ch : c) l += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return l;
      }();
      if (lower == "nan" || lower == "-nan" || lower == "inf" || lower == "-inf" ||
          lower == "infinity" || lower == "-infinity")
        fail(ErrorKind::invalid_input, "non-finite value at " + where(row, j + 1));
      double v = 0.0;
      const char* first = c.data();
      if (!c.empty() && c[0] == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, c.data() + c.size(), v);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size())
        fail(ErrorKind::parse_error, "not a number '" + c + "' at " + where(row, j + 1));
      if (!std::isfinite(v)) fail(ErrorKind::invalid_input, "non-finite value at " + where(row, j + 1));
      values.push_back(v);
    }
    ++rows;
  }
  if (table.header.empty()) fail(ErrorKind::parse_error, "missing header row");
  table.values = Matrix(rows, table.header.size(), std::move(values));
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io_error, "cannot open " + path.string());
  try {
    return parse_csv(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::pair<Matrix, Matrix> split_groups(const CsvTable& table, std::size_t group_col) {
  const Matrix& v = table.values;
  require(group_col < v.cols(), ErrorKind::invalid_config, "group column out of range");
  require(v.cols() >= 2, ErrorKind::invalid_input, "no data columns besides the group column");
  std::vector<double> labels;
  std::vector<std::vector<double>> parts[2];
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double g = v(i, group_col);
    auto it = std::find(labels.begin(), labels.end(), g);
    if (it == labels.end()) {
      if (labels.size() == 2) fail(ErrorKind::invalid_input, "group column has more than two values");
      labels.push_back(g);
      it = labels.end() - 1;
    }
    std::vector<double> r;
    for (std::size_t j = 0; j < v.cols(); ++j)
      if (j != group_col) r.push_back(v(i, j));
    parts[it - labels.begin()].push_back(std::move(r));
  }
  require(labels.size() == 2, ErrorKind::invalid_input, "group column needs two distinct values");
  return {Matrix::from_rows(parts[0]), Matrix::from_rows(parts[1])};
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& cell : split(text)) {
    std::size_t w = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), w);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || w == 0)
      fail(ErrorKind::invalid_config, "bad block width '" + cell + "'");
    out.push_back(w);
  }
  return out;
}

}  // namespace gkt::bench
