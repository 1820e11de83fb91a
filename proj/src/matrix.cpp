#include "gkt/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gkt/error.hpp"

namespace gkt {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::sample_too_small: return "sample-too-small";
    case ErrorKind::degenerate_sample: return "degenerate-sample";
    case ErrorKind::invalid_layout: return "invalid-layout";
    case ErrorKind::invalid_reference: return "invalid-reference";
    case ErrorKind::calibration_unavailable: return "calibration-unavailable";
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::invalid_setting: return "invalid-setting";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::unsupported_size: return "unsupported-size";
    case ErrorKind::degenerate_regressor: return "degenerate-regressor";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorKind::invalid_input,
          "matrix data size does not match its shape");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> copy;
  for (const auto& r : rows) copy.emplace_back(r);
  return from_rows(copy);
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == m.cols(), ErrorKind::invalid_input, "ragged rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

SampleMatrix::SampleMatrix(Matrix data) : data_(std::move(data)) {
  require(data_.rows() >= 2, ErrorKind::sample_too_small, "a sample needs at least 2 rows");
  require(data_.cols() >= 1, ErrorKind::invalid_input, "a sample needs at least 1 column");
  for (double v : data_.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::invalid_input, "sample contains a non-finite value");
  }
}

SampleMatrix SampleMatrix::concat(const SampleMatrix& first, const SampleMatrix& second) {
  require(first.d() == second.d(), ErrorKind::invalid_input, "samples differ in dimension");
  std::vector<double> data(first.matrix().values().begin(), first.matrix().values().end());
  data.insert(data.end(), second.matrix().values().begin(), second.matrix().values().end());
  return SampleMatrix(Matrix(first.n() + second.n(), first.d(), std::move(data)));
}

SampleMatrix SampleMatrix::columns(std::size_t first_col, std::size_t width) const {
  require(width >= 1 && first_col + width <= d(), ErrorKind::invalid_layout,
          "column range outside the sample");
  Matrix out(n(), width);
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = 0; j < width; ++j) out(i, j) = data_(i, first_col + j);
  return SampleMatrix(std::move(out));
}

SampleMatrix SampleMatrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), d());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return SampleMatrix(std::move(out));
}

}  // namespace gkt
