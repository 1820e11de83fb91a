#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gkt {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// n observations (rows) of dimension d. Invariants: n >= 2, d >= 1, finite.
class SampleMatrix {
 public:
  explicit SampleMatrix(Matrix data);
  static SampleMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    return SampleMatrix(Matrix::from_rows(rows));
  }

  std::size_t n() const noexcept { return data_.rows(); }
  std::size_t d() const noexcept { return data_.cols(); }
  std::span<const double> row(std::size_t i) const noexcept { return data_.row(i); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_(i, j); }
  const Matrix& matrix() const noexcept { return data_; }

  /// Rows of `first` followed by rows of `second`.
  static SampleMatrix concat(const SampleMatrix& first, const SampleMatrix& second);
  /// Columns [first_col, first_col + width).
  SampleMatrix columns(std::size_t first_col, std::size_t width) const;
  SampleMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  Matrix data_;
};

}  // namespace gkt
