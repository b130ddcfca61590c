#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dii/error.hpp"

namespace dii {

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_{rows}, cols_{cols}, data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// N points by D features, every entry finite, N >= 2, D >= 1.
class DataMatrix {
 public:
  DataMatrix() = default;

  DataMatrix(std::size_t n_points, std::size_t n_features, std::vector<double> values)
      : values_{n_points, n_features} {
    if (n_points < 2) throw InputError("data matrix needs at least 2 points");
    if (n_features < 1) throw InputError("data matrix needs at least 1 feature");
    if (values.size() != n_points * n_features)
      throw InputError("data matrix: value count does not match shape");
    for (std::size_t i = 0; i < n_points; ++i) {
      for (std::size_t a = 0; a < n_features; ++a) {
        const double v = values[i * n_features + a];
        if (!std::isfinite(v))
          throw InputError("data matrix: non-finite value at row " + std::to_string(i) +
                           ", column " + std::to_string(a));
        values_(i, a) = v;
      }
    }
  }

  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InputError("data matrix needs at least 2 points");
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (const auto& r : rows) {
      if (r.size() != d) throw InputError("data matrix: ragged rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return DataMatrix{rows.size(), d, std::move(flat)};
  }

  std::size_t n_points() const noexcept { return values_.rows(); }
  std::size_t n_features() const noexcept { return values_.cols(); }

  double operator()(std::size_t i, std::size_t a) const noexcept { return values_(i, a); }
  std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
  const Matrix<double>& values() const noexcept { return values_; }

  std::vector<double> column(std::size_t a) const {
    std::vector<double> out(n_points());
    for (std::size_t i = 0; i < n_points(); ++i) out[i] = values_(i, a);
    return out;
  }

  DataMatrix select_rows(std::span<const std::size_t> ids) const {
    std::vector<double> flat;
    flat.reserve(ids.size() * n_features());
    for (auto i : ids) {
      if (i >= n_points()) throw InputError("row index out of range");
      auto r = row(i);
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return DataMatrix{ids.size(), n_features(), std::move(flat)};
  }

  DataMatrix select_columns(std::span<const std::size_t> cols) const {
    std::vector<double> flat;
    flat.reserve(n_points() * cols.size());
    for (std::size_t i = 0; i < n_points(); ++i) {
      for (auto a : cols) {
        if (a >= n_features()) throw InputError("column index out of range");
        flat.push_back(values_(i, a));
      }
    }
    return DataMatrix{n_points(), cols.size(), std::move(flat)};
  }

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  Matrix<double> values_;
};

/// Nonnegative per-feature scales of the weighted Euclidean metric.
/// A zero weight removes the feature from the metric.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> w) : w_{std::move(w)} {
    for (std::size_t a = 0; a < w_.size(); ++a) {
      if (!std::isfinite(w_[a]) || w_[a] < 0.0)
        throw InputError("weight " + std::to_string(a) + " must be finite and nonnegative");
    }
  }
  WeightVector(std::initializer_list<double> w) : WeightVector(std::vector<double>(w)) {}

  static WeightVector constant(std::size_t d, double value) {
    return WeightVector(std::vector<double>(d, value));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t a) const noexcept { return w_[a]; }
  std::span<const double> values() const noexcept { return w_; }
  const std::vector<double>& vector() const noexcept { return w_; }

  std::size_t n_nonzero() const noexcept {
    return static_cast<std::size_t>(std::count_if(w_.begin(), w_.end(), [](double v) { return v > 0.0; }));
  }
  bool all_zero() const noexcept { return n_nonzero() == 0; }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t a = 0; a < w_.size(); ++a)
      if (w_[a] > 0.0) s.push_back(a);
    return s;
  }

  WeightVector scaled(double c) const {
    auto out = w_;
    for (auto& v : out) v *= c;
    return WeightVector(std::move(out));
  }

  WeightVector with_zero(std::size_t a) const {
    auto out = w_;
    out.at(a) = 0.0;
    return WeightVector(std::move(out));
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> w_;
};

/// Identity selection 0..n-1.
inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

/// Weighted distances from a set of anchor rows to every point: an
/// N_rows x N rectangle. Row r belongs to point row_ids[r].
struct DistanceMatrix {
  Matrix<double> d;
  std::vector<std::size_t> row_ids;

  std::size_t n_rows() const noexcept { return d.rows(); }
  std::size_t n_points() const noexcept { return d.cols(); }
};

/// 1-based neighbor ranks per anchor row, self entry stored as 0.
struct RankMatrix {
  Matrix<std::int32_t> r;
  std::vector<std::size_t> row_ids;

  std::size_t n_rows() const noexcept { return r.rows(); }
  std::size_t n_points() const noexcept { return r.cols(); }

  friend bool operator==(const RankMatrix&, const RankMatrix&) = default;
};

/// Row-normalized softmax weights over non-self neighbors, self entry 0.
struct SoftmaxCoefficients {
  Matrix<double> c;
  std::vector<std::size_t> row_ids;
  double lambda = 0.0;

  std::size_t n_rows() const noexcept { return c.rows(); }
  std::size_t n_points() const noexcept { return c.cols(); }
};

}  // namespace dii
