#ifndef DASML_CORE_MATH_HPP_
#define DASML_CORE_MATH_HPP_

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "dasml/errors.hpp"

namespace dasml {

using Vector = std::vector<double>;

/// Norms at or below this are treated as zero.
inline constexpr double kNormEpsilon = 1e-12;

/// Dense row-major matrix. Rows are embeddings, inputs or gradients; a
/// batch of n vectors of length d is an n x d Matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Throws DimensionMismatch on ragged input.
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Vector row_vector(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Appends a row; the first row appended to an empty matrix fixes cols().
  void append_row(std::span<const double> values);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Euclidean distance between two equal-length vectors.
double l2_distance(std::span<const double> a, std::span<const double> b);

/// Projects v onto the unit sphere. Throws ZeroNorm if ||v|| <= kNormEpsilon.
Vector l2_normalize(std::span<const double> v);

/// n x n matrix of Euclidean distances between the rows. The result is
/// exactly symmetric with a zero diagonal.
Matrix pairwise_distances(const Matrix& rows);
Matrix pairwise_distances(const std::vector<Vector>& rows);

/// Indices of the K largest entries, ties broken toward the lower index,
/// returned in ascending index order. Throws KOutOfRange unless 1 <= K <= size.
template <typename T>
std::vector<std::size_t> top_k_indices(std::span<const T> values,
                                       std::size_t k) {
  if (k < 1 || k > values.size()) {
    throw KOutOfRange("top-k: K=" + std::to_string(k) +
                      " outside [1, " + std::to_string(values.size()) + "]");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   order.end(), before);
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

template <typename T>
std::vector<std::size_t> top_k_indices(const std::vector<T>& values,
                                       std::size_t k) {
  return top_k_indices(std::span<const T>(values), k);
}

}  // namespace dasml

#endif  // DASML_CORE_MATH_HPP_
