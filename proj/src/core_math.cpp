#include "dasml/core_math.hpp"

#include <cmath>
#include <string>

namespace dasml {

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  Matrix m;
  for (const auto& r : rows) m.append_row(r);
  return m;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw DimensionMismatch("row of length " + std::to_string(values.size()) +
                            " appended to matrix with " +
                            std::to_string(cols_) + " columns");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("distance: length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

Vector l2_normalize(std::span<const double> v) {
  const double norm = l2_norm(v);
  if (!(norm > kNormEpsilon)) {
    throw ZeroNorm("cannot normalize vector with norm " + std::to_string(norm));
  }
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

Matrix pairwise_distances(const Matrix& rows) {
  const std::size_t n = rows.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = l2_distance(rows.row(i), rows.row(j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Matrix pairwise_distances(const std::vector<Vector>& rows) {
  return pairwise_distances(Matrix::from_rows(rows));
}

}  // namespace dasml
