// Slow, obviously-correct reference implementations used to check the
// library. Nothing here calls into the code under test except for types.

#ifndef DASML_TESTS_ORACLES_HPP_
#define DASML_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "dasml/core_math.hpp"

namespace oracle {

using dasml::Matrix;
using dasml::Vector;

inline double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline std::vector<std::vector<double>> distance_loop(const std::vector<Vector>& rows) {
  std::vector<std::vector<double>> d(rows.size(), std::vector<double>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) d[i][j] = distance(rows[i], rows[j]);
  return d;
}

// Full stable sort by value descending; stability keeps lower indices first.
template <typename T>
std::vector<std::size_t> top_k_by_sort(const std::vector<T>& v, std::size_t k) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Streaming counter: one map of (class, channel) -> count.
struct CounterFrm {
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> counts;
  void add(const Vector& v, std::size_t label, std::size_t k) {
    for (std::size_t c : top_k_by_sort(v, k)) ++counts[{label, c}];
  }
  std::uint64_t at(std::size_t label, std::size_t channel) const {
    auto it = counts.find({label, channel});
    return it == counts.end() ? 0 : it->second;
  }
};

// Keeps the last Z items per class, oldest first.
struct BoundedQueueBank {
  std::size_t capacity;
  std::map<std::size_t, std::deque<Vector>> items;
  void push(std::size_t label, const Vector& t) {
    auto& q = items[label];
    q.push_back(t);
    if (q.size() > capacity) q.pop_front();
  }
};

// Loop over every query, fully sorting the others by (distance, index).
inline std::map<std::size_t, double> recall_by_ranking(const std::vector<Vector>& x,
                                                       const std::vector<std::size_t>& labels,
                                                       const std::vector<std::size_t>& ks) {
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < x.size(); ++q) {
      std::vector<std::pair<double, std::size_t>> ranked;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (j != q) ranked.push_back({distance(x[q], x[j]), j});
      std::sort(ranked.begin(), ranked.end());
      bool hit = false;
      for (std::size_t r = 0; r < k; ++r) hit = hit || labels[ranked[r].second] == labels[q];
      hits += hit ? 1 : 0;
    }
    out[k] = static_cast<double>(hits) / static_cast<double>(x.size());
  }
  return out;
}

inline double nmi_contingency(const std::vector<std::size_t>& a, const std::vector<std::size_t>& l) {
  const double n = static_cast<double>(a.size());
  std::map<std::size_t, double> ca, cl;
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cl[l[i]] += 1;
    joint[{a[i], l[i]}] += 1;
  }
  double ha = 0, hl = 0, mi = 0;
  for (auto& [k, c] : ca) ha -= c / n * std::log(c / n);
  for (auto& [k, c] : cl) hl -= c / n * std::log(c / n);
  for (auto& [key, c] : joint)
    mi += c / n * std::log((c / n) / ((ca[key.first] / n) * (cl[key.second] / n)));
  if (ha <= 0 || hl <= 0) return 0.0;
  return mi / std::sqrt(ha * hl);
}

inline double f1_pairs(const std::vector<std::size_t>& a, const std::vector<std::size_t>& l) {
  double both = 0, same_cluster = 0, same_label = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool c = a[i] == a[j];
      const bool y = l[i] == l[j];
      same_cluster += c;
      same_label += y;
      both += c && y;
    }
  if (same_cluster == 0 || same_label == 0) return 0.0;
  const double p = both / same_cluster;
  const double r = both / same_label;
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

// Minimum sum of squared distances to cluster means over every 2-partition.
inline std::pair<double, std::vector<std::size_t>> best_two_partition(const std::vector<Vector>& x) {
  const std::size_t n = x.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_assign;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> assign(n);
    for (std::size_t i = 0; i < n; ++i) assign[i] = (mask >> i) & 1;
    double cost = 0;
    for (std::size_t c = 0; c < 2; ++c) {
      Vector mean(x[0].size(), 0.0);
      double cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (assign[i] == c) {
          for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += x[i][k];
          cnt += 1;
        }
      for (auto& m : mean) m /= cnt;
      for (std::size_t i = 0; i < n; ++i)
        if (assign[i] == c) cost += distance(x[i], mean) * distance(x[i], mean);
    }
    if (cost < best - 1e-12) {
      best = cost;
      best_assign = assign;
    }
  }
  return {best, best_assign};
}

// Same partition regardless of cluster ids.
inline bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

// One Adam step on a scalar, written out longhand.
inline double adam_scalar(double theta, double g, double lr, int t, double& m, double& v) {
  m = 0.9 * m + 0.1 * g;
  v = 0.999 * v + 0.001 * g * g;
  const double mhat = m / (1 - std::pow(0.9, t));
  const double vhat = v / (1 - std::pow(0.999, t));
  return theta - lr * mhat / (std::sqrt(vhat) + 1e-8);
}

// Central differences of f at x.
inline Vector numeric_gradient(const std::function<double(const Vector&)>& f, Vector x,
                               double h = 1e-5) {
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// ||a - n|| / max(||a||, ||n||), 0 when both vanish.
inline double relative_error(const Vector& a, const Vector& n) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  const double scale = std::sqrt(std::max(na, nn));
  if (scale == 0) return 0.0;
  return std::sqrt(diff) / scale;
}

inline Matrix rows_to_matrix(const std::vector<Vector>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
  return m;
}

// Loss values written as plain sums over terms, then averaged over the
// active ones.
inline double triplet_value(const std::vector<Vector>& x,
                            const std::vector<std::array<std::size_t, 3>>& t, double m) {
  double s = 0;
  std::size_t active = 0;
  for (auto& [a, p, n] : t) {
    const double term = distance(x[a], x[p]) - distance(x[a], x[n]) + m;
    if (term > 0) {
      s += term;
      ++active;
    }
  }
  return active ? s / static_cast<double>(active) : 0.0;
}

inline double contrastive_value(const std::vector<Vector>& x,
                                const std::vector<std::tuple<std::size_t, std::size_t, bool>>& pairs,
                                double alpha) {
  double s = 0;
  std::size_t active = 0;
  for (auto& [i, j, pos] : pairs) {
    const double d = distance(x[i], x[j]);
    const double term = pos ? d : std::max(0.0, alpha - d);
    if (term > 0) {
      s += term;
      ++active;
    }
  }
  return active ? s / static_cast<double>(active) : 0.0;
}

inline double margin_value(const std::vector<Vector>& x,
                           const std::vector<std::tuple<std::size_t, std::size_t, bool>>& pairs,
                           double alpha, double beta) {
  double s = 0;
  std::size_t active = 0;
  for (auto& [i, j, pos] : pairs) {
    const double y = pos ? 1.0 : -1.0;
    const double term = std::max(0.0, alpha + y * (distance(x[i], x[j]) - beta));
    if (term > 0) {
      s += term;
      ++active;
    }
  }
  return active ? s / static_cast<double>(active) : 0.0;
}

inline double ms_value(const std::vector<Vector>& x, const std::vector<std::size_t>& y,
                       double alpha, double beta, double lambda, double eps) {
  auto sim = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < x[i].size(); ++k) s += x[i][k] * x[j][k];
    return s;
  };
  double total = 0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> pos, neg;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      (y[j] == y[i] ? pos : neg).push_back(sim(i, j));
    }
    if (pos.empty() || neg.empty()) continue;
    const double min_pos = *std::min_element(pos.begin(), pos.end());
    const double max_neg = *std::max_element(neg.begin(), neg.end());
    double sp = 0, sn = 0;
    std::size_t kept = 0;
    for (double s : pos)
      if (s < max_neg + eps) {
        sp += std::exp(-alpha * (s - lambda));
        ++kept;
      }
    for (double s : neg)
      if (s > min_pos - eps) {
        sn += std::exp(beta * (s - lambda));
        ++kept;
      }
    if (kept == 0) continue;
    total += std::log(1 + sp) / alpha + std::log(1 + sn) / beta;
    ++active;
  }
  return active ? total / static_cast<double>(active) : 0.0;
}

}  // namespace oracle

#endif  // DASML_TESTS_ORACLES_HPP_
