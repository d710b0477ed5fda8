#include "dasml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace dasml {

std::map<std::size_t, double> recall_at_k(const Matrix& embeddings,
                                          std::span<const std::size_t> labels,
                                          std::span<const std::size_t> ks) {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw LengthMismatch("labels do not match embeddings");
  if (n < 2) throw KTooLarge("recall needs at least 2 points");
  std::size_t k_max = 0;
  for (std::size_t k : ks) {
    if (k < 1 || k >= n) {
      throw KTooLarge("recall k=" + std::to_string(k) + " needs 1 <= k < " +
                      std::to_string(n));
    }
    k_max = std::max(k_max, k);
  }
  // For each query, the rank of its first same-label neighbour.
  std::vector<std::size_t> first_hit(n, std::numeric_limits<std::size_t>::max());
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(n - 1);
  for (std::size_t q = 0; q < n; ++q) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != q) order.emplace_back(l2_distance(embeddings.row(q), embeddings.row(j)), j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_max),
                      order.end());
    for (std::size_t r = 0; r < k_max; ++r) {
      if (labels[order[r].second] == labels[q]) {
        first_hit[q] = r;
        break;
      }
    }
  }
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    const auto hits = std::count_if(first_hit.begin(), first_hit.end(),
                                    [k](std::size_t r) { return r < k; });
    out[k] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, SeededRng& rng,
                    std::size_t max_iter) {
  const std::size_t n = points.rows();
  if (k < 1 || k > n) {
    throw KTooLarge("k-means with k=" + std::to_string(k) + " on " +
                    std::to_string(n) + " points");
  }
  const std::size_t d = points.cols();

  // k-means++ seeding.
  std::vector<std::size_t> seeds{rng.uniform_index(n)};
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), points.row(seeds.back())));
      total += nearest[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (u < acc && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (nearest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a seed: take the lowest unused index.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (std::find(seeds.begin(), seeds.end(), i) == seeds.end()) pick = i;
      }
    }
    seeds.push_back(pick);
  }

  KMeansResult res;
  res.centers = Matrix(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(points.row(seeds[c]).begin(), d, res.centers.row(c).begin());
  }
  res.assignment.assign(n, k);  // k marks "unassigned"
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points.row(i), res.centers.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = squared_distance(points.row(i), res.centers.row(c));
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (res.assignment[i] != best) {
        res.assignment[i] = best;
        changed = true;
      }
    }
    ++res.iterations;
    if (!changed) break;
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(res.assignment[i]);
      auto p = points.row(i);
      for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
      ++counts[res.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto dst = res.centers.row(c);
      auto s = sums.row(c);
      for (std::size_t j = 0; j < d; ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
    }
  }
  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.inertia += squared_distance(points.row(i), res.centers.row(res.assignment[i]));
  }
  return res;
}

namespace {

void check_lengths(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("assignment has " + std::to_string(a.size()) +
                         " entries, labels " + std::to_string(b.size()));
  }
}

}  // namespace

double nmi(std::span<const std::size_t> assignment, std::span<const std::size_t> labels) {
  check_lengths(assignment, labels);
  const double n = static_cast<double>(assignment.size());
  if (assignment.empty()) return 0.0;
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> pa, pl;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    joint[{assignment[i], labels[i]}] += 1.0;
    pa[assignment[i]] += 1.0;
    pl[labels[i]] += 1.0;
  }
  auto entropy = [n](const std::map<std::size_t, double>& m) {
    double h = 0.0;
    for (const auto& [key, c] : m) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double ha = entropy(pa);
  const double hl = entropy(pl);
  if (ha <= 0.0 || hl <= 0.0) return 0.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    mi += (c / n) * std::log(c * n / (pa[key.first] * pl[key.second]));
  }
  return std::clamp(mi / std::sqrt(ha * hl), 0.0, 1.0);
}

double f1_score(std::span<const std::size_t> assignment,
                std::span<const std::size_t> labels) {
  check_lengths(assignment, labels);
  auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ca, cl;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    joint[{assignment[i], labels[i]}] += 1.0;
    ca[assignment[i]] += 1.0;
    cl[labels[i]] += 1.0;
  }
  double both = 0.0, same_cluster = 0.0, same_label = 0.0;
  for (const auto& [key, c] : joint) both += pairs(c);
  for (const auto& [key, c] : ca) same_cluster += pairs(c);
  for (const auto& [key, c] : cl) same_label += pairs(c);
  if (same_cluster == 0.0 || same_label == 0.0) return 0.0;
  const double precision = both / same_cluster;
  const double recall = both / same_label;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

EvalReport evaluate_embeddings(const Matrix& embeddings,
                               std::span<const std::size_t> labels,
                               std::span<const std::size_t> ks, SeededRng& rng) {
  EvalReport r;
  r.n_queries = embeddings.rows();
  std::vector<std::size_t> usable;
  for (std::size_t k : ks) {
    if (k >= 1 && k < embeddings.rows()) usable.push_back(k);
  }
  r.recall_at = recall_at_k(embeddings, labels, usable);
  const std::set<std::size_t> distinct(labels.begin(), labels.end());
  const auto clusters = kmeans(embeddings, distinct.size(), rng);
  r.nmi = nmi(clusters.assignment, labels);
  r.f1 = f1_score(clusters.assignment, labels);
  return r;
}

}  // namespace dasml
