#ifndef DASML_METRICS_HPP_
#define DASML_METRICS_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "dasml/core_math.hpp"
#include "dasml/rng.hpp"

namespace dasml {

/// Leave-one-out retrieval: for each query, the other points ranked by
/// Euclidean distance (ties to the lower index); a hit when one of the k
/// nearest shares the query's label. Throws KTooLarge unless every k is in
/// [1, n).
std::map<std::size_t, double> recall_at_k(const Matrix& embeddings,
                                          std::span<const std::size_t> labels,
                                          std::span<const std::size_t> ks);

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Matrix centers;
  double inertia = 0.0;  // sum of squared distances to assigned centers
  std::size_t iterations = 0;
};

/// Lloyd iterations from k-means++ seeding. Assignment ties go to the lower
/// cluster index; an emptied cluster keeps its previous center. Stops at an
/// assignment fixpoint or after max_iter rounds.
KMeansResult kmeans(const Matrix& points, std::size_t k, SeededRng& rng,
                    std::size_t max_iter = 100);

/// I(A; L) / sqrt(H(A) H(L)) in nats; 0 when either entropy is 0.
double nmi(std::span<const std::size_t> assignment, std::span<const std::size_t> labels);

/// Pairwise F1 between a clustering and the label partition; 0 when a
/// precision or recall denominator is 0.
double f1_score(std::span<const std::size_t> assignment,
                std::span<const std::size_t> labels);

struct EvalReport {
  std::size_t step = 0;
  std::map<std::size_t, double> recall_at;
  double nmi = 0.0;
  double f1 = 0.0;
  std::size_t n_queries = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Recall@k for every k < n, then k-means with one cluster per distinct
/// label for NMI and F1.
EvalReport evaluate_embeddings(const Matrix& embeddings,
                               std::span<const std::size_t> labels,
                               std::span<const std::size_t> ks, SeededRng& rng);

}  // namespace dasml

#endif  // DASML_METRICS_HPP_
