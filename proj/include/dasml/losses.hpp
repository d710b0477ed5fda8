#ifndef DASML_LOSSES_HPP_
#define DASML_LOSSES_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dasml/core_math.hpp"
#include "dasml/sampling.hpp"

namespace dasml {

// All losses return the mean over active (non-zero) terms. A term that is
// inactive contributes neither to the value nor to the normalizer, so adding
// inactive terms leaves the output unchanged. With no active term the value
// and the gradient are zero.
struct LossOutput {
  double value = 0.0;
  Matrix grad;                    // d value / d embedding, one row per input
  std::size_t active_count = 0;
  double grad_beta = 0.0;         // margin loss only: d value / d beta
};

enum class LossKind { contrastive, triplet, margin, multi_similarity };

LossKind parse_loss(std::string_view name);
std::string to_string(LossKind k);

struct MultiSimilarityParams {
  double alpha = 2.0;
  double beta = 50.0;
  double lambda = 1.0;
  double epsilon = 0.1;
};

struct LossSpec {
  LossKind kind = LossKind::triplet;
  double contrastive_margin = 0.5;
  double triplet_margin = 0.2;
  double margin_alpha = 0.2;
  double margin_beta = 1.2;      // initial value of the learnable boundary
  double margin_beta_lr = 0.0;   // <= 0 means "use the optimizer rate"
  MultiSimilarityParams ms;

  void validate() const;
};

/// Positive pairs cost D_ij, negative pairs [alpha - D_ij]_+.
LossOutput contrastive_loss(const Matrix& embeddings, const PairSet& pairs,
                            double alpha);

/// [D_ap - D_an + margin]_+ per triplet.
LossOutput triplet_loss(const Matrix& embeddings, const TripletSet& triplets,
                        double margin);

/// [alpha + y_ij (D_ij - beta)]_+ with y = +1 for positive pairs and -1 for
/// negative pairs. Also reports d value / d beta.
LossOutput margin_loss(const Matrix& embeddings, const PairSet& pairs,
                       double alpha, double beta);

/// Per-anchor pieces of the multi-similarity loss, exposed for inspection.
struct MsAnchorTerms {
  double positive = 0.0;  // (1/alpha) log(1 + sum_p exp(-alpha (S - lambda)))
  double negative = 0.0;  // (1/beta)  log(1 + sum_n exp( beta (S - lambda)))
  std::vector<std::size_t> mined_positives;
  std::vector<std::size_t> mined_negatives;
};

/// Pair mining on cosine similarity S: a positive j is kept when
/// S_ij < max_neg S + epsilon, a negative when S_ij > min_pos S - epsilon.
/// Anchors without a positive or without a negative in the batch yield empty
/// sets.
std::vector<MsAnchorTerms> multi_similarity_terms(const Matrix& embeddings,
                                                  std::span<const std::size_t> labels,
                                                  const MultiSimilarityParams& p);

LossOutput multi_similarity_loss(const Matrix& embeddings,
                                 std::span<const std::size_t> labels,
                                 const MultiSimilarityParams& p);

}  // namespace dasml

#endif  // DASML_LOSSES_HPP_
