#ifndef DASML_DAS_HPP_
#define DASML_DAS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dasml/core_math.hpp"
#include "dasml/rng.hpp"

namespace dasml {

/// Settings for producing embeddings around anchors. Defaults: (T, K, Z, r_s, r_b) =
/// (3, 4, 10, 0.01, 0.01).
struct DasConfig {
  bool enabled = true;
  std::size_t produce_per_anchor = 3;  // T
  std::size_t top_k = 4;               // K
  std::size_t bank_capacity = 10;      // Z
  double scale_radius = 0.01;          // r_s
  double shift_ratio = 0.01;           // r_b
  bool use_scaling = true;             // false: s = 1 (shifting only)
  bool use_shifting = true;            // false: b = 0 (scaling only)

  /// Throws InvalidConfig unless 1 <= K <= embedding_dim, Z >= 1,
  /// 0 <= r_s < 1 and r_b >= 0.
  void validate(std::size_t embedding_dim) const;
};

/// Per-class counts of how often each channel is among an embedding's top-K
/// activations. Counters only grow.
class FrequencyRecorder {
 public:
  FrequencyRecorder(std::size_t classes, std::size_t dim);

  std::size_t classes() const { return classes_; }
  std::size_t dim() const { return dim_; }

  /// counts[label][k] += 1 for every k in top_k_indices(embedding, K).
  void record(std::span<const double> embedding, std::size_t label, std::size_t top_k);
  void record(const Matrix& embeddings, std::span<const std::size_t> labels,
              std::size_t top_k);

  std::span<const std::uint64_t> row(std::size_t label) const;
  std::uint64_t count(std::size_t label, std::size_t channel) const {
    return counts_[label * dim_ + channel];
  }

 private:
  std::size_t classes_;
  std::size_t dim_;
  std::vector<std::uint64_t> counts_;
};

/// Class-wise binary mask of the K most frequently activated channels.
class ChannelMask {
 public:
  ChannelMask(std::size_t classes, std::size_t dim)
      : classes_(classes), dim_(dim), bits_(classes * dim, 0) {}

  std::size_t classes() const { return classes_; }
  std::size_t dim() const { return dim_; }

  std::span<const std::uint8_t> row(std::size_t label) const {
    return {bits_.data() + label * dim_, dim_};
  }
  std::span<std::uint8_t> row(std::size_t label) {
    return {bits_.data() + label * dim_, dim_};
  }

 private:
  std::size_t classes_;
  std::size_t dim_;
  std::vector<std::uint8_t> bits_;
};

/// Row c has ones exactly at top_k_indices(counts[c], K).
ChannelMask compute_mask(const FrequencyRecorder& frm, std::size_t top_k);

/// s = gamma on masked channels, 1 elsewhere.
Vector scaling_from_gamma(std::span<const std::uint8_t> mask_row,
                          std::span<const double> gamma);

/// Draws gamma ~ Uniform[1 - r_s, 1 + r_s]^d (one draw per channel, masked or
/// not) and applies scaling_from_gamma.
Vector scaling_factor(std::span<const std::uint8_t> mask_row, double scale_radius,
                      SeededRng& rng);

/// Per-class FIFO ring of the last Z intra-class embedding differences.
class TransformationBank {
 public:
  TransformationBank(std::size_t classes, std::size_t capacity, std::size_t dim);

  std::size_t classes() const { return classes_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  std::size_t filled(std::size_t label) const { return filled_.at(label); }
  std::size_t cursor(std::size_t label) const { return cursor_.at(label); }

  std::span<const double> slot(std::size_t label, std::size_t z) const;

  /// Writes t at the class cursor and advances it modulo Z.
  void enqueue(std::size_t label, std::span<const double> transform);

  /// Enqueues intra_class_transforms(embeddings, labels) in order.
  void update(const Matrix& embeddings, std::span<const std::size_t> labels);

  /// Uniform choice among the filled slots; nullopt when the class is empty.
  std::optional<std::size_t> sample_slot(std::size_t label, SeededRng& rng) const;

 private:
  void check_label(std::size_t label) const;

  std::size_t classes_;
  std::size_t capacity_;
  std::size_t dim_;
  std::vector<double> slots_;
  std::vector<std::size_t> cursor_;
  std::vector<std::size_t> filled_;
};

struct ClassTransform {
  std::size_t label;
  Vector transform;
};

/// Groups rows by label (in order of first appearance) and returns v_i - v_j
/// for every ordered pair i != j inside each group, iterating i then j in
/// batch order. Groups with one member contribute nothing.
std::vector<ClassTransform> intra_class_transforms(const Matrix& embeddings,
                                                   std::span<const std::size_t> labels);

/// b = r_b * t for a uniformly chosen stored transform t of the class, or the
/// zero vector when the class has none yet.
Vector shifting_factor(const TransformationBank& bank, std::size_t label,
                       double shift_ratio, SeededRng& rng);

/// An embedding without a data point, v' = normalize(s * v + b). The scale,
/// shift and pre-normalization norm are kept for the backward pass.
struct ProducedEmbedding {
  Vector value;
  std::size_t label = 0;
  std::size_t source = 0;  // row of the anchor in its batch
  Vector scale;
  Vector shift;
  double prenorm_norm = 0.0;
};

/// normalize(scale * anchor + shift); nullopt when the result would have
/// near-zero norm.
std::optional<ProducedEmbedding> produce_embedding(std::span<const double> anchor,
                                                   std::size_t label,
                                                   std::size_t source,
                                                   Vector scale, Vector shift);

/// T produced embeddings for one anchor, each with its own scaling and
/// shifting draw. `mask` may be null when scaling is disabled. Degenerate
/// productions are dropped and counted in *dropped.
std::vector<ProducedEmbedding> das_produce(std::span<const double> anchor,
                                           std::size_t label, std::size_t source,
                                           const ChannelMask* mask,
                                           const TransformationBank& bank,
                                           const DasConfig& config, SeededRng& rng,
                                           std::size_t* dropped = nullptr);

/// Gradient with respect to the anchor given the gradient with respect to the
/// produced embedding; scale and shift are constants.
Vector das_backward(const ProducedEmbedding& produced, std::span<const double> grad);

}  // namespace dasml

#endif  // DASML_DAS_HPP_
