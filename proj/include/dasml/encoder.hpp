#ifndef DASML_ENCODER_HPP_
#define DASML_ENCODER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dasml/core_math.hpp"
#include "dasml/rng.hpp"

namespace dasml {

enum class Activation { identity, relu, tanh };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);

/// Fully connected layer, y = W x + b with W stored row-major (out x in).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Vector weight;
  Vector bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Feed-forward embedding network. The activation is applied after every
/// layer except the last; the last layer's output is l2-normalized.
struct EncoderParams {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::relu;

  std::size_t input_dim() const { return layers.front().in; }
  std::size_t output_dim() const { return layers.back().out; }
  std::size_t param_count() const;
  std::vector<std::size_t> layer_sizes() const;

  /// Throws ShapeMismatch if consecutive layers do not chain or a buffer
  /// has the wrong length, InvalidConfig on non-finite values.
  void validate() const;

  bool operator==(const EncoderParams&) const = default;
};

/// Same layout as the parameters they differentiate.
using EncoderGrads = EncoderParams;

/// Glorot-uniform weights, zero biases. sizes = {d_in, hidden..., d}.
EncoderParams make_encoder(const std::vector<std::size_t>& sizes,
                           Activation activation, SeededRng& rng);

/// Zero-filled parameters with the same layout as `like`.
EncoderParams zeros_like(const EncoderParams& like);

/// Flat view in layer order: weight (row-major) then bias, per layer.
Vector flatten(const EncoderParams& params);
void unflatten(std::span<const double> flat, EncoderParams& params);

struct ForwardTape {
  std::vector<Matrix> layer_inputs;   // input fed to each layer
  std::vector<Matrix> pre_activation; // W x + b of each layer
  Vector norms;                       // ||raw output|| per sample
  Matrix embeddings;                  // normalized outputs
};

/// Runs the network on a batch (one input per row). Throws ZeroNorm if
/// some output cannot be normalized, ShapeMismatch on bad input width.
std::pair<Matrix, ForwardTape> encode(const EncoderParams& params,
                                      const Matrix& inputs);

/// Reverse-mode gradient of sum_i <grad_i, embedding_i> with respect to all
/// parameters, through the final normalization.
EncoderGrads backward(const EncoderParams& params, const ForwardTape& tape,
                      const Matrix& grad_wrt_embeddings);

enum class OptimizerKind { sgd, adam };

OptimizerKind parse_optimizer(std::string_view name);
std::string to_string(OptimizerKind k);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double momentum = 0.0;  // sgd only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const OptimizerSpec&) const = default;
};

/// Moment buffers are flat, in flatten() order.
struct OptimizerState {
  OptimizerSpec spec;
  Vector first_moment;   // sgd velocity or adam m
  Vector second_moment;  // adam v; empty for sgd
  std::uint64_t step = 0;

  bool operator==(const OptimizerState&) const = default;
};

OptimizerState make_optimizer(const OptimizerSpec& spec,
                              const EncoderParams& params);

/// One update in place. SGD: velocity = momentum * velocity + g,
/// theta -= lr * velocity. Adam: bias-corrected moments.
void optimizer_step(EncoderParams& params, const EncoderGrads& grads,
                    OptimizerState& state);

/// The same rule applied to a flat parameter vector.
void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state);

}  // namespace dasml

#endif  // DASML_ENCODER_HPP_
