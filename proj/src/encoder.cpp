#include "dasml/encoder.hpp"

#include <cmath>

namespace dasml {

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw InvalidConfig("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw InvalidConfig("unknown optimizer '" + std::string(name) + "'");
}

std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::sgd ? "sgd" : "adam";
}

std::size_t EncoderParams::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> EncoderParams::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(layers.front().in);
  for (const auto& l : layers) sizes.push_back(l.out);
  return sizes;
}

void EncoderParams::validate() const {
  if (layers.empty()) throw ShapeMismatch("encoder has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.in == 0 || l.out == 0 || l.weight.size() != l.in * l.out ||
        l.bias.size() != l.out) {
      throw ShapeMismatch("layer " + std::to_string(i) + " has inconsistent shape");
    }
    if (i > 0 && layers[i - 1].out != l.in) {
      throw ShapeMismatch("layer " + std::to_string(i) + " does not chain");
    }
    for (double w : l.weight) {
      if (!std::isfinite(w)) throw InvalidConfig("non-finite weight");
    }
    for (double b : l.bias) {
      if (!std::isfinite(b)) throw InvalidConfig("non-finite bias");
    }
  }
}

EncoderParams make_encoder(const std::vector<std::size_t>& sizes,
                           Activation activation, SeededRng& rng) {
  if (sizes.size() < 2) {
    throw InvalidConfig("encoder needs at least input and output sizes");
  }
  EncoderParams p;
  p.activation = activation;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    if (sizes[i] == 0 || sizes[i + 1] == 0) {
      throw InvalidConfig("encoder layer sizes must be positive");
    }
    DenseLayer l{sizes[i], sizes[i + 1], Vector(sizes[i] * sizes[i + 1]),
                 Vector(sizes[i + 1], 0.0)};
    const double limit =
        std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    for (auto& w : l.weight) w = rng.uniform(-limit, limit);
    p.layers.push_back(std::move(l));
  }
  return p;
}

EncoderParams zeros_like(const EncoderParams& like) {
  EncoderParams z = like;
  for (auto& l : z.layers) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  return z;
}

Vector flatten(const EncoderParams& params) {
  Vector flat;
  flat.reserve(params.param_count());
  for (const auto& l : params.layers) {
    flat.insert(flat.end(), l.weight.begin(), l.weight.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void unflatten(std::span<const double> flat, EncoderParams& params) {
  if (flat.size() != params.param_count()) {
    throw ShapeMismatch("flat parameter vector has " +
                        std::to_string(flat.size()) + " entries, expected " +
                        std::to_string(params.param_count()));
  }
  std::size_t at = 0;
  for (auto& l : params.layers) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), l.weight.size(),
                l.weight.begin());
    at += l.weight.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), l.bias.size(),
                l.bias.begin());
    at += l.bias.size();
  }
}

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double pre) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

}  // namespace

std::pair<Matrix, ForwardTape> encode(const EncoderParams& params,
                                      const Matrix& inputs) {
  if (params.layers.empty()) throw ShapeMismatch("encoder has no layers");
  if (inputs.rows() == 0) throw ShapeMismatch("encode: empty batch");
  if (inputs.cols() != params.input_dim()) {
    throw ShapeMismatch("encode: input width " + std::to_string(inputs.cols()) +
                        " != encoder input dim " +
                        std::to_string(params.input_dim()));
  }
  ForwardTape tape;
  const std::size_t n = inputs.rows();
  Matrix x = inputs;
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& l = params.layers[li];
    Matrix pre(n, l.out);
    for (std::size_t s = 0; s < n; ++s) {
      auto xr = x.row(s);
      for (std::size_t o = 0; o < l.out; ++o) {
        double acc = l.bias[o];
        const double* w = l.weight.data() + o * l.in;
        for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * xr[i];
        pre(s, o) = acc;
      }
    }
    tape.layer_inputs.push_back(std::move(x));
    const bool last = li + 1 == params.layers.size();
    Matrix out = pre;
    if (!last) {
      for (auto& v : out.data()) v = activate(params.activation, v);
    }
    tape.pre_activation.push_back(std::move(pre));
    x = std::move(out);
  }

  Matrix emb(n, params.output_dim());
  tape.norms.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double norm = l2_norm(x.row(s));
    if (!(norm > kNormEpsilon)) {
      throw ZeroNorm("encoder output " + std::to_string(s) +
                     " has near-zero norm");
    }
    tape.norms[s] = norm;
    auto src = x.row(s);
    auto dst = emb.row(s);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] / norm;
  }
  tape.embeddings = emb;
  return {std::move(emb), std::move(tape)};
}

EncoderGrads backward(const EncoderParams& params, const ForwardTape& tape,
                      const Matrix& grad_wrt_embeddings) {
  const Matrix& emb = tape.embeddings;
  if (tape.layer_inputs.size() != params.layers.size()) {
    throw ShapeMismatch("tape does not match parameter layer count");
  }
  if (grad_wrt_embeddings.rows() != emb.rows() ||
      grad_wrt_embeddings.cols() != emb.cols()) {
    throw ShapeMismatch("gradient batch shape differs from embedding batch");
  }
  const std::size_t n = emb.rows();

  // d/du of u/||u|| applied to g: (g - v <v, g>) / ||u||.
  Matrix g(n, emb.cols());
  for (std::size_t s = 0; s < n; ++s) {
    auto v = emb.row(s);
    auto up = grad_wrt_embeddings.row(s);
    const double proj = dot(v, up);
    auto out = g.row(s);
    for (std::size_t k = 0; k < v.size(); ++k) {
      out[k] = (up[k] - v[k] * proj) / tape.norms[s];
    }
  }

  EncoderGrads grads = zeros_like(params);
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& l = params.layers[li];
    auto& gl = grads.layers[li];
    const bool last = li + 1 == params.layers.size();
    if (!last) {
      const Matrix& pre = tape.pre_activation[li];
      for (std::size_t idx = 0; idx < g.data().size(); ++idx) {
        g.data()[idx] *= activate_grad(params.activation, pre.data()[idx]);
      }
    }
    const Matrix& x = tape.layer_inputs[li];
    Matrix gx(n, l.in);
    for (std::size_t s = 0; s < n; ++s) {
      auto gr = g.row(s);
      auto xr = x.row(s);
      auto gxr = gx.row(s);
      for (std::size_t o = 0; o < l.out; ++o) {
        const double go = gr[o];
        if (go == 0.0) continue;
        gl.bias[o] += go;
        double* gw = gl.weight.data() + o * l.in;
        const double* w = l.weight.data() + o * l.in;
        for (std::size_t i = 0; i < l.in; ++i) {
          gw[i] += go * xr[i];
          gxr[i] += go * w[i];
        }
      }
    }
    g = std::move(gx);
  }
  return grads;
}

OptimizerState make_optimizer(const OptimizerSpec& spec,
                              const EncoderParams& params) {
  if (!(spec.learning_rate > 0.0)) {
    throw InvalidConfig("learning rate must be positive");
  }
  if (spec.momentum < 0.0 || spec.momentum >= 1.0) {
    throw InvalidConfig("momentum must be in [0, 1)");
  }
  OptimizerState st;
  st.spec = spec;
  st.first_moment.assign(params.param_count(), 0.0);
  if (spec.kind == OptimizerKind::adam) {
    st.second_moment.assign(params.param_count(), 0.0);
  }
  return st;
}

void optimizer_step(std::span<double> params, std::span<const double> grads,
                    OptimizerState& state) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.first_moment.size() != n ||
      (state.spec.kind == OptimizerKind::adam && state.second_moment.size() != n)) {
    throw ShapeMismatch("optimizer_step: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const auto& sp = state.spec;
  if (sp.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < n; ++i) {
      if (sp.momentum > 0.0) {
        state.first_moment[i] = sp.momentum * state.first_moment[i] + grads[i];
        params[i] -= sp.learning_rate * state.first_moment[i];
      } else {
        params[i] -= sp.learning_rate * grads[i];
      }
    }
    return;
  }
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(sp.beta1, t);
  const double c2 = 1.0 - std::pow(sp.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = sp.beta1 * m + (1.0 - sp.beta1) * grads[i];
    v = sp.beta2 * v + (1.0 - sp.beta2) * grads[i] * grads[i];
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] -= sp.learning_rate * m_hat / (std::sqrt(v_hat) + sp.epsilon);
  }
}

void optimizer_step(EncoderParams& params, const EncoderGrads& grads,
                    OptimizerState& state) {
  if (grads.param_count() != params.param_count() ||
      grads.layer_sizes() != params.layer_sizes()) {
    throw ShapeMismatch("optimizer_step: gradient layout differs from parameters");
  }
  Vector flat = flatten(params);
  const Vector g = flatten(grads);
  optimizer_step(flat, g, state);
  unflatten(flat, params);
}

}  // namespace dasml
