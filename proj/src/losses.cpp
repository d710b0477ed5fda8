#include "dasml/losses.hpp"

#include <cmath>
#include <limits>

namespace dasml {

namespace {

// Below this separation the distance is treated as non-differentiable and
// its gradient is taken to be zero.
constexpr double kMinDistance = 1e-9;

void check_index(const Matrix& emb, std::size_t i) {
  if (i >= emb.rows()) {
    throw ShapeMismatch("loss term references embedding " + std::to_string(i) +
                        " of " + std::to_string(emb.rows()));
  }
}

// grad[i] += scale * dD_ij/dv_i and grad[j] += scale * dD_ij/dv_j.
void add_distance_grad(const Matrix& emb, std::size_t i, std::size_t j,
                       double dist, double scale, Matrix& grad) {
  if (dist < kMinDistance) return;
  auto vi = emb.row(i);
  auto vj = emb.row(j);
  auto gi = grad.row(i);
  auto gj = grad.row(j);
  for (std::size_t k = 0; k < vi.size(); ++k) {
    const double u = scale * (vi[k] - vj[k]) / dist;
    gi[k] += u;
    gj[k] -= u;
  }
}

void finish(LossOutput& out) {
  if (out.active_count == 0) {
    out.value = 0.0;
    out.grad_beta = 0.0;
    std::fill(out.grad.data().begin(), out.grad.data().end(), 0.0);
    return;
  }
  const double inv = 1.0 / static_cast<double>(out.active_count);
  out.value *= inv;
  out.grad_beta *= inv;
  for (auto& g : out.grad.data()) g *= inv;
}

}  // namespace

LossKind parse_loss(std::string_view name) {
  if (name == "contrastive") return LossKind::contrastive;
  if (name == "triplet") return LossKind::triplet;
  if (name == "margin") return LossKind::margin;
  if (name == "ms" || name == "multi_similarity") return LossKind::multi_similarity;
  throw InvalidConfig("unknown loss '" + std::string(name) + "'");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::contrastive: return "contrastive";
    case LossKind::triplet: return "triplet";
    case LossKind::margin: return "margin";
    case LossKind::multi_similarity: return "ms";
  }
  return "?";
}

void LossSpec::validate() const {
  if (!(contrastive_margin > 0.0) || !(triplet_margin > 0.0) ||
      !(margin_alpha > 0.0)) {
    throw InvalidConfig("loss margins must be positive");
  }
  if (!(margin_beta > 0.0)) throw InvalidConfig("margin loss beta must be positive");
  if (!(ms.alpha > 0.0) || !(ms.beta > 0.0)) {
    throw InvalidConfig("multi-similarity alpha and beta must be positive");
  }
  if (ms.epsilon < 0.0) throw InvalidConfig("multi-similarity epsilon must be >= 0");
}

LossOutput contrastive_loss(const Matrix& embeddings, const PairSet& pairs,
                            double alpha) {
  LossOutput out;
  out.grad = Matrix(embeddings.rows(), embeddings.cols());
  for (const auto& pr : pairs) {
    check_index(embeddings, pr.first);
    check_index(embeddings, pr.second);
    const double d = l2_distance(embeddings.row(pr.first), embeddings.row(pr.second));
    if (pr.positive) {
      if (d <= 0.0) continue;
      out.value += d;
      ++out.active_count;
      add_distance_grad(embeddings, pr.first, pr.second, d, 1.0, out.grad);
    } else {
      const double h = alpha - d;
      if (h <= 0.0) continue;
      out.value += h;
      ++out.active_count;
      add_distance_grad(embeddings, pr.first, pr.second, d, -1.0, out.grad);
    }
  }
  finish(out);
  return out;
}

LossOutput triplet_loss(const Matrix& embeddings, const TripletSet& triplets,
                        double margin) {
  LossOutput out;
  out.grad = Matrix(embeddings.rows(), embeddings.cols());
  for (const auto& t : triplets) {
    check_index(embeddings, t.anchor);
    check_index(embeddings, t.positive);
    check_index(embeddings, t.negative);
    const double d_ap = l2_distance(embeddings.row(t.anchor), embeddings.row(t.positive));
    const double d_an = l2_distance(embeddings.row(t.anchor), embeddings.row(t.negative));
    const double h = d_ap - d_an + margin;
    if (h <= 0.0) continue;
    out.value += h;
    ++out.active_count;
    add_distance_grad(embeddings, t.anchor, t.positive, d_ap, 1.0, out.grad);
    add_distance_grad(embeddings, t.anchor, t.negative, d_an, -1.0, out.grad);
  }
  finish(out);
  return out;
}

LossOutput margin_loss(const Matrix& embeddings, const PairSet& pairs,
                       double alpha, double beta) {
  LossOutput out;
  out.grad = Matrix(embeddings.rows(), embeddings.cols());
  for (const auto& pr : pairs) {
    check_index(embeddings, pr.first);
    check_index(embeddings, pr.second);
    const double d = l2_distance(embeddings.row(pr.first), embeddings.row(pr.second));
    const double y = pr.positive ? 1.0 : -1.0;
    const double h = alpha + y * (d - beta);
    if (h <= 0.0) continue;
    out.value += h;
    ++out.active_count;
    out.grad_beta -= y;
    add_distance_grad(embeddings, pr.first, pr.second, d, y, out.grad);
  }
  finish(out);
  return out;
}

std::vector<MsAnchorTerms> multi_similarity_terms(const Matrix& embeddings,
                                                  std::span<const std::size_t> labels,
                                                  const MultiSimilarityParams& p) {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw ShapeMismatch("labels do not match embedding batch");
  std::vector<MsAnchorTerms> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = dot(embeddings.row(i), embeddings.row(j));
      if (labels[j] == labels[i]) {
        has_pos = true;
        min_pos = std::min(min_pos, s);
      } else {
        has_neg = true;
        max_neg = std::max(max_neg, s);
      }
    }
    if (!has_pos || !has_neg) continue;
    auto& t = terms[i];
    double pos_sum = 0.0;
    double neg_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = dot(embeddings.row(i), embeddings.row(j));
      if (labels[j] == labels[i]) {
        if (s < max_neg + p.epsilon) {
          t.mined_positives.push_back(j);
          pos_sum += std::exp(-p.alpha * (s - p.lambda));
        }
      } else if (s > min_pos - p.epsilon) {
        t.mined_negatives.push_back(j);
        neg_sum += std::exp(p.beta * (s - p.lambda));
      }
    }
    t.positive = std::log1p(pos_sum) / p.alpha;
    t.negative = std::log1p(neg_sum) / p.beta;
  }
  return terms;
}

LossOutput multi_similarity_loss(const Matrix& embeddings,
                                 std::span<const std::size_t> labels,
                                 const MultiSimilarityParams& p) {
  const auto terms = multi_similarity_terms(embeddings, labels, p);
  LossOutput out;
  out.grad = Matrix(embeddings.rows(), embeddings.cols());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (t.mined_positives.empty() && t.mined_negatives.empty()) continue;
    out.value += t.positive + t.negative;
    ++out.active_count;
    auto vi = embeddings.row(i);
    auto gi = out.grad.row(i);

    // dL/dS for each mined similarity, then dS_ij/dv_i = v_j, dS_ij/dv_j = v_i.
    auto scatter = [&](std::size_t j, double coeff) {
      auto vj = embeddings.row(j);
      auto gj = out.grad.row(j);
      for (std::size_t k = 0; k < vi.size(); ++k) {
        gi[k] += coeff * vj[k];
        gj[k] += coeff * vi[k];
      }
    };
    if (!t.mined_positives.empty()) {
      double denom = 1.0;
      std::vector<double> e;
      for (std::size_t j : t.mined_positives) {
        e.push_back(std::exp(-p.alpha * (dot(vi, embeddings.row(j)) - p.lambda)));
        denom += e.back();
      }
      for (std::size_t k = 0; k < e.size(); ++k) scatter(t.mined_positives[k], -e[k] / denom);
    }
    if (!t.mined_negatives.empty()) {
      double denom = 1.0;
      std::vector<double> e;
      for (std::size_t j : t.mined_negatives) {
        e.push_back(std::exp(p.beta * (dot(vi, embeddings.row(j)) - p.lambda)));
        denom += e.back();
      }
      for (std::size_t k = 0; k < e.size(); ++k) scatter(t.mined_negatives[k], e[k] / denom);
    }
  }
  finish(out);
  return out;
}

}  // namespace dasml
