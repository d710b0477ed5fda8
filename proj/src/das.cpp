#include "dasml/das.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace dasml {

void DasConfig::validate(std::size_t embedding_dim) const {
  if (top_k < 1 || top_k > embedding_dim) {
    throw InvalidConfig("das.K must be in [1, " + std::to_string(embedding_dim) + "]");
  }
  if (bank_capacity < 1) throw InvalidConfig("das.Z must be >= 1");
  if (!(scale_radius >= 0.0 && scale_radius < 1.0)) {
    throw InvalidConfig("das.rs must be in [0, 1)");
  }
  if (!(shift_ratio >= 0.0) || !std::isfinite(shift_ratio)) {
    throw InvalidConfig("das.rb must be >= 0");
  }
}

FrequencyRecorder::FrequencyRecorder(std::size_t classes, std::size_t dim)
    : classes_(classes), dim_(dim), counts_(classes * dim, 0) {}

void FrequencyRecorder::record(std::span<const double> embedding, std::size_t label,
                               std::size_t top_k) {
  if (label >= classes_) {
    throw LabelOutOfRange("label " + std::to_string(label) + " >= " +
                          std::to_string(classes_) + " classes");
  }
  if (embedding.size() != dim_) throw ShapeMismatch("embedding width != recorder dim");
  for (std::size_t k : top_k_indices(embedding, top_k)) ++counts_[label * dim_ + k];
}

void FrequencyRecorder::record(const Matrix& embeddings,
                               std::span<const std::size_t> labels, std::size_t top_k) {
  if (labels.size() != embeddings.rows()) throw ShapeMismatch("labels/embeddings length");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    record(embeddings.row(i), labels[i], top_k);
  }
}

std::span<const std::uint64_t> FrequencyRecorder::row(std::size_t label) const {
  if (label >= classes_) throw LabelOutOfRange("label out of range");
  return {counts_.data() + label * dim_, dim_};
}

ChannelMask compute_mask(const FrequencyRecorder& frm, std::size_t top_k) {
  ChannelMask mask(frm.classes(), frm.dim());
  for (std::size_t c = 0; c < frm.classes(); ++c) {
    auto bits = mask.row(c);
    for (std::size_t k : top_k_indices(frm.row(c), top_k)) bits[k] = 1;
  }
  return mask;
}

Vector scaling_from_gamma(std::span<const std::uint8_t> mask_row,
                          std::span<const double> gamma) {
  if (mask_row.size() != gamma.size()) throw ShapeMismatch("mask/gamma length");
  Vector s(gamma.size(), 1.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (mask_row[k]) s[k] = gamma[k];
  }
  return s;
}

Vector scaling_factor(std::span<const std::uint8_t> mask_row, double scale_radius,
                      SeededRng& rng) {
  Vector gamma(mask_row.size());
  for (auto& g : gamma) g = rng.uniform(1.0 - scale_radius, 1.0 + scale_radius);
  return scaling_from_gamma(mask_row, gamma);
}

TransformationBank::TransformationBank(std::size_t classes, std::size_t capacity,
                                       std::size_t dim)
    : classes_(classes),
      capacity_(capacity),
      dim_(dim),
      slots_(classes * capacity * dim, 0.0),
      cursor_(classes, 0),
      filled_(classes, 0) {
  if (capacity == 0) throw InvalidConfig("bank capacity must be >= 1");
}

void TransformationBank::check_label(std::size_t label) const {
  if (label >= classes_) {
    throw LabelOutOfRange("label " + std::to_string(label) + " >= " +
                          std::to_string(classes_) + " classes");
  }
}

std::span<const double> TransformationBank::slot(std::size_t label, std::size_t z) const {
  check_label(label);
  return {slots_.data() + (label * capacity_ + z) * dim_, dim_};
}

void TransformationBank::enqueue(std::size_t label, std::span<const double> transform) {
  check_label(label);
  if (transform.size() != dim_) throw ShapeMismatch("transform width != bank dim");
  double* dst = slots_.data() + (label * capacity_ + cursor_[label]) * dim_;
  std::copy(transform.begin(), transform.end(), dst);
  cursor_[label] = (cursor_[label] + 1) % capacity_;
  filled_[label] = std::min(filled_[label] + 1, capacity_);
}

void TransformationBank::update(const Matrix& embeddings,
                                std::span<const std::size_t> labels) {
  for (std::size_t l : labels) check_label(l);
  for (const auto& t : intra_class_transforms(embeddings, labels)) {
    enqueue(t.label, t.transform);
  }
}

std::vector<ClassTransform> intra_class_transforms(const Matrix& embeddings,
                                                   std::span<const std::size_t> labels) {
  if (labels.size() != embeddings.rows()) throw ShapeMismatch("labels/embeddings length");
  std::vector<std::size_t> order;  // labels by first appearance
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(order.begin(), order.end(), labels[i]);
    if (it == order.end()) {
      order.push_back(labels[i]);
      groups.push_back({i});
    } else {
      groups[static_cast<std::size_t>(it - order.begin())].push_back(i);
    }
  }
  std::vector<ClassTransform> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    if (members.size() < 2) continue;
    for (std::size_t i : members) {
      for (std::size_t j : members) {
        if (i == j) continue;
        auto vi = embeddings.row(i);
        auto vj = embeddings.row(j);
        Vector t(vi.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = vi[k] - vj[k];
        out.push_back({order[g], std::move(t)});
      }
    }
  }
  return out;
}

std::optional<std::size_t> TransformationBank::sample_slot(std::size_t label,
                                                           SeededRng& rng) const {
  check_label(label);
  if (filled_[label] == 0) return std::nullopt;
  return rng.uniform_index(filled_[label]);
}

Vector shifting_factor(const TransformationBank& bank, std::size_t label,
                       double shift_ratio, SeededRng& rng) {
  Vector b(bank.dim(), 0.0);
  const auto z = bank.sample_slot(label, rng);
  if (!z) return b;
  auto t = bank.slot(label, *z);
  for (std::size_t k = 0; k < b.size(); ++k) b[k] = shift_ratio * t[k];
  return b;
}

std::optional<ProducedEmbedding> produce_embedding(std::span<const double> anchor,
                                                   std::size_t label,
                                                   std::size_t source, Vector scale,
                                                   Vector shift) {
  if (scale.size() != anchor.size() || shift.size() != anchor.size()) {
    throw ShapeMismatch("scale/shift width differs from anchor");
  }
  Vector u(anchor.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = scale[k] * anchor[k] + shift[k];
  const double norm = l2_norm(u);
  if (!(norm > kNormEpsilon)) return std::nullopt;
  for (auto& x : u) x /= norm;
  return ProducedEmbedding{std::move(u), label, source, std::move(scale),
                           std::move(shift), norm};
}

std::vector<ProducedEmbedding> das_produce(std::span<const double> anchor,
                                           std::size_t label, std::size_t source,
                                           const ChannelMask* mask,
                                           const TransformationBank& bank,
                                           const DasConfig& config, SeededRng& rng,
                                           std::size_t* dropped) {
  std::vector<ProducedEmbedding> out;
  out.reserve(config.produce_per_anchor);
  for (std::size_t t = 0; t < config.produce_per_anchor; ++t) {
    Vector s = config.use_scaling && mask
                   ? scaling_factor(mask->row(label), config.scale_radius, rng)
                   : Vector(anchor.size(), 1.0);
    Vector b = config.use_shifting
                   ? shifting_factor(bank, label, config.shift_ratio, rng)
                   : Vector(anchor.size(), 0.0);
    auto produced = produce_embedding(anchor, label, source, std::move(s), std::move(b));
    if (produced) {
      out.push_back(std::move(*produced));
    } else {
      if (dropped) ++*dropped;
      std::cerr << "warning: dropped degenerate produced embedding for anchor "
                << source << "\n";
    }
  }
  return out;
}

Vector das_backward(const ProducedEmbedding& produced, std::span<const double> grad) {
  const auto& v = produced.value;
  if (grad.size() != v.size()) throw ShapeMismatch("gradient width != embedding width");
  const double proj = dot(v, grad);
  Vector g(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    g[k] = produced.scale[k] * (grad[k] - v[k] * proj) / produced.prenorm_norm;
  }
  return g;
}

}  // namespace dasml
