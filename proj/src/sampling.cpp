#include "dasml/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace dasml {

void BatchSpec::validate() const {
  if (classes < 2) throw InvalidConfig("batch needs at least 2 classes (P)");
  if (samples < 2) throw InvalidConfig("batch needs at least 2 samples per class (M)");
}

SamplerKind parse_sampler(std::string_view name) {
  if (name == "random") return SamplerKind::random;
  if (name == "semihard") return SamplerKind::semihard;
  if (name == "softhard") return SamplerKind::softhard;
  if (name == "distance") return SamplerKind::distance;
  throw InvalidConfig("unknown sampler '" + std::string(name) + "'");
}

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::random: return "random";
    case SamplerKind::semihard: return "semihard";
    case SamplerKind::softhard: return "softhard";
    case SamplerKind::distance: return "distance";
  }
  return "?";
}

namespace {

// First `k` entries of a partial Fisher-Yates shuffle.
template <typename T>
std::vector<T> choose_without_replacement(std::vector<T> pool, std::size_t k,
                                          SeededRng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

void check_square(const Matrix& d, std::span<const std::size_t> labels) {
  if (d.rows() != d.cols() || d.rows() != labels.size()) {
    throw ShapeMismatch("distance matrix is " + std::to_string(d.rows()) + "x" +
                        std::to_string(d.cols()) + " for " +
                        std::to_string(labels.size()) + " labels");
  }
}

std::size_t anchor_end(std::size_t n, std::size_t anchor_limit) {
  return std::min(n, anchor_limit);
}

}  // namespace

std::vector<LabeledPoint> sample_batch(const Dataset& data, const BatchSpec& spec,
                                       SeededRng& rng) {
  spec.validate();
  if (data.train_classes.size() < spec.classes) {
    throw NotEnoughClasses("batch wants " + std::to_string(spec.classes) +
                           " classes, dataset has " +
                           std::to_string(data.train_classes.size()) +
                           " train classes");
  }
  const auto classes = choose_without_replacement(data.train_classes, spec.classes, rng);
  std::vector<LabeledPoint> batch;
  batch.reserve(spec.classes * spec.samples);
  for (std::size_t c : classes) {
    const auto& members = data.class_index.at(c);
    std::vector<std::size_t> picked;
    if (members.size() >= spec.samples) {
      picked = choose_without_replacement(members, spec.samples, rng);
    } else {
      for (std::size_t i = 0; i < spec.samples; ++i) {
        picked.push_back(members[rng.uniform_index(members.size())]);
      }
    }
    for (std::size_t idx : picked) batch.push_back(data.points[idx]);
  }
  return batch;
}

TripletSet sample_random_triplets(std::span<const std::size_t> labels,
                                  std::size_t count, SeededRng& rng,
                                  std::size_t anchor_limit) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> anchors;
  for (std::size_t a = 0; a < anchor_end(n, anchor_limit); ++a) {
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      (labels[j] == labels[a] ? has_pos : has_neg) = true;
    }
    if (has_pos && has_neg) anchors.push_back(a);
  }
  if (anchors.empty()) {
    throw NoValidTriplet("no anchor has both a positive and a negative");
  }
  TripletSet out;
  out.reserve(count);
  std::vector<std::size_t> pos, neg;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t a = anchors[rng.uniform_index(anchors.size())];
    pos.clear();
    neg.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      (labels[j] == labels[a] ? pos : neg).push_back(j);
    }
    const std::size_t p = pos[rng.uniform_index(pos.size())];
    const std::size_t ng = neg[rng.uniform_index(neg.size())];
    out.push_back({a, p, ng});
  }
  return out;
}

SemihardChoice choose_semihard_negative(const Matrix& distances,
                                        std::span<const std::size_t> labels,
                                        std::size_t anchor, std::size_t positive,
                                        double margin, SeededRng& rng) {
  check_square(distances, labels);
  const double d_ap = distances(anchor, positive);
  std::vector<std::size_t> window;
  std::size_t beyond = kAllAnchors;
  std::size_t farthest = kAllAnchors;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] == labels[anchor]) continue;
    const double d_an = distances(anchor, n);
    if (d_an > d_ap && d_an < d_ap + margin) window.push_back(n);
    if (d_an >= d_ap && (beyond == kAllAnchors || d_an < distances(anchor, beyond))) {
      beyond = n;
    }
    if (farthest == kAllAnchors || d_an > distances(anchor, farthest)) farthest = n;
  }
  if (farthest == kAllAnchors) {
    throw NoValidTriplet("anchor " + std::to_string(anchor) + " has no negative");
  }
  if (!window.empty()) {
    return {window[rng.uniform_index(window.size())], SemihardTier::window};
  }
  if (beyond != kAllAnchors) return {beyond, SemihardTier::beyond_window};
  return {farthest, SemihardTier::least_violating};
}

TripletSet sample_semihard_triplets(const Matrix& distances,
                                    std::span<const std::size_t> labels,
                                    double margin, SeededRng& rng,
                                    std::size_t anchor_limit) {
  check_square(distances, labels);
  const std::size_t n = labels.size();
  TripletSet out;
  for (std::size_t a = 0; a < anchor_end(n, anchor_limit); ++a) {
    const bool has_neg = std::any_of(labels.begin(), labels.end(),
                                     [&](std::size_t l) { return l != labels[a]; });
    if (!has_neg) continue;
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      out.push_back({a, p, choose_semihard_negative(distances, labels, a, p, margin, rng).negative});
    }
  }
  return out;
}

Vector distance_weights(std::span<const double> distances, std::size_t dim,
                        double clip) {
  if (dim < 2) throw InvalidConfig("distance weighting needs embedding dim >= 2");
  Vector log_w(distances.size());
  const double e = static_cast<double>(dim);
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double d = std::max(distances[i], clip);
    const double tail = std::max(1.0 - 0.25 * d * d, 1e-8);
    // log(1/q(d))
    log_w[i] = -(e - 2.0) * std::log(d) - 0.5 * (e - 3.0) * std::log(tail);
  }
  Vector w(distances.size());
  if (w.empty()) return w;
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_w[i] - top);
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

namespace {

std::size_t draw_categorical(std::span<const double> probs, SeededRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding can leave acc slightly below 1; land on the last positive weight.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

}  // namespace

TripletSet sample_distance_weighted(const Matrix& distances,
                                    std::span<const std::size_t> labels,
                                    std::size_t embedding_dim, SeededRng& rng,
                                    double clip, std::size_t anchor_limit) {
  check_square(distances, labels);
  const std::size_t n = labels.size();
  TripletSet out;
  std::vector<std::size_t> negs;
  Vector d_neg;
  for (std::size_t a = 0; a < anchor_end(n, anchor_limit); ++a) {
    negs.clear();
    d_neg.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j] != labels[a]) {
        negs.push_back(j);
        d_neg.push_back(distances(a, j));
      }
    }
    if (negs.empty()) continue;
    const Vector probs = distance_weights(d_neg, embedding_dim, clip);
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      out.push_back({a, p, negs[draw_categorical(probs, rng)]});
    }
  }
  return out;
}

HardSets softhard_sets(const Matrix& distances, std::span<const std::size_t> labels,
                       std::size_t anchor) {
  check_square(distances, labels);
  double nearest_neg = std::numeric_limits<double>::infinity();
  double farthest_pos = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j == anchor) continue;
    const double d = distances(anchor, j);
    if (labels[j] == labels[anchor]) {
      farthest_pos = std::max(farthest_pos, d);
    } else {
      nearest_neg = std::min(nearest_neg, d);
    }
  }
  HardSets sets;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j == anchor) continue;
    const double d = distances(anchor, j);
    if (labels[j] == labels[anchor]) {
      if (d > nearest_neg) sets.positives.push_back(j);
    } else if (d < farthest_pos) {
      sets.negatives.push_back(j);
    }
  }
  return sets;
}

TripletSet sample_softhard_triplets(const Matrix& distances,
                                    std::span<const std::size_t> labels,
                                    SeededRng& rng, std::size_t anchor_limit) {
  check_square(distances, labels);
  const std::size_t n = labels.size();
  TripletSet out;
  std::vector<std::size_t> all_pos, all_neg;
  for (std::size_t a = 0; a < anchor_end(n, anchor_limit); ++a) {
    all_pos.clear();
    all_neg.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      (labels[j] == labels[a] ? all_pos : all_neg).push_back(j);
    }
    if (all_pos.empty() || all_neg.empty()) continue;
    const HardSets hard = softhard_sets(distances, labels, a);
    const auto& pos = hard.positives.empty() ? all_pos : hard.positives;
    const auto& neg = hard.negatives.empty() ? all_neg : hard.negatives;
    const std::size_t p = pos[rng.uniform_index(pos.size())];
    const std::size_t ng = neg[rng.uniform_index(neg.size())];
    out.push_back({a, p, ng});
  }
  return out;
}

PairSet build_pairs(std::span<const std::size_t> labels) {
  PairSet out;
  out.reserve(labels.size() * (labels.size() - (labels.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      out.push_back({i, j, labels[i] == labels[j]});
    }
  }
  return out;
}

PairSet pairs_from_triplets(const TripletSet& triplets) {
  PairSet out;
  out.reserve(2 * triplets.size());
  for (const auto& t : triplets) {
    out.push_back({t.anchor, t.positive, true});
    out.push_back({t.anchor, t.negative, false});
  }
  return out;
}

void check_triplets(const TripletSet& triplets, std::span<const std::size_t> labels) {
  for (const auto& t : triplets) {
    const std::size_t n = labels.size();
    if (t.anchor >= n || t.positive >= n || t.negative >= n) {
      throw NoValidTriplet("triplet index out of range");
    }
    if (t.anchor == t.positive || labels[t.anchor] != labels[t.positive]) {
      throw NoValidTriplet("positive does not share the anchor's label");
    }
    if (labels[t.anchor] == labels[t.negative]) {
      throw NoValidTriplet("negative shares the anchor's label");
    }
  }
}

}  // namespace dasml
