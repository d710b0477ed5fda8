#ifndef DASML_SAMPLING_HPP_
#define DASML_SAMPLING_HPP_

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dasml/core_math.hpp"
#include "dasml/dataset.hpp"
#include "dasml/rng.hpp"

namespace dasml {

struct BatchSpec {
  std::size_t classes = 8;  // P
  std::size_t samples = 2;  // M, at least two so every class yields a pair

  void validate() const;
};

/// P distinct train classes, M points each, class-contiguous. A class with
/// fewer than M points is drawn with replacement, otherwise without.
std::vector<LabeledPoint> sample_batch(const Dataset& data, const BatchSpec& spec,
                                       SeededRng& rng);

struct Triplet {
  std::size_t anchor;
  std::size_t positive;
  std::size_t negative;

  bool operator==(const Triplet&) const = default;
};

struct Pair {
  std::size_t first;
  std::size_t second;
  bool positive;

  bool operator==(const Pair&) const = default;
};

using TripletSet = std::vector<Triplet>;
using PairSet = std::vector<Pair>;

enum class SamplerKind { random, semihard, softhard, distance };

SamplerKind parse_sampler(std::string_view name);
std::string to_string(SamplerKind k);

/// Samplers only see distances and labels. Indices at or beyond
/// `anchor_limit` may appear as positives or negatives but never as anchors.
inline constexpr std::size_t kAllAnchors = std::numeric_limits<std::size_t>::max();

/// `count` triplets: uniform anchor among those with a positive and a
/// negative, uniform positive != anchor with the same label, uniform negative.
/// Throws NoValidTriplet when no anchor qualifies.
TripletSet sample_random_triplets(std::span<const std::size_t> labels,
                                  std::size_t count, SeededRng& rng,
                                  std::size_t anchor_limit = kAllAnchors);

/// Which rule picked a semi-hard negative.
enum class SemihardTier { window, beyond_window, least_violating };

struct SemihardChoice {
  std::size_t negative;
  SemihardTier tier;
};

/// Negative for one (anchor, positive) pair:
///   1. uniform over {n : D(a,p) < D(a,n) < D(a,p) + margin};
///   2. else the closest n with D(a,n) >= D(a,p);
///   3. else (every negative closer than the positive) the farthest negative.
/// Ties in 2 and 3 go to the lower index. Requires at least one negative.
SemihardChoice choose_semihard_negative(const Matrix& distances,
                                        std::span<const std::size_t> labels,
                                        std::size_t anchor, std::size_t positive,
                                        double margin, SeededRng& rng);

/// One triplet per ordered (anchor, positive) pair with a semi-hard negative.
TripletSet sample_semihard_triplets(const Matrix& distances,
                                    std::span<const std::size_t> labels,
                                    double margin, SeededRng& rng,
                                    std::size_t anchor_limit = kAllAnchors);

/// Normalized sampling probabilities proportional to 1 / q(max(d, clip)) with
/// q(d) = d^(dim-2) * (1 - d^2/4)^((dim-3)/2), the density of distances
/// between uniform points on the unit sphere in R^dim. The factor
/// 1 - d^2/4 is floored at 1e-8 so weights stay finite near d = 2.
Vector distance_weights(std::span<const double> distances, std::size_t dim,
                        double clip = 0.5);

/// One triplet per ordered (anchor, positive) pair, negative drawn with
/// distance_weights over the anchor's negatives.
TripletSet sample_distance_weighted(const Matrix& distances,
                                    std::span<const std::size_t> labels,
                                    std::size_t embedding_dim, SeededRng& rng,
                                    double clip = 0.5,
                                    std::size_t anchor_limit = kAllAnchors);

struct HardSets {
  std::vector<std::size_t> positives;  // farther than the nearest negative
  std::vector<std::size_t> negatives;  // closer than the farthest positive
};

HardSets softhard_sets(const Matrix& distances, std::span<const std::size_t> labels,
                       std::size_t anchor);

/// One triplet per anchor: uniform hard positive and uniform hard negative,
/// each falling back to the uniform choice when its hard set is empty.
TripletSet sample_softhard_triplets(const Matrix& distances,
                                    std::span<const std::size_t> labels,
                                    SeededRng& rng,
                                    std::size_t anchor_limit = kAllAnchors);

/// All unordered pairs i < j.
PairSet build_pairs(std::span<const std::size_t> labels);

/// (anchor, positive, +) and (anchor, negative, -) for each triplet.
PairSet pairs_from_triplets(const TripletSet& triplets);

/// Throws NoValidTriplet if any triplet breaks the label or range rules.
void check_triplets(const TripletSet& triplets, std::span<const std::size_t> labels);

}  // namespace dasml

#endif  // DASML_SAMPLING_HPP_
