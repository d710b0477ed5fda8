#ifndef DASML_DATASET_HPP_
#define DASML_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <vector>

#include "dasml/core_math.hpp"
#include "dasml/rng.hpp"

namespace dasml {

struct LabeledPoint {
  Vector features;
  std::size_t label = 0;

  bool operator==(const LabeledPoint&) const = default;
};

/// Labeled points with a class-disjoint train/test split. Labels are dense
/// in [0, num_classes()); the first ceil(C/2) labels are train classes and
/// the rest are test classes.
struct Dataset {
  std::vector<LabeledPoint> points;
  std::map<std::size_t, std::vector<std::size_t>> class_index;
  std::vector<std::size_t> train_classes;
  std::vector<std::size_t> test_classes;

  /// Builds class_index and the split from points. Labels must already be
  /// dense; throws InvalidConfig otherwise.
  static Dataset from_points(std::vector<LabeledPoint> points);

  std::size_t size() const { return points.size(); }
  std::size_t num_classes() const { return class_index.size(); }
  std::size_t dim() const {
    return points.empty() ? 0 : points.front().features.size();
  }

  /// Features and labels of every point whose class is in `classes`, in
  /// dataset order.
  Matrix features_of(const std::vector<std::size_t>& classes) const;
  std::vector<std::size_t> labels_of(const std::vector<std::size_t>& classes) const;

  bool operator==(const Dataset&) const = default;
};

struct GaussianSpec {
  std::size_t classes = 16;
  std::size_t per_class = 64;
  std::size_t dim = 32;
  double center_scale = 1.0;
  double noise_sigma = 1.0;
};

/// Isotropic Gaussian blobs around centers drawn uniformly from
/// [-center_scale, center_scale]^dim. Points are emitted class by class.
Dataset generate_gaussian_clusters(const GaussianSpec& spec, SeededRng& rng);

struct CsvOptions {
  std::size_t label_column = 0;
  bool header = false;
};

/// Comma-separated reals with one integer label column. Labels are
/// re-indexed densely in ascending order of their original value.
Dataset parse_csv(std::istream& in, const CsvOptions& options);
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Writes features followed by the label as the last column, using the
/// shortest round-trip representation of each real.
void write_csv(const Dataset& data, std::ostream& out);
void save_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace dasml

#endif  // DASML_DATASET_HPP_
