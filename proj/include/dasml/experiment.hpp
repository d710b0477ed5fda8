#ifndef DASML_EXPERIMENT_HPP_
#define DASML_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dasml/config.hpp"

namespace dasml {

/// A named set of dotted-key overrides applied on top of a base config.
struct Variant {
  std::string name;
  json overrides = json::object();  // {"das.K": 4, ...}
};

struct ComparisonCell {
  std::string variant;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double recall_at_1 = 0.0;
  double nmi = 0.0;
  double f1 = 0.0;
};

struct ComparisonRow {
  std::string variant;
  std::size_t runs = 0;     // successful cells
  std::size_t failed = 0;
  double recall_mean = 0.0, recall_std = 0.0;
  double nmi_mean = 0.0, nmi_std = 0.0;
  double f1_mean = 0.0, f1_std = 0.0;
};

/// Rows follow the variant order; std is the sample standard deviation
/// (0 for a single run).
struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonCell> cells;

  std::string to_csv() const;
  std::string to_text() const;
};

/// baseline / dfs_only / mts_only / both.
std::vector<Variant> ablation_variants();

/// One variant per value of `key`, named "key=value".
std::vector<Variant> sweep_variants(const std::string& key, const std::vector<json>& values);

/// Trains every (variant, seed) cell from `base` with `seed` replaced. A cell
/// that throws is recorded as failed and the run continues. Cells run on up
/// to `jobs` threads; each owns all of its state, so results do not depend
/// on `jobs`.
ComparisonTable run_comparison(const json& base, const std::vector<Variant>& variants,
                               const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1);

}  // namespace dasml

#endif  // DASML_EXPERIMENT_HPP_
