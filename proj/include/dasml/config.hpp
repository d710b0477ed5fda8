#ifndef DASML_CONFIG_HPP_
#define DASML_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dasml/das.hpp"
#include "dasml/dataset.hpp"
#include "dasml/encoder.hpp"
#include "dasml/losses.hpp"
#include "dasml/sampling.hpp"

namespace dasml {

using json = nlohmann::json;

struct DataConfig {
  std::string source = "gaussian";  // gaussian | csv
  GaussianSpec gaussian;
  std::string csv_path;
  CsvOptions csv;
};

struct ModelConfig {
  std::vector<std::size_t> hidden{64};
  std::size_t dim = 16;
  Activation activation = Activation::relu;
};

struct SamplerConfig {
  SamplerKind kind = SamplerKind::distance;
  double semihard_margin = 0.2;
  double clip = 0.5;
  bool produced_as_anchors = true;
  std::size_t random_count = 0;  // 0: one random triplet per batch row
  bool all_pairs = false;        // pair losses: every pair instead of sampled ones
};

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t eval_every = 500;        // 0: evaluate only after the last step
  std::size_t checkpoint_every = 0;    // 0: final checkpoint only
  std::vector<std::size_t> recall_ks{1, 2, 4, 8};
};

/// Everything a training run depends on. Serialized as one nested JSON
/// document; a dotted key such as `das.K` addresses `{"das": {"K": ...}}`.
struct RunConfig {
  std::uint64_t seed = 7;
  DataConfig data;
  ModelConfig model;
  BatchSpec batch;
  LossSpec loss;
  SamplerConfig sampler;
  DasConfig das;
  OptimizerSpec optimizer;
  TrainConfig train;
  std::string output_dir;

  /// Reads a document that may omit keys (defaults fill them in). Unknown
  /// keys and ill-typed values raise ConfigError.
  static RunConfig from_json(const json& doc);
  json to_json() const;

  /// Cross-field checks; throws ConfigError.
  void validate() const;

  std::vector<std::size_t> layer_sizes(std::size_t input_dim) const;
};

json default_config();

/// Applies `key=value` to a config document. The value is parsed as JSON
/// when possible and taken as a string otherwise. The key must name an
/// existing leaf of the default document.
void apply_override(json& doc, std::string_view assignment);
void apply_override(json& doc, std::string_view key, const json& value);

/// Default document patched with `doc`, rejecting unknown keys.
json complete_config(const json& doc);

}  // namespace dasml

#endif  // DASML_CONFIG_HPP_
