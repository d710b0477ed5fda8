#ifndef DASML_TRAINER_HPP_
#define DASML_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dasml/config.hpp"
#include "dasml/dataset.hpp"
#include "dasml/encoder.hpp"
#include "dasml/metrics.hpp"

namespace dasml {

/// Stages of one training step, in execution order.
enum class TraceEvent {
  batch,      // draw P x M points
  encode,     // forward pass
  frm,        // frequency recorder update
  scale,      // scaling factors for every produced embedding
  transform,  // intra-class transformations of the batch
  enqueue,    // transformation bank update
  shift,      // shifting factors for every produced embedding
  produce,    // produced embeddings
  sample,     // pairs / triplets over real + produced embeddings
  loss,
  update,     // backward pass and optimizer step
};

std::string to_string(TraceEvent e);

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  std::size_t active = 0;
  std::size_t produced = 0;
  std::size_t dropped = 0;
};

struct RunLog {
  std::vector<StepRecord> steps;
  std::vector<EvalReport> evals;

  /// One JSON object per line, steps and evaluations interleaved in the
  /// order they happened.
  std::string to_jsonl() const;
};

json to_json(const StepRecord& r);
json to_json(const EvalReport& r);

struct TrainOptions {
  std::function<void(TraceEvent)> trace;
  /// Replaces every produced embedding by an exact copy of its anchor
  /// (T copies per anchor, no scaling or shifting). This is the reference
  /// "duplicated anchor terms" baseline; not reachable from the config.
  bool duplicate_anchors = false;
  /// Write run.log.jsonl and checkpoints when config.output_dir is set.
  bool write_outputs = true;
};

struct TrainResult {
  EncoderParams params;
  OptimizerState optimizer;
  double margin_beta = 0.0;
  RunLog log;
  EvalReport final_report;
};

/// Gaussian clusters drawn from the config seed, or the configured CSV file.
Dataset build_dataset(const RunConfig& config);

TrainResult train(const RunConfig& config, const Dataset& data,
                  const TrainOptions& options = {});
TrainResult train(const RunConfig& config);

/// Encodes the test classes in one pass and scores them. Deterministic: the
/// k-means stream is derived from `seed` afresh on every call.
EvalReport evaluate(const EncoderParams& params, const Dataset& data,
                    const std::vector<std::size_t>& recall_ks, std::uint64_t seed);

struct Checkpoint {
  EncoderParams params;
  OptimizerState optimizer;
  std::uint64_t seed = 0;
  std::size_t step = 0;
  double margin_beta = 0.0;
  json config;  // the RunConfig document that produced it
};

inline constexpr int kCheckpointVersion = 1;

json checkpoint_to_json(const Checkpoint& ckpt);
/// Throws CorruptCheckpoint on any missing or inconsistent field.
Checkpoint checkpoint_from_json(const json& doc);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dasml

#endif  // DASML_TRAINER_HPP_
