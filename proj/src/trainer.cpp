#include "dasml/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dasml/das.hpp"
#include "dasml/losses.hpp"
#include "dasml/sampling.hpp"

namespace dasml {

namespace {

// Independent streams derived from the run seed.
enum Stream : std::uint64_t {
  kDataStream = 1,
  kInitStream = 2,
  kBatchStream = 3,
  kSamplerStream = 4,
  kDasStream = 5,
  kEvalStream = 6,
};

}  // namespace

std::string to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::batch: return "batch";
    case TraceEvent::encode: return "encode";
    case TraceEvent::frm: return "frm";
    case TraceEvent::scale: return "scale";
    case TraceEvent::transform: return "transform";
    case TraceEvent::enqueue: return "enqueue";
    case TraceEvent::shift: return "shift";
    case TraceEvent::produce: return "produce";
    case TraceEvent::sample: return "sample";
    case TraceEvent::loss: return "loss";
    case TraceEvent::update: return "update";
  }
  return "?";
}

json to_json(const StepRecord& r) {
  return {{"type", "step"},          {"step", r.step},
          {"loss", r.loss},          {"active", r.active},
          {"produced", r.produced},  {"dropped", r.dropped}};
}

json to_json(const EvalReport& r) {
  json j{{"type", "eval"}, {"step", r.step}, {"nmi", r.nmi}, {"f1", r.f1},
         {"n_queries", r.n_queries}};
  for (const auto& [k, v] : r.recall_at) j["recall@" + std::to_string(k)] = v;
  return j;
}

std::string RunLog::to_jsonl() const {
  std::string out;
  std::size_t e = 0;
  for (const auto& s : steps) {
    out += to_json(s).dump();
    out += '\n';
    while (e < evals.size() && evals[e].step <= s.step) {
      out += to_json(evals[e++]).dump();
      out += '\n';
    }
  }
  for (; e < evals.size(); ++e) {
    out += to_json(evals[e]).dump();
    out += '\n';
  }
  return out;
}

Dataset build_dataset(const RunConfig& config) {
  if (config.data.source == "csv") return load_csv(config.data.csv_path, config.data.csv);
  SeededRng rng = SeededRng(config.seed).split(kDataStream);
  return generate_gaussian_clusters(config.data.gaussian, rng);
}

EvalReport evaluate(const EncoderParams& params, const Dataset& data,
                    const std::vector<std::size_t>& recall_ks, std::uint64_t seed) {
  if (data.dim() != params.input_dim()) {
    throw ShapeMismatch("dataset has " + std::to_string(data.dim()) +
                        " features, encoder expects " + std::to_string(params.input_dim()));
  }
  const Matrix x = data.features_of(data.test_classes);
  const auto labels = data.labels_of(data.test_classes);
  if (x.rows() < 2) throw ShapeMismatch("test split needs at least 2 points");
  const auto [emb, tape] = encode(params, x);
  SeededRng rng = SeededRng(seed).split(kEvalStream);
  return evaluate_embeddings(emb, labels, recall_ks, rng);
}

namespace {

struct StepBatch {
  Matrix embeddings;                       // real rows first, then produced rows
  std::vector<std::size_t> labels;
  std::vector<ProducedEmbedding> produced; // produced[i] is row real_count + i
  std::size_t real_count = 0;
  std::size_t dropped = 0;
};

TripletSet sample_triplets(const RunConfig& cfg, const Matrix& emb,
                           std::span<const std::size_t> labels, std::size_t anchor_limit,
                           SeededRng& rng) {
  if (cfg.sampler.kind == SamplerKind::random) {
    const std::size_t count = cfg.sampler.random_count ? cfg.sampler.random_count : labels.size();
    return sample_random_triplets(labels, count, rng, anchor_limit);
  }
  const Matrix d = pairwise_distances(emb);
  switch (cfg.sampler.kind) {
    case SamplerKind::semihard:
      return sample_semihard_triplets(d, labels, cfg.sampler.semihard_margin, rng, anchor_limit);
    case SamplerKind::softhard:
      return sample_softhard_triplets(d, labels, rng, anchor_limit);
    case SamplerKind::distance:
      return sample_distance_weighted(d, labels, emb.cols(), rng, cfg.sampler.clip,
                                      anchor_limit);
    case SamplerKind::random:
      break;
  }
  return {};
}

// What the loss consumes: triplets, pairs, or (multi-similarity) the raw
// labelled batch with its own mining.
struct SampledTerms {
  TripletSet triplets;
  PairSet pairs;
};

SampledTerms sample_terms(const RunConfig& cfg, const Matrix& emb,
                          std::span<const std::size_t> labels, std::size_t anchor_limit,
                          SeededRng& rng) {
  SampledTerms terms;
  switch (cfg.loss.kind) {
    case LossKind::multi_similarity:
      break;
    case LossKind::triplet:
      terms.triplets = sample_triplets(cfg, emb, labels, anchor_limit, rng);
      break;
    case LossKind::contrastive:
    case LossKind::margin:
      terms.pairs = cfg.sampler.all_pairs
                        ? build_pairs(labels)
                        : pairs_from_triplets(sample_triplets(cfg, emb, labels, anchor_limit, rng));
      break;
  }
  return terms;
}

LossOutput compute_loss(const RunConfig& cfg, const Matrix& emb,
                        std::span<const std::size_t> labels, const SampledTerms& terms,
                        double margin_beta) {
  const auto& ls = cfg.loss;
  switch (ls.kind) {
    case LossKind::triplet:
      return triplet_loss(emb, terms.triplets, ls.triplet_margin);
    case LossKind::contrastive:
      return contrastive_loss(emb, terms.pairs, ls.contrastive_margin);
    case LossKind::margin:
      return margin_loss(emb, terms.pairs, ls.margin_alpha, margin_beta);
    case LossKind::multi_similarity:
      return multi_similarity_loss(emb, labels, ls.ms);
  }
  return {};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

TrainResult train(const RunConfig& config, const Dataset& data, const TrainOptions& options) {
  config.validate();
  if (data.train_classes.empty() || data.test_classes.empty()) {
    throw InvalidConfig("dataset needs both train and test classes");
  }
  const auto trace = [&](TraceEvent e) {
    if (options.trace) options.trace(e);
  };
  const SeededRng root(config.seed);
  SeededRng init_rng = root.split(kInitStream);
  SeededRng batch_rng = root.split(kBatchStream);
  SeededRng sampler_rng = root.split(kSamplerStream);
  SeededRng das_rng = root.split(kDasStream);

  TrainResult result;
  result.params = make_encoder(config.layer_sizes(data.dim()), config.model.activation, init_rng);
  result.optimizer = make_optimizer(config.optimizer, result.params);
  result.margin_beta = config.loss.margin_beta;
  const double beta_lr =
      config.loss.margin_beta_lr > 0.0 ? config.loss.margin_beta_lr : config.optimizer.learning_rate;

  const std::size_t n_classes = data.num_classes();
  const std::size_t dim = config.model.dim;
  const DasConfig& das = config.das;
  FrequencyRecorder frm(n_classes, dim);
  TransformationBank bank(n_classes, das.bank_capacity, dim);
  const bool produce = das.enabled || options.duplicate_anchors;
  const std::size_t per_anchor = produce ? das.produce_per_anchor : 0;

  const bool write = options.write_outputs && !config.output_dir.empty();
  std::filesystem::path out_dir;
  if (write) {
    out_dir = config.output_dir;
    std::filesystem::create_directories(out_dir);
  }
  auto make_checkpoint = [&](std::size_t step) {
    Checkpoint ck;
    ck.params = result.params;
    ck.optimizer = result.optimizer;
    ck.seed = config.seed;
    ck.step = step;
    ck.margin_beta = result.margin_beta;
    ck.config = config.to_json();
    return ck;
  };
  auto flush_log = [&] {
    if (write) write_text(out_dir / "run.log.jsonl", result.log.to_jsonl());
  };

  std::size_t current_step = 0;
  try {
    for (std::size_t step = 1; step <= config.train.steps; ++step) {
      current_step = step;
      const auto points = sample_batch(data, config.batch, batch_rng);
      trace(TraceEvent::batch);
      Matrix inputs;
      std::vector<std::size_t> real_labels;
      for (const auto& p : points) {
        inputs.append_row(p.features);
        real_labels.push_back(p.label);
      }
      auto [real, tape] = encode(result.params, inputs);
      trace(TraceEvent::encode);

      StepBatch sb;
      sb.real_count = real.rows();
      sb.embeddings = real;
      sb.labels = real_labels;
      const std::size_t n_produced = sb.real_count * per_anchor;

      if (options.duplicate_anchors) {
        for (std::size_t i = 0; i < sb.real_count; ++i) {
          for (std::size_t t = 0; t < per_anchor; ++t) {
            sb.produced.push_back({real.row_vector(i), real_labels[i], i, Vector(dim, 1.0),
                                   Vector(dim, 0.0), 1.0});
          }
        }
      } else if (das.enabled) {
        std::vector<Vector> scales(n_produced, Vector(dim, 1.0));
        std::vector<Vector> shifts(n_produced, Vector(dim, 0.0));
        if (das.use_scaling) {
          frm.record(real, real_labels, das.top_k);
          trace(TraceEvent::frm);
          const ChannelMask mask = compute_mask(frm, das.top_k);
          for (std::size_t j = 0; j < n_produced; ++j) {
            scales[j] = scaling_factor(mask.row(real_labels[j / per_anchor]), das.scale_radius,
                                       das_rng);
          }
          trace(TraceEvent::scale);
        }
        if (das.use_shifting) {
          const auto transforms = intra_class_transforms(real, real_labels);
          trace(TraceEvent::transform);
          for (const auto& t : transforms) bank.enqueue(t.label, t.transform);
          trace(TraceEvent::enqueue);
          for (std::size_t j = 0; j < n_produced; ++j) {
            shifts[j] = shifting_factor(bank, real_labels[j / per_anchor], das.shift_ratio, das_rng);
          }
          trace(TraceEvent::shift);
        }
        for (std::size_t j = 0; j < n_produced; ++j) {
          const std::size_t src = j / per_anchor;
          auto p = produce_embedding(real.row(src), real_labels[src], src, std::move(scales[j]),
                                     std::move(shifts[j]));
          if (p) {
            sb.produced.push_back(std::move(*p));
          } else {
            ++sb.dropped;
            std::cerr << "warning: step " << step << ": dropped degenerate produced embedding"
                      << " of anchor " << src << "\n";
          }
        }
        trace(TraceEvent::produce);
      }
      for (const auto& p : sb.produced) {
        sb.embeddings.append_row(p.value);
        sb.labels.push_back(p.label);
      }

      const std::size_t anchor_limit =
          config.sampler.produced_as_anchors ? kAllAnchors : sb.real_count;
      const SampledTerms terms =
          sample_terms(config, sb.embeddings, sb.labels, anchor_limit, sampler_rng);
      trace(TraceEvent::sample);
      LossOutput loss = compute_loss(config, sb.embeddings, sb.labels, terms, result.margin_beta);
      trace(TraceEvent::loss);
      if (!std::isfinite(loss.value)) {
        throw RuntimeAbort("step " + std::to_string(step) + ": non-finite loss");
      }

      Matrix grad_real(sb.real_count, dim);
      for (std::size_t i = 0; i < sb.real_count; ++i) {
        std::copy_n(loss.grad.row(i).begin(), dim, grad_real.row(i).begin());
      }
      for (std::size_t j = 0; j < sb.produced.size(); ++j) {
        const auto& p = sb.produced[j];
        auto g = loss.grad.row(sb.real_count + j);
        auto dst = grad_real.row(p.source);
        if (options.duplicate_anchors) {
          for (std::size_t k = 0; k < dim; ++k) dst[k] += g[k];
        } else {
          const Vector ga = das_backward(p, g);
          for (std::size_t k = 0; k < dim; ++k) dst[k] += ga[k];
        }
      }
      const EncoderGrads grads = backward(result.params, tape, grad_real);
      optimizer_step(result.params, grads, result.optimizer);
      if (config.loss.kind == LossKind::margin) {
        result.margin_beta -= beta_lr * loss.grad_beta;
      }
      trace(TraceEvent::update);

      result.log.steps.push_back(
          {step, loss.value, loss.active_count, sb.produced.size(), sb.dropped});

      const bool last = step == config.train.steps;
      if (last || (config.train.eval_every > 0 && step % config.train.eval_every == 0)) {
        EvalReport r = evaluate(result.params, data, config.train.recall_ks, config.seed);
        r.step = step;
        result.log.evals.push_back(r);
      }
      if (write && config.train.checkpoint_every > 0 &&
          step % config.train.checkpoint_every == 0) {
        save_checkpoint(make_checkpoint(step),
                        out_dir / ("checkpoint_" + std::to_string(step) + ".json"));
      }
    }
  } catch (const Error& e) {
    std::cerr << "training stopped at step " << current_step << ": " << e.what() << "\n";
    flush_log();
    throw;
  }

  if (result.log.evals.empty()) {
    // Zero training steps: still report the untrained encoder.
    EvalReport r = evaluate(result.params, data, config.train.recall_ks, config.seed);
    result.log.evals.push_back(r);
  }
  result.final_report = result.log.evals.back();
  flush_log();
  if (write) save_checkpoint(make_checkpoint(config.train.steps), out_dir / "checkpoint.json");
  return result;
}

TrainResult train(const RunConfig& config) { return train(config, build_dataset(config)); }

json checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["format"] = "dasml-checkpoint";
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = ck.params.layer_sizes();
  j["activation"] = to_string(ck.params.activation);
  json layers = json::array();
  for (const auto& l : ck.params.layers) layers.push_back({{"weight", l.weight}, {"bias", l.bias}});
  j["layers"] = layers;
  const auto& o = ck.optimizer;
  j["optimizer"] = {{"kind", to_string(o.spec.kind)},
                    {"lr", o.spec.learning_rate},
                    {"momentum", o.spec.momentum},
                    {"beta1", o.spec.beta1},
                    {"beta2", o.spec.beta2},
                    {"epsilon", o.spec.epsilon},
                    {"step", o.step},
                    {"first_moment", o.first_moment},
                    {"second_moment", o.second_moment}};
  j["seed"] = ck.seed;
  j["step"] = ck.step;
  j["margin_beta"] = ck.margin_beta;
  j["config"] = ck.config;
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint ck;
  try {
    if (j.at("format").get<std::string>() != "dasml-checkpoint") {
      throw CorruptCheckpoint("not a dasml checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CorruptCheckpoint("unsupported checkpoint version " + std::to_string(version));
    }
    const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    const auto& layers = j.at("layers");
    if (sizes.size() < 2 || layers.size() + 1 != sizes.size()) {
      throw CorruptCheckpoint("layer list does not match layer sizes");
    }
    ck.params.activation = parse_activation(j.at("activation").get<std::string>());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      DenseLayer l{sizes[i], sizes[i + 1], layers[i].at("weight").get<Vector>(),
                   layers[i].at("bias").get<Vector>()};
      ck.params.layers.push_back(std::move(l));
    }
    ck.params.validate();
    const auto& o = j.at("optimizer");
    ck.optimizer.spec.kind = parse_optimizer(o.at("kind").get<std::string>());
    ck.optimizer.spec.learning_rate = o.at("lr").get<double>();
    ck.optimizer.spec.momentum = o.at("momentum").get<double>();
    ck.optimizer.spec.beta1 = o.at("beta1").get<double>();
    ck.optimizer.spec.beta2 = o.at("beta2").get<double>();
    ck.optimizer.spec.epsilon = o.at("epsilon").get<double>();
    ck.optimizer.step = o.at("step").get<std::uint64_t>();
    ck.optimizer.first_moment = o.at("first_moment").get<Vector>();
    ck.optimizer.second_moment = o.at("second_moment").get<Vector>();
    const std::size_t n = ck.params.param_count();
    if (ck.optimizer.first_moment.size() != n ||
        (ck.optimizer.spec.kind == OptimizerKind::adam && ck.optimizer.second_moment.size() != n)) {
      throw CorruptCheckpoint("optimizer state does not match parameter count");
    }
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.step = j.at("step").get<std::size_t>();
    ck.margin_beta = j.at("margin_beta").get<double>();
    ck.config = j.at("config");
  } catch (const CorruptCheckpoint&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptCheckpoint(std::string("malformed checkpoint: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_text(path, checkpoint_to_json(ckpt).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorruptCheckpoint("cannot open " + path.string());
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw CorruptCheckpoint(path.string() + " is not valid JSON");
  return checkpoint_from_json(doc);
}

}  // namespace dasml
