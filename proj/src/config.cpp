#include "dasml/config.hpp"

namespace dasml {

json default_config() { return RunConfig{}.to_json(); }

namespace {

void reject_unknown(const json& defaults, const json& doc, const std::string& prefix) {
  if (!doc.is_object()) return;
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (defaults[key].is_object()) {
      if (!value.is_object()) throw ConfigError("config key '" + path + "' must be an object");
      reject_unknown(defaults[key], value, path);
    }
  }
}

std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.emplace_back(key.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

template <typename T>
T get(const json& doc, const char* section, const char* key) {
  const json& v = section ? doc.at(section).at(key) : doc.at(key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + (section ? std::string(section) + "." : "") +
                      key + "' has the wrong type");
  }
}

}  // namespace

json complete_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  json full = default_config();
  reject_unknown(full, doc, "");
  full.merge_patch(doc);
  return full;
}

void apply_override(json& doc, std::string_view key, const json& value) {
  const json defaults = default_config();
  const json* ref = &defaults;
  json* target = &doc;
  const auto parts = split_key(key);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!ref->is_object() || !ref->contains(parts[i])) {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
    ref = &(*ref)[parts[i]];
    if (i + 1 < parts.size() && ref->is_object()) {
      if (!target->contains(parts[i])) (*target)[parts[i]] = json::object();
      target = &(*target)[parts[i]];
    }
  }
  if (ref->is_object()) throw ConfigError("config key '" + std::string(key) + "' is a section");
  (*target)[parts.back()] = value;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  apply_override(doc, key, value);
}

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["data"] = {{"source", data.source},
               {"classes", data.gaussian.classes},
               {"per_class", data.gaussian.per_class},
               {"dim", data.gaussian.dim},
               {"center_scale", data.gaussian.center_scale},
               {"noise_sigma", data.gaussian.noise_sigma},
               {"csv_path", data.csv_path},
               {"label_col", data.csv.label_column},
               {"header", data.csv.header}};
  j["model"] = {{"hidden", model.hidden},
                {"dim", model.dim},
                {"activation", to_string(model.activation)}};
  j["batch"] = {{"P", batch.classes}, {"M", batch.samples}};
  j["loss"] = {{"kind", to_string(loss.kind)},
               {"contrastive_margin", loss.contrastive_margin},
               {"triplet_margin", loss.triplet_margin},
               {"margin_alpha", loss.margin_alpha},
               {"margin_beta", loss.margin_beta},
               {"margin_beta_lr", loss.margin_beta_lr},
               {"ms_alpha", loss.ms.alpha},
               {"ms_beta", loss.ms.beta},
               {"ms_lambda", loss.ms.lambda},
               {"ms_epsilon", loss.ms.epsilon}};
  j["sampler"] = {{"kind", to_string(sampler.kind)},
                  {"semihard_margin", sampler.semihard_margin},
                  {"clip", sampler.clip},
                  {"produced_as_anchors", sampler.produced_as_anchors},
                  {"random_count", sampler.random_count},
                  {"all_pairs", sampler.all_pairs}};
  j["das"] = {{"enabled", das.enabled},
              {"T", das.produce_per_anchor},
              {"K", das.top_k},
              {"Z", das.bank_capacity},
              {"rs", das.scale_radius},
              {"rb", das.shift_ratio},
              {"dfs_only", das.use_scaling && !das.use_shifting},
              {"mts_only", das.use_shifting && !das.use_scaling}};
  j["optim"] = {{"kind", to_string(optimizer.kind)},
                {"lr", optimizer.learning_rate},
                {"momentum", optimizer.momentum}};
  j["train"] = {{"steps", train.steps},
                {"eval_every", train.eval_every},
                {"checkpoint_every", train.checkpoint_every},
                {"recall_ks", train.recall_ks}};
  j["output_dir"] = output_dir;
  return j;
}

RunConfig RunConfig::from_json(const json& input) {
  const json doc = complete_config(input);
  RunConfig c;
  try {
    c.seed = get<std::uint64_t>(doc, nullptr, "seed");
    c.data.source = get<std::string>(doc, "data", "source");
    c.data.gaussian.classes = get<std::size_t>(doc, "data", "classes");
    c.data.gaussian.per_class = get<std::size_t>(doc, "data", "per_class");
    c.data.gaussian.dim = get<std::size_t>(doc, "data", "dim");
    c.data.gaussian.center_scale = get<double>(doc, "data", "center_scale");
    c.data.gaussian.noise_sigma = get<double>(doc, "data", "noise_sigma");
    c.data.csv_path = get<std::string>(doc, "data", "csv_path");
    c.data.csv.label_column = get<std::size_t>(doc, "data", "label_col");
    c.data.csv.header = get<bool>(doc, "data", "header");

    c.model.hidden = get<std::vector<std::size_t>>(doc, "model", "hidden");
    c.model.dim = get<std::size_t>(doc, "model", "dim");
    c.model.activation = parse_activation(get<std::string>(doc, "model", "activation"));

    c.batch.classes = get<std::size_t>(doc, "batch", "P");
    c.batch.samples = get<std::size_t>(doc, "batch", "M");

    c.loss.kind = parse_loss(get<std::string>(doc, "loss", "kind"));
    c.loss.contrastive_margin = get<double>(doc, "loss", "contrastive_margin");
    c.loss.triplet_margin = get<double>(doc, "loss", "triplet_margin");
    c.loss.margin_alpha = get<double>(doc, "loss", "margin_alpha");
    c.loss.margin_beta = get<double>(doc, "loss", "margin_beta");
    c.loss.margin_beta_lr = get<double>(doc, "loss", "margin_beta_lr");
    c.loss.ms.alpha = get<double>(doc, "loss", "ms_alpha");
    c.loss.ms.beta = get<double>(doc, "loss", "ms_beta");
    c.loss.ms.lambda = get<double>(doc, "loss", "ms_lambda");
    c.loss.ms.epsilon = get<double>(doc, "loss", "ms_epsilon");

    c.sampler.kind = parse_sampler(get<std::string>(doc, "sampler", "kind"));
    c.sampler.semihard_margin = get<double>(doc, "sampler", "semihard_margin");
    c.sampler.clip = get<double>(doc, "sampler", "clip");
    c.sampler.produced_as_anchors = get<bool>(doc, "sampler", "produced_as_anchors");
    c.sampler.random_count = get<std::size_t>(doc, "sampler", "random_count");
    c.sampler.all_pairs = get<bool>(doc, "sampler", "all_pairs");

    c.das.enabled = get<bool>(doc, "das", "enabled");
    c.das.produce_per_anchor = get<std::size_t>(doc, "das", "T");
    c.das.top_k = get<std::size_t>(doc, "das", "K");
    c.das.bank_capacity = get<std::size_t>(doc, "das", "Z");
    c.das.scale_radius = get<double>(doc, "das", "rs");
    c.das.shift_ratio = get<double>(doc, "das", "rb");
    const bool dfs_only = get<bool>(doc, "das", "dfs_only");
    const bool mts_only = get<bool>(doc, "das", "mts_only");
    if (dfs_only && mts_only) throw ConfigError("das.dfs_only and das.mts_only are exclusive");
    c.das.use_scaling = !mts_only;
    c.das.use_shifting = !dfs_only;

    c.optimizer.kind = parse_optimizer(get<std::string>(doc, "optim", "kind"));
    c.optimizer.learning_rate = get<double>(doc, "optim", "lr");
    c.optimizer.momentum = get<double>(doc, "optim", "momentum");

    c.train.steps = get<std::size_t>(doc, "train", "steps");
    c.train.eval_every = get<std::size_t>(doc, "train", "eval_every");
    c.train.checkpoint_every = get<std::size_t>(doc, "train", "checkpoint_every");
    c.train.recall_ks = get<std::vector<std::size_t>>(doc, "train", "recall_ks");
    c.output_dir = get<std::string>(doc, nullptr, "output_dir");
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidConfig& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  try {
    if (data.source != "gaussian" && data.source != "csv") {
      throw ConfigError("data.source must be 'gaussian' or 'csv'");
    }
    if (data.source == "csv" && data.csv_path.empty()) {
      throw ConfigError("data.csv_path is required when data.source is 'csv'");
    }
    if (model.dim < 2) throw ConfigError("model.dim must be >= 2");
    for (std::size_t h : model.hidden) {
      if (h == 0) throw ConfigError("model.hidden sizes must be positive");
    }
    batch.validate();
    loss.validate();
    if (!(sampler.semihard_margin > 0.0)) throw ConfigError("sampler.semihard_margin must be > 0");
    if (!(sampler.clip >= 0.0 && sampler.clip < 2.0)) throw ConfigError("sampler.clip must be in [0, 2)");
    das.validate(model.dim);
    if (!(optimizer.learning_rate > 0.0)) throw ConfigError("optim.lr must be > 0");
    if (optimizer.momentum < 0.0 || optimizer.momentum >= 1.0) {
      throw ConfigError("optim.momentum must be in [0, 1)");
    }
    if (train.recall_ks.empty()) throw ConfigError("train.recall_ks must not be empty");
    for (std::size_t k : train.recall_ks) {
      if (k == 0) throw ConfigError("train.recall_ks entries must be >= 1");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidConfig& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::size_t> RunConfig::layer_sizes(std::size_t input_dim) const {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), model.hidden.begin(), model.hidden.end());
  sizes.push_back(model.dim);
  return sizes;
}

}  // namespace dasml
