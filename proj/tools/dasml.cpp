// Command-line front end: generate-data, train, evaluate, compare, sweep.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime abort.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dasml/config.hpp"
#include "dasml/dataset.hpp"
#include "dasml/experiment.hpp"
#include "dasml/trainer.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string data_path;
  std::optional<std::size_t> label_col;
  bool header = false;
};

void add_config_args(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON run configuration");
  cmd->add_option("--set", a.overrides, "Override a config key, e.g. --set das.K=8")
      ->take_all();
}

void add_data_args(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--data", a.data_path, "CSV dataset (replaces the configured source)");
  cmd->add_option("--label-col", a.label_col, "0-based label column of the CSV");
  cmd->add_flag("--header", a.header, "Skip the first CSV row");
}

dasml::json load_config(const CommonArgs& a) {
  dasml::json doc = dasml::json::object();
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw dasml::ConfigError("cannot open config " + a.config_path);
    doc = dasml::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw dasml::ConfigError(a.config_path + " is not valid JSON");
  }
  doc = dasml::complete_config(doc);
  if (!a.data_path.empty()) {
    dasml::apply_override(doc, "data.source", "csv");
    dasml::apply_override(doc, "data.csv_path", a.data_path);
  }
  if (a.label_col) dasml::apply_override(doc, "data.label_col", *a.label_col);
  if (a.header) dasml::apply_override(doc, "data.header", true);
  for (const auto& o : a.overrides) dasml::apply_override(doc, o);
  return doc;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw dasml::ConfigError("bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw dasml::ConfigError("no seeds given");
  return seeds;
}

void write_report(const dasml::ComparisonTable& table, const std::string& out_dir) {
  std::cout << table.to_text();
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  std::ofstream(std::filesystem::path(out_dir) / "report.csv") << table.to_csv();
  std::ofstream(std::filesystem::path(out_dir) / "report.txt") << table.to_text();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric learning with DAS embedding production"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate-data", "Write the configured synthetic dataset as CSV");
  add_config_args(gen, gen_args);
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  CommonArgs train_args;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "Train an encoder");
  add_config_args(train_cmd, train_args);
  add_data_args(train_cmd, train_args);
  train_cmd->add_option("--out", train_out, "Output directory (run.log.jsonl, checkpoint.json)");

  CommonArgs eval_args;
  std::string eval_ckpt;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on its test split");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint JSON")->required();
  add_data_args(eval_cmd, eval_args);

  CommonArgs cmp_args;
  std::string cmp_seeds = "1,2,3";
  std::string cmp_out;
  std::size_t cmp_jobs = 1;
  auto* cmp = app.add_subcommand("compare", "Ablation grid: baseline / dfs_only / mts_only / both");
  add_config_args(cmp, cmp_args);
  add_data_args(cmp, cmp_args);
  cmp->add_option("--seeds", cmp_seeds, "Comma-separated seeds");
  cmp->add_option("--out", cmp_out, "Directory for report.csv and report.txt");
  cmp->add_option("--jobs", cmp_jobs, "Cells trained in parallel");

  CommonArgs sweep_args;
  std::string sweep_key;
  std::vector<std::string> sweep_values;
  std::string sweep_seeds = "1,2,3";
  std::string sweep_out;
  std::size_t sweep_jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Grid over one config key");
  add_config_args(sweep, sweep_args);
  add_data_args(sweep, sweep_args);
  sweep->add_option("--key", sweep_key, "Dotted config key, e.g. das.K")->required();
  sweep->add_option("--values", sweep_values, "Values, e.g. 1,2,4,8")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "Comma-separated seeds");
  sweep->add_option("--out", sweep_out, "Directory for report.csv and report.txt");
  sweep->add_option("--jobs", sweep_jobs, "Cells trained in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const auto cfg = dasml::RunConfig::from_json(load_config(gen_args));
      dasml::save_csv(dasml::build_dataset(cfg), gen_out);
    } else if (*train_cmd) {
      auto doc = load_config(train_args);
      if (!train_out.empty()) dasml::apply_override(doc, "output_dir", train_out);
      const auto cfg = dasml::RunConfig::from_json(doc);
      const auto result = dasml::train(cfg);
      std::cout << dasml::to_json(result.final_report).dump() << "\n";
    } else if (*eval_cmd) {
      const auto ckpt = dasml::load_checkpoint(eval_ckpt);
      CommonArgs with_ckpt = eval_args;
      dasml::json doc = dasml::complete_config(ckpt.config);
      if (!with_ckpt.data_path.empty()) {
        dasml::apply_override(doc, "data.source", "csv");
        dasml::apply_override(doc, "data.csv_path", with_ckpt.data_path);
      }
      if (with_ckpt.label_col) dasml::apply_override(doc, "data.label_col", *with_ckpt.label_col);
      if (with_ckpt.header) dasml::apply_override(doc, "data.header", true);
      const auto cfg = dasml::RunConfig::from_json(doc);
      auto report = dasml::evaluate(ckpt.params, dasml::build_dataset(cfg), cfg.train.recall_ks,
                                    cfg.seed);
      report.step = ckpt.step;
      std::cout << dasml::to_json(report).dump() << "\n";
    } else if (*cmp) {
      const auto doc = load_config(cmp_args);
      dasml::RunConfig::from_json(doc);
      const auto table = dasml::run_comparison(doc, dasml::ablation_variants(),
                                               parse_seeds(cmp_seeds), cmp_jobs);
      write_report(table, cmp_out);
    } else if (*sweep) {
      const auto doc = load_config(sweep_args);
      dasml::RunConfig::from_json(doc);
      std::vector<dasml::json> values;
      for (const auto& v : sweep_values) {
        auto parsed = dasml::json::parse(v, nullptr, false);
        values.push_back(parsed.is_discarded() ? dasml::json(v) : parsed);
      }
      // Reject a bad key before training anything.
      dasml::json probe = doc;
      dasml::apply_override(probe, sweep_key, values.front());
      const auto table = dasml::run_comparison(doc, dasml::sweep_variants(sweep_key, values),
                                               parse_seeds(sweep_seeds), sweep_jobs);
      write_report(table, sweep_out);
    }
  } catch (const dasml::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
