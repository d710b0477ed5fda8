#include "dasml/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>
#include <tuple>

#include "dasml/trainer.hpp"

namespace dasml {

std::vector<Variant> ablation_variants() {
  return {
      {"baseline", {{"das.enabled", false}}},
      {"dfs_only", {{"das.enabled", true}, {"das.dfs_only", true}, {"das.mts_only", false}}},
      {"mts_only", {{"das.enabled", true}, {"das.dfs_only", false}, {"das.mts_only", true}}},
      {"both", {{"das.enabled", true}, {"das.dfs_only", false}, {"das.mts_only", false}}},
  };
}

std::vector<Variant> sweep_variants(const std::string& key, const std::vector<json>& values) {
  std::vector<Variant> out;
  for (const auto& v : values) {
    json o = json::object();
    o[key] = v;
    out.push_back({key + "=" + v.dump(), o});
  }
  return out;
}

namespace {

ComparisonCell run_cell(const json& base, const Variant& variant, std::uint64_t seed) {
  ComparisonCell cell;
  cell.variant = variant.name;
  cell.seed = seed;
  try {
    json doc = base;
    for (const auto& [key, value] : variant.overrides.items()) apply_override(doc, key, value);
    apply_override(doc, "seed", seed);
    apply_override(doc, "output_dir", "");
    const RunConfig cfg = RunConfig::from_json(doc);
    const TrainResult r = train(cfg);
    cell.recall_at_1 = r.final_report.recall_at.count(1) ? r.final_report.recall_at.at(1) : 0.0;
    cell.nmi = r.final_report.nmi;
    cell.f1 = r.final_report.f1;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

ComparisonTable run_comparison(const json& base, const std::vector<Variant>& variants,
                               const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  if (variants.empty()) throw InvalidConfig("comparison needs at least one variant");
  if (seeds.empty()) throw InvalidConfig("comparison needs at least one seed");
  const json full = complete_config(base);

  ComparisonTable table;
  table.cells.resize(variants.size() * seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < table.cells.size(); i = next++) {
      table.cells[i] = run_cell(full, variants[i / seeds.size()], seeds[i % seeds.size()]);
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, table.cells.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t v = 0; v < variants.size(); ++v) {
    ComparisonRow row;
    row.variant = variants[v].name;
    std::vector<double> r1, nm, f1;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& c = table.cells[v * seeds.size() + s];
      if (!c.ok) {
        ++row.failed;
        continue;
      }
      r1.push_back(c.recall_at_1);
      nm.push_back(c.nmi);
      f1.push_back(c.f1);
    }
    row.runs = r1.size();
    std::tie(row.recall_mean, row.recall_std) = mean_std(r1);
    std::tie(row.nmi_mean, row.nmi_std) = mean_std(nm);
    std::tie(row.f1_mean, row.f1_std) = mean_std(f1);
    table.rows.push_back(row);
  }
  return table;
}

std::string ComparisonTable::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "variant,runs,failed,recall@1_mean,recall@1_std,nmi_mean,nmi_std,f1_mean,f1_std\n";
  for (const auto& r : rows) {
    out << r.variant << ',' << r.runs << ',' << r.failed << ',' << r.recall_mean << ','
        << r.recall_std << ',' << r.nmi_mean << ',' << r.nmi_std << ',' << r.f1_mean << ','
        << r.f1_std << '\n';
  }
  return out.str();
}

std::string ComparisonTable::to_text() const {
  std::size_t width = 7;
  for (const auto& r : rows) width = std::max(width, r.variant.size());
  std::ostringstream out;
  auto pad = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
  };
  auto cell = [&](double mean, double sd) {
    return pad(fixed(100 * mean, 2) + " +- " + fixed(100 * sd, 2), 17);
  };
  out << pad("variant", width) << "  " << pad("runs", 6) << pad("R@1 (%)", 17)
      << pad("NMI (%)", 17) << "F1 (%)\n";
  for (const auto& r : rows) {
    std::string runs = std::to_string(r.runs);
    if (r.failed) runs += "/" + std::to_string(r.runs + r.failed);
    out << pad(r.variant, width) << "  " << pad(runs, 6) << cell(r.recall_mean, r.recall_std)
        << cell(r.nmi_mean, r.nmi_std) << fixed(100 * r.f1_mean, 2) << " +- "
        << fixed(100 * r.f1_std, 2) << '\n';
  }
  for (const auto& c : cells) {
    if (!c.ok) out << "failed: " << c.variant << " seed " << c.seed << ": " << c.error << '\n';
  }
  return out.str();
}

}  // namespace dasml
