#include "dasml/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

namespace dasml {

Dataset Dataset::from_points(std::vector<LabeledPoint> points) {
  Dataset d;
  d.points = std::move(points);
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    d.class_index[d.points[i].label].push_back(i);
  }
  const std::size_t c = d.class_index.size();
  if (c > 0 && d.class_index.rbegin()->first != c - 1) {
    throw InvalidConfig("dataset labels are not dense in [0, C)");
  }
  const std::size_t n_train = (c + 1) / 2;
  for (std::size_t k = 0; k < c; ++k) {
    (k < n_train ? d.train_classes : d.test_classes).push_back(k);
  }
  return d;
}

Matrix Dataset::features_of(const std::vector<std::size_t>& classes) const {
  std::set<std::size_t> wanted(classes.begin(), classes.end());
  Matrix m;
  for (const auto& p : points) {
    if (wanted.count(p.label)) m.append_row(p.features);
  }
  return m;
}

std::vector<std::size_t> Dataset::labels_of(
    const std::vector<std::size_t>& classes) const {
  std::set<std::size_t> wanted(classes.begin(), classes.end());
  std::vector<std::size_t> out;
  for (const auto& p : points) {
    if (wanted.count(p.label)) out.push_back(p.label);
  }
  return out;
}

Dataset generate_gaussian_clusters(const GaussianSpec& spec, SeededRng& rng) {
  if (spec.classes < 2 || spec.per_class < 2 || spec.dim < 2) {
    throw InvalidConfig("gaussian clusters need classes, per_class, dim >= 2");
  }
  if (!(spec.noise_sigma > 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw InvalidConfig("noise_sigma must be positive");
  }
  if (!(spec.center_scale >= 0.0) || !std::isfinite(spec.center_scale)) {
    throw InvalidConfig("center_scale must be non-negative");
  }

  std::vector<Vector> centers(spec.classes, Vector(spec.dim));
  for (auto& c : centers) {
    for (auto& x : c) x = rng.uniform(-spec.center_scale, spec.center_scale);
  }
  std::vector<LabeledPoint> points;
  points.reserve(spec.classes * spec.per_class);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      LabeledPoint p{Vector(spec.dim), c};
      for (std::size_t k = 0; k < spec.dim; ++k) {
        p.features[k] = centers[c][k] + spec.noise_sigma * rng.normal();
      }
      points.push_back(std::move(p));
    }
  }
  return Dataset::from_points(std::move(points));
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
  struct RawRow {
    Vector features;
    long long label;
  };
  std::vector<RawRow> rows;
  std::size_t arity = 0;
  std::size_t row_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++row_no;
    if (row_no == 1 && options.header) continue;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (arity == 0) {
      arity = fields.size();
      if (options.label_column >= arity) {
        throw ParseError(row_no, options.label_column + 1,
                         "label column out of range for row with " +
                             std::to_string(arity) + " fields");
      }
      if (arity < 2) {
        throw ParseError(row_no, 1, "rows need at least one feature column");
      }
    } else if (fields.size() != arity) {
      throw ParseError(row_no, fields.size(),
                       "expected " + std::to_string(arity) + " fields, got " +
                           std::to_string(fields.size()));
    }
    RawRow r;
    r.features.reserve(arity - 1);
    for (std::size_t col = 0; col < arity; ++col) {
      const auto f = trim(fields[col]);
      if (col == options.label_column) {
        long long v = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
          throw ParseError(row_no, col + 1,
                           "label '" + std::string(f) + "' is not an integer");
        }
        r.label = v;
      } else {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() ||
            !std::isfinite(v)) {
          throw ParseError(row_no, col + 1,
                           "'" + std::string(f) + "' is not a finite real");
        }
        r.features.push_back(v);
      }
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw EmptyFile("CSV input contains no data rows");

  std::set<long long> distinct;
  for (const auto& r : rows) distinct.insert(r.label);
  std::map<long long, std::size_t> dense;
  for (long long l : distinct) dense.emplace(l, dense.size());

  std::vector<LabeledPoint> points;
  points.reserve(rows.size());
  for (auto& r : rows) {
    points.push_back({std::move(r.features), dense.at(r.label)});
  }
  return Dataset::from_points(std::move(points));
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw EmptyFile("cannot open " + path.string());
  return parse_csv(in, options);
}

void write_csv(const Dataset& data, std::ostream& out) {
  char buf[64];
  for (const auto& p : data.points) {
    for (double x : p.features) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out.write(buf, ptr - buf);
      out.put(',');
    }
    out << p.label << '\n';
  }
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(data, out);
}

}  // namespace dasml
