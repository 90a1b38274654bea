#include "vfxgb/data.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "vfxgb/error.h"

namespace vfxgb::data {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  for (auto& cell : cells) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
  }
  return cells;
}

bool parse_real(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string cell_ref(std::size_t line_no, const std::string& column) {
  return "line " + std::to_string(line_no) + ", column '" + column + "'";
}

}  // namespace

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (ids.size() != n) throw InvalidArgument("dataset ids and labels differ in length");
  if (features.names.size() != features.columns.size()) throw InvalidArgument("dataset names and columns differ");
  for (const auto& col : features.columns) {
    if (col.size() != n) throw InvalidArgument("dataset is not rectangular");
  }
}

Dataset load_csv(const std::string& path, const std::string& label_column, const LoadOptions& options,
                 LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);

  int label_idx = -1;
  int id_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) label_idx = static_cast<int>(c);
    if (!options.id_column.empty() && header[c] == options.id_column) id_idx = static_cast<int>(c);
  }
  if (label_idx < 0) throw InvalidArgument("label column '" + label_column + "' not found in '" + path + "'");
  if (!options.id_column.empty() && id_idx < 0) {
    throw InvalidArgument("id column '" + options.id_column + "' not found in '" + path + "'");
  }

  Dataset ds;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<int>(c) == label_idx || static_cast<int>(c) == id_idx) continue;
    feature_cols.push_back(c);
    ds.features.names.push_back(header[c]);
  }
  ds.features.columns.resize(feature_cols.size());

  LoadReport rep;
  std::size_t line_no = 1;
  std::vector<double> row(feature_cols.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    bool incomplete = false;
    for (const auto& cell : cells) incomplete = incomplete || cell.empty();
    if (incomplete) {
      if (!options.drop_incomplete_rows) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
          if (cells[c].empty()) throw InvalidArgument("missing value at " + cell_ref(line_no, header[c]));
        }
      }
      ++rep.rows_dropped;
      continue;
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      if (!parse_real(cells[feature_cols[k]], row[k])) {
        throw InvalidArgument("non-numeric or non-finite value '" + cells[feature_cols[k]] + "' at " +
                              cell_ref(line_no, header[feature_cols[k]]));
      }
    }
    double label = 0.0;
    const auto& lcell = cells[static_cast<std::size_t>(label_idx)];
    if (!parse_real(lcell, label) || (label != 0.0 && label != 1.0)) {
      throw InvalidArgument("label must be 0 or 1, got '" + lcell + "' at " + cell_ref(line_no, label_column));
    }
    std::int64_t id = static_cast<std::int64_t>(ds.labels.size());
    if (id_idx >= 0) {
      double v = 0.0;
      const auto& icell = cells[static_cast<std::size_t>(id_idx)];
      if (!parse_real(icell, v)) throw InvalidArgument("bad id '" + icell + "' at " + cell_ref(line_no, options.id_column));
      id = static_cast<std::int64_t>(v);
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k) ds.features.columns[k].push_back(row[k]);
    ds.labels.push_back(static_cast<int>(label));
    ds.ids.push_back(id);
    ++rep.rows_loaded;
  }
  if (report) *report = rep;
  return ds;
}

std::string to_csv(const Dataset& ds, const std::string& label_column) {
  ds.validate();
  std::string out;
  for (const auto& name : ds.features.names) {
    out += name;
    out += ',';
  }
  out += label_column;
  out += '\n';
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    for (const auto& col : ds.features.columns) {
      out += format_real(col[i]);
      out += ',';
    }
    out += std::to_string(ds.labels[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_csv(ds, label_column);
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::pair<PartyView, PartyView> vertical_split(const Dataset& ds, const VerticalSplitPlan& plan) {
  ds.validate();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < ds.features.names.size(); ++k) index.emplace(ds.features.names[k], k);

  std::set<std::string> seen;
  auto take = [&](const std::vector<std::string>& names, PartyView& view) {
    for (const auto& name : names) {
      auto it = index.find(name);
      if (it == index.end()) throw ConfigError("split plan names unknown column '" + name + "'");
      if (!seen.insert(name).second) throw ConfigError("split plan assigns column '" + name + "' twice");
      view.features.names.push_back(name);
      view.features.columns.push_back(ds.features.columns[it->second]);
    }
  };
  PartyView active;
  PartyView passive;
  take(plan.active, active);
  take(plan.passive, passive);
  if (seen.size() != ds.features.names.size()) {
    for (const auto& name : ds.features.names) {
      if (!seen.count(name)) throw ConfigError("split plan leaves column '" + name + "' unassigned");
    }
  }
  active.ids = ds.ids;
  passive.ids = ds.ids;
  active.labels = ds.labels;
  return {std::move(active), std::move(passive)};
}

Dataset join_views(const PartyView& active, const PartyView& passive) {
  if (active.ids != passive.ids) throw InvalidArgument("views are not row-aligned");
  Dataset ds;
  ds.ids = active.ids;
  ds.labels = active.labels;
  ds.features = active.features;
  for (std::size_t k = 0; k < passive.features.num_features(); ++k) {
    ds.features.names.push_back(passive.features.names[k]);
    ds.features.columns.push_back(passive.features.columns[k]);
  }
  ds.validate();
  return ds;
}

Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.features.names = ds.features.names;
  out.features.columns.resize(ds.features.num_features());
  for (std::size_t r : rows) {
    out.ids.push_back(ds.ids.at(r));
    out.labels.push_back(ds.labels.at(r));
    for (std::size_t k = 0; k < ds.features.num_features(); ++k) {
      out.features.columns[k].push_back(ds.features.columns[k][r]);
    }
  }
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must be in (0, 1)");
  ds.validate();
  const std::size_t n = ds.num_rows();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  // Fisher–Yates with an explicit bounded draw so the split does not depend
  // on the standard library's distribution implementation.
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = 0;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(perm[i - 1], perm[x % bound]);
  }
  std::vector<bool> is_test(n, false);
  for (std::size_t k = 0; k < n_test; ++k) is_test[perm[k]] = true;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t i = 0; i < n; ++i) (is_test[i] ? test_rows : train_rows).push_back(i);
  return {select_rows(ds, train_rows), select_rows(ds, test_rows)};
}

std::pair<Dataset, VerticalSplitPlan> synth_credit(std::size_t n, std::size_t d_ap, std::size_t d_pp,
                                                   std::uint64_t seed) {
  if (n < 10) throw ConfigError("synth: n must be >= 10");
  if (d_ap + d_pp == 0) throw ConfigError("synth: need at least one feature");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t d = d_ap + d_pp;
  Dataset ds;
  VerticalSplitPlan plan;
  for (std::size_t k = 0; k < d_ap; ++k) {
    ds.features.names.push_back("a" + std::to_string(k));
    plan.active.push_back(ds.features.names.back());
  }
  for (std::size_t k = 0; k < d_pp; ++k) {
    ds.features.names.push_back("p" + std::to_string(k));
    plan.passive.push_back(ds.features.names.back());
  }
  ds.features.columns.assign(d, std::vector<double>(n));

  std::vector<double> weights(d);
  for (auto& w : weights) w = normal(rng);
  // keep a handful of weak and noise-only columns on each side
  for (std::size_t k = 0; k < d; ++k) {
    if (k % 4 == 3) weights[k] *= 0.1;
  }
  double norm = 0.0;
  for (double w : weights) norm += w * w;
  norm = std::sqrt(norm);
  constexpr double kSignal = 2.0;
  for (auto& w : weights) w *= kSignal / norm;

  for (std::size_t i = 0; i < n; ++i) {
    double logit = -1.2;
    for (std::size_t k = 0; k < d; ++k) {
      // mix of Gaussian and skewed (amount-like) columns
      double x = normal(rng);
      if (k % 3 == 2) x = std::exp(0.5 * x) - 1.0;
      x = std::round(x * 1e4) / 1e4;
      ds.features.columns[k][i] = x;
      logit += weights[k] * x;
    }
    if (d_ap > 0 && d_pp > 0) {
      logit += 0.8 * ds.features.columns[0][i] * ds.features.columns[d_ap][i];
    }
    logit += 0.5 * normal(rng);
    const double p = 1.0 / (1.0 + std::exp(-logit));
    ds.labels.push_back(unit(rng) < p ? 1 : 0);
    ds.ids.push_back(static_cast<std::int64_t>(i));
  }
  return {std::move(ds), std::move(plan)};
}

}  // namespace vfxgb::data
