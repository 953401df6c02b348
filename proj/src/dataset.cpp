#include "eos/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "eos/error.hpp"

namespace eos {

namespace {

double target_function(double x0, double x1) {
  return std::sin(2.0 * std::numbers::pi * x0) + 0.5 * x1;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = cell.find_first_not_of(' ');
    cells.push_back(start == std::string::npos ? std::string() : cell.substr(start));
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("dataset line " + std::to_string(line_no) + ": bad number '" + cell + "'");
  }
  return v;
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.k == 0) throw ConfigError("synthetic dataset needs n >= 1 and k >= 1");
  if (!(spec.input_std > 0.0)) throw ConfigError("synthetic input_std must be positive");
  Dataset d;
  d.n = spec.n;
  d.k = spec.k;
  d.features.resize(spec.n * spec.k);
  d.targets.resize(spec.n);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.input_std);
  // Sample-major draw order so n and k changes do not reshuffle earlier samples.
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t f = 0; f < spec.k; ++f) d.features[f * spec.n + i] = normal(rng);
  }
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x0 = d.features[i];
    const double x1 = spec.k > 1 ? d.features[spec.n + i] : 0.0;
    const double y = target_function(x0, x1);
    d.targets[i] = spec.binary_labels ? (y > 0.0 ? 1.0 : 0.0) : y;
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw ConfigError("dataset " + path.string() + " has no header");

  std::map<std::size_t, std::size_t> feature_col;  // feature index -> column
  std::size_t y_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "y") {
      y_col = c;
    } else if (h.size() > 1 && h[0] == 'x') {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(h.data() + 1, h.data() + h.size(), idx);
      if (ec != std::errc() || ptr != h.data() + h.size()) {
        throw ConfigError("dataset header: unexpected column '" + h + "'");
      }
      feature_col[idx] = c;
    } else {
      throw ConfigError("dataset header: unexpected column '" + h + "'");
    }
  }
  if (y_col == header.size()) throw ConfigError("dataset header lacks a 'y' column");
  if (feature_col.empty()) throw ConfigError("dataset header lacks x0.. columns");
  const std::size_t k = feature_col.size();
  if (feature_col.rbegin()->first != k - 1) {
    throw ConfigError("dataset feature columns must be x0..x" + std::to_string(k - 1));
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError("dataset line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " cells");
    }
    std::vector<double> row(k + 1);
    for (const auto& [f, c] : feature_col) row[f] = parse_cell(cells[c], line_no);
    row[k] = parse_cell(cells[y_col], line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("dataset " + path.string() + " has no samples");

  Dataset d;
  d.n = rows.size();
  d.k = k;
  d.features.resize(d.n * k);
  d.targets.resize(d.n);
  for (std::size_t i = 0; i < d.n; ++i) {
    for (std::size_t f = 0; f < k; ++f) d.features[f * d.n + i] = rows[i][f];
    d.targets[i] = rows[i][k];
  }
  return d;
}

}  // namespace eos
