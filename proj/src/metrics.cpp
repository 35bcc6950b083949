#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dicg/metrics.hpp"

namespace dicg {

const std::vector<std::string> kTrainMetricsColumns = {
    "iteration",   "env_steps_total", "mean_return", "success_rate", "policy_loss",
    "value_loss",  "entropy",         "approx_kl",   "wallclock_s"};

std::string format_double(double x) {
  if (x == static_cast<double>(static_cast<long long>(x)) && std::abs(x) < 1e15)
    return std::to_string(static_cast<long long>(x));
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_cell(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

}  // namespace

MetricsWriter::MetricsWriter(const std::string& path)
    : MetricsWriter(path, kTrainMetricsColumns) {}

MetricsWriter::MetricsWriter(const std::string& path, std::vector<std::string> columns)
    : path_(path), columns_(std::move(columns)) {
  open_and_check();
}

void MetricsWriter::open_and_check() {
  namespace fs = std::filesystem;
  std::string expected;
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (i) expected += ',';
    expected += columns_[i];
  }
  if (fs::exists(path_) && fs::file_size(path_) > 0) {
    std::ifstream in(path_);
    std::string header;
    std::getline(in, header);
    if (header != expected)
      throw std::runtime_error("metrics: existing file '" + path_ + "' has a different header");
    return;
  }
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw std::runtime_error("metrics: cannot open '" + path_ + "' for writing");
  out << expected << "\n";
}

void MetricsWriter::append_row(const std::vector<double>& cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("metrics: row has " + std::to_string(cells.size()) +
                                " cells, expected " + std::to_string(columns_.size()));
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("metrics: cannot append to '" + path_ + "'");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << format_double(cells[i]);
  }
  out << "\n";
  if (!out) throw std::runtime_error("metrics: write failed for '" + path_ + "'");
}

int CsvTable::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv_strict(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: '" + path + "' is empty");
  t.columns = split_line(line);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != t.columns.size())
      throw std::runtime_error("csv: '" + path + "' line " + std::to_string(lineno) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(t.columns.size()));
    std::vector<double> row(cells.size());
    for (size_t i = 0; i < cells.size(); ++i)
      if (!parse_cell(cells[i], &row[i]))
        throw std::runtime_error("csv: '" + path + "' line " + std::to_string(lineno) +
                                 ": non-numeric cell '" + cells[i] + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv_lenient(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) {
    if (warnings) warnings->push_back(path + ": empty file");
    return t;
  }
  t.columns = split_line(line);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    std::vector<double> row(cells.size());
    bool ok = cells.size() == t.columns.size();
    for (size_t i = 0; ok && i < cells.size(); ++i) ok = parse_cell(cells[i], &row[i]);
    if (!ok) {
      if (warnings)
        warnings->push_back(path + ": skipped malformed line " + std::to_string(lineno));
      continue;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace dicg
