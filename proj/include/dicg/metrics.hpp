#pragma once

#include <string>
#include <vector>

namespace dicg {

// Fixed training-metrics schema, one row per iteration. wallclock_s is zero
// unless wallclock timing was requested, keeping metrics byte-reproducible.
extern const std::vector<std::string> kTrainMetricsColumns;

// Append-only CSV with a fixed column set. The header is written when the
// file is created or empty; appends to an existing file require the header
// to match. Doubles are written in shortest round-trip form.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);  // training schema
  MetricsWriter(const std::string& path, std::vector<std::string> columns);

  void append_row(const std::vector<double>& cells);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::string& path() const { return path_; }

  template <typename Row>
  void append(const Row& m) {
    append_row({static_cast<double>(m.iteration), static_cast<double>(m.env_steps_total),
                m.mean_return, m.success_rate, m.policy_loss, m.value_loss, m.entropy,
                m.approx_kl, m.wallclock_s});
  }

 private:
  void open_and_check();
  std::string path_;
  std::vector<std::string> columns_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
};

// Strict reader: exact column count per row, all cells numeric; throws on
// any violation.
CsvTable read_csv_strict(const std::string& path);

// Lenient reader: malformed rows are skipped with a warning message.
CsvTable read_csv_lenient(const std::string& path, std::vector<std::string>* warnings);

std::string format_double(double x);

}  // namespace dicg
