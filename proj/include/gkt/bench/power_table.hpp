#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gkt::bench {

struct PowerRow {
  std::string method;
  /// log nu for fixed-nu rows, mean log nu_med for median rows, d for adaptive rows.
  double param = 0.0;
  double power = 0.0;
  double se = 0.0;
  std::size_t reps = 0;
};

/// sqrt(p (1 - p) / reps).
double power_se(double power, std::size_t reps) noexcept;

struct PowerTable {
  std::vector<PowerRow> rows;

  void add(std::string method, double param, std::size_t rejections, std::size_t reps);
  /// First row with this method label (and param, when given); throws invalid-config.
  const PowerRow& find(const std::string& method) const;
  const PowerRow& find(const std::string& method, double param) const;
  std::vector<PowerRow> method_rows(const std::string& method) const;
};

/// Header `method,param,power,se,reps`, then one line per row.
void write_csv(const PowerTable& table, std::ostream& out);
PowerTable parse_power_csv(std::istream& in);
/// Line chart of power against param, one polyline per method.
void write_svg(const PowerTable& table, std::ostream& out, const std::string& title = "");

/// Writes csv or svg to `path`; throws io-error when it cannot be opened.
void save_table(const PowerTable& table, const std::filesystem::path& path,
                const std::string& format, const std::string& title = "");

}  // namespace gkt::bench
