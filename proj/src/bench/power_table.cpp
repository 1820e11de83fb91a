#include "gkt/bench/power_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "gkt/error.hpp"

namespace gkt::bench {

double power_se(double power, std::size_t reps) noexcept {
  if (reps == 0) return 0.0;
  return std::sqrt(std::max(0.0, power * (1.0 - power)) / static_cast<double>(reps));
}

void PowerTable::add(std::string method, double param, std::size_t rejections, std::size_t reps) {
  require(reps > 0 && rejections <= reps, ErrorKind::invalid_parameter, "bad rejection count");
  const double p = static_cast<double>(rejections) / static_cast<double>(reps);
  rows.push_back({std::move(method), param, p, power_se(p, reps), reps});
}

const PowerRow& PowerTable::find(const std::string& method) const {
  for (const PowerRow& r : rows)
    if (r.method == method) return r;
  fail(ErrorKind::invalid_config, "no row for method " + method);
}

const PowerRow& PowerTable::find(const std::string& method, double param) const {
  for (const PowerRow& r : rows)
    if (r.method == method && std::abs(r.param - param) < 1e-9) return r;
  fail(ErrorKind::invalid_config, "no row for method " + method);
}

std::vector<PowerRow> PowerTable::method_rows(const std::string& method) const {
  std::vector<PowerRow> out;
  for (const PowerRow& r : rows)
    if (r.method == method) out.push_back(r);
  return out;
}

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_csv(const PowerTable& table, std::ostream& out) {
  out << "method,param,power,se,reps\n";
  for (const PowerRow& r : table.rows)
    out << r.method << ',' << shortest(r.param) << ',' << shortest(r.power) << ','
        << shortest(r.se) << ',' << r.reps << '\n';
}

PowerTable parse_power_csv(std::istream& in) {
  // The method column is text, so the numeric CSV reader is not used here.
  PowerTable table;
  std::string line;
  std::size_t row = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (line != "method,param,power,se,reps")
        fail(ErrorKind::parse_error, "unexpected header at row 1");
      header = true;
      continue;
    }
    std::istringstream cells(line);
    PowerRow r;
    std::string field;
    std::vector<std::string> f;
    while (std::getline(cells, field, ',')) f.push_back(field);
    if (f.size() != 5)
      fail(ErrorKind::parse_error, "expected 5 cells at row " + std::to_string(row));
    r.method = f[0];
    try {
      r.param = std::stod(f[1]);
      r.power = std::stod(f[2]);
      r.se = std::stod(f[3]);
      r.reps = std::stoul(f[4]);
    } catch (const std::exception&) {
      fail(ErrorKind::parse_error, "bad number at row " + std::to_string(row));
    }
    table.rows.push_back(r);
  }
  if (!header) fail(ErrorKind::parse_error, "missing header row");
  return table;
}

void write_svg(const PowerTable& table, std::ostream& out, const std::string& title) {
  constexpr double W = 640, H = 400, L = 60, R = 130, T = 40, Bm = 50;
  std::map<std::string, std::vector<PowerRow>> series;
  std::vector<std::string> order;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const PowerRow& r : table.rows) {
    if (!series.count(r.method)) order.push_back(r.method);
    series[r.method].push_back(r);
    lo = std::min(lo, r.param);
    hi = std::max(hi, r.param);
  }
  if (!(lo < hi)) {
    lo = std::isfinite(lo) ? lo - 1.0 : 0.0;
    hi = lo + 2.0;
  }
  auto px = [&](double v) { return L + (v - lo) / (hi - lo) * (W - L - R); };
  auto py = [&](double p) { return H - Bm - p * (H - T - Bm); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double p = k / 4.0;
    out << "<text x=\"" << L - 8 << "\" y=\"" << py(p) + 4 << "\" text-anchor=\"end\">" << p
        << "</text>\n";
    const double v = lo + (hi - lo) * k / 4.0;
    out << "<text x=\"" << px(v) << "\" y=\"" << H - Bm + 18 << "\" text-anchor=\"middle\">" << v
        << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">param</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - Bm) / 2 << "\" transform=\"rotate(-90 16 "
      << (T + H - Bm) / 2 << ")\" text-anchor=\"middle\">power</text>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    auto rows = series[order[s]];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const PowerRow& a, const PowerRow& b) { return a.param < b.param; });
    const char* color = colors[s % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const PowerRow& r : rows) out << px(r.param) << ',' << py(r.power) << ' ';
    out << "\"/>\n";
    for (const PowerRow& r : rows)
      out << "<circle cx=\"" << px(r.param) << "\" cy=\"" << py(r.power) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" fill=\"" << color
        << "\">" << order[s] << "</text>\n";
  }
  out << "</svg>\n";
}

void save_table(const PowerTable& table, const std::filesystem::path& path,
                const std::string& format, const std::string& title) {
  require(format == "csv" || format == "svg", ErrorKind::invalid_config,
          "format must be csv or svg");
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io_error, "cannot write " + path.string());
  if (format == "csv")
    write_csv(table, out);
  else
    write_svg(table, out, title);
  if (!out) fail(ErrorKind::io_error, "write failed for " + path.string());
}

}  // namespace gkt::bench
