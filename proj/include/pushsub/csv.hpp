#ifndef PUSHSUB_CSV_HPP
#define PUSHSUB_CSV_HPP

/// \file csv.hpp
/// \brief Trace export. One row per recorded t; numbers use %.17g so a
/// re-import reproduces every double exactly. Bound columns hold "nan" at
/// times where no bound was evaluated.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushsub/trace.hpp"

namespace pushsub {

/// Per-step bound values aligned with RunTrace::steps.
struct BoundColumns {
  std::vector<double> lhs;
  std::vector<double> rhs_theory;
  std::vector<double> rhs_empirical;
  std::vector<std::array<double, 4>> terms;  // decomposition of rhs_empirical

  static BoundColumns empty(std::size_t steps) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    BoundColumns c;
    c.lhs.assign(steps, nan);
    c.rhs_theory.assign(steps, nan);
    c.rhs_empirical.assign(steps, nan);
    c.terms.assign(steps, {nan, nan, nan, nan});
    return c;
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> trace_header(std::size_t n, std::size_t d, bool with_bounds = true) {
  std::vector<std::string> h{"t", "alpha"};
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t k = 1; k <= d; ++k)
      h.push_back("z" + std::to_string(i) + "_" + std::to_string(k));
  for (std::size_t k = 1; k <= d; ++k) h.push_back("zbar_" + std::to_string(k));
  for (std::size_t k = 1; k <= d; ++k) h.push_back("lyap_" + std::to_string(k));
  h.emplace_back("consensus_err");
  h.emplace_back("gap_running_avg");
  if (with_bounds)
    for (const char* c : {"lhs", "rhs_theory", "rhs_empirical", "term1", "term2", "term3", "term4"})
      h.emplace_back(c);
  return h;
}

/// Writes the trace; the bound columns are appended only when `bounds` is given.
inline void export_trace(std::ostream& os, const RunTrace& trace,
                         const BoundColumns* bounds = nullptr) {
  if (trace.empty()) throw std::invalid_argument("export_trace: empty trace");
  if (bounds && (bounds->lhs.size() != trace.size() || bounds->terms.size() != trace.size() ||
                 bounds->rhs_theory.size() != trace.size() ||
                 bounds->rhs_empirical.size() != trace.size()))
    throw std::invalid_argument("export_trace: bound columns do not match the trace length");
  const auto header = trace_header(trace.meta.n, trace.meta.d, bounds != nullptr);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const StepRecord& r = trace.steps[t];
    os << r.t << ',' << format_double(r.alpha);
    for (Eigen::Index i = 0; i < r.z.rows(); ++i)
      for (Eigen::Index k = 0; k < r.z.cols(); ++k) os << ',' << format_double(r.z(i, k));
    for (Eigen::Index k = 0; k < r.zbar.size(); ++k) os << ',' << format_double(r.zbar(k));
    for (Eigen::Index k = 0; k < r.lyapunov.size(); ++k) os << ',' << format_double(r.lyapunov(k));
    os << ',' << format_double(r.consensus_err) << ',' << format_double(r.gap_running_avg);
    if (bounds) {
      os << ',' << format_double(bounds->lhs[t]) << ',' << format_double(bounds->rhs_theory[t])
         << ',' << format_double(bounds->rhs_empirical[t]);
      for (double v : bounds->terms[t]) os << ',' << format_double(v);
    }
    os << '\n';
  }
}

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw std::out_of_range("csv: no column '" + name + "'");
  }
  std::vector<double> column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error("csv: bad number '" + cell + "' on line " +
                                 std::to_string(lineno));
      row.push_back(v);
    }
    if (row.size() != table.header.size())
      throw std::runtime_error("csv: line " + std::to_string(lineno) + " has " +
                               std::to_string(row.size()) + " cells, header has " +
                               std::to_string(table.header.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace pushsub

#endif  // PUSHSUB_CSV_HPP
