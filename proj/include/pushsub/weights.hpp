#ifndef PUSHSUB_WEIGHTS_HPP
#define PUSHSUB_WEIGHTS_HPP

/// \file weights.hpp
/// \brief Column-stochastic mixing matrices compliant with a digraph.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushsub/graph.hpp"

namespace pushsub {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance on column sums for matrices built here.
inline constexpr double kConstructedStochasticTol = 1e-12;
/// Tolerance on column sums for matrices read from user input.
inline constexpr double kUserStochasticTol = 1e-9;

/// Entry (i, j) is w_ij: the share of agent j's mass sent to agent i.
struct WeightMatrix {
  Matrix entries;
  double beta = 0.0;  // smallest positive entry

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

inline double smallest_positive_entry(const Matrix& m) {
  double b = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) > 0.0) b = std::min(b, m(i, j));
  return std::isfinite(b) ? b : 0.0;
}

enum class ViolationKind { ColumnSum, Support, BelowBeta, ZeroDiagonal, Negative, Shape };

inline std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::ColumnSum: return "column-sum";
    case ViolationKind::Support: return "support";
    case ViolationKind::BelowBeta: return "below-beta";
    case ViolationKind::ZeroDiagonal: return "zero-diagonal";
    case ViolationKind::Negative: return "negative-entry";
    case ViolationKind::Shape: return "shape";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  std::string summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) os << to_string(v.kind) << ": " << v.message << "; ";
    return os.str();
  }
};

/// Checks the mixing-weight assumption: columns sum to one, w_ij > 0 exactly
/// on arcs (j, i), every positive entry is at least beta_min, positive diagonal.
inline ValidationReport validate_column_stochastic(const Matrix& w, const Digraph& g,
                                                   double beta_min,
                                                   double tol = kConstructedStochasticTol) {
  ValidationReport report;
  const auto n = static_cast<Eigen::Index>(g.size());
  if (w.rows() != n || w.cols() != n) {
    report.violations.push_back({ViolationKind::Shape, 0, 0, 0.0,
                                 "matrix is " + std::to_string(w.rows()) + "x" +
                                     std::to_string(w.cols()) + ", graph has n=" +
                                     std::to_string(n)});
    return report;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = w.col(j).sum();
    if (std::abs(s - 1.0) > tol) {
      std::ostringstream os;
      os.precision(17);
      os << "column " << j + 1 << " sums to " << s;
      report.violations.push_back({ViolationKind::ColumnSum, 0, std::size_t(j), s, os.str()});
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = w(i, j);
      const auto ui = std::size_t(i), uj = std::size_t(j);
      const std::string at = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (v < 0.0) {
        report.violations.push_back({ViolationKind::Negative, ui, uj, v, "negative entry at " + at});
        continue;
      }
      const bool arc = g.has_arc(uj, ui);
      if (v > 0.0 && !arc)
        report.violations.push_back(
            {ViolationKind::Support, ui, uj, v, "positive entry at " + at + " without arc"});
      if (arc && i != j && v == 0.0)
        report.violations.push_back(
            {ViolationKind::Support, ui, uj, v, "arc without positive weight at " + at});
      if (v > 0.0 && v < beta_min)
        report.violations.push_back(
            {ViolationKind::BelowBeta, ui, uj, v, "entry at " + at + " below beta_min"});
    }
    if (w(i, i) <= 0.0)
      report.violations.push_back({ViolationKind::ZeroDiagonal, std::size_t(i), std::size_t(i),
                                   w(i, i), "diagonal " + std::to_string(i + 1) + " not positive"});
  }
  return report;
}

inline ValidationReport validate_column_stochastic(const WeightMatrix& w, const Digraph& g,
                                                   double beta_min,
                                                   double tol = kConstructedStochasticTol) {
  return validate_column_stochastic(w.entries, g, beta_min, tol);
}

enum class WeightRuleKind { UniformOutDegree, Custom };

struct WeightRule {
  WeightRuleKind kind = WeightRuleKind::UniformOutDegree;
  Matrix custom;  // Custom only

  static WeightRule uniform_out_degree() { return {}; }
  static WeightRule custom_entries(Matrix m) { return {WeightRuleKind::Custom, std::move(m)}; }
};

/// uniform-out-degree sets w_ij = 1/|N_j^-| on every arc (j, i). Custom
/// entries are validated against g and returned unchanged; they are never
/// repaired.
inline WeightMatrix build_weights(const Digraph& g, const WeightRule& rule) {
  if (!g.has_all_self_arcs())
    throw std::invalid_argument("build_weights: graph lacks a self-arc");
  const auto n = static_cast<Eigen::Index>(g.size());
  WeightMatrix w;
  if (rule.kind == WeightRuleKind::UniformOutDegree) {
    w.entries = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double share = 1.0 / static_cast<double>(g.out_degree(std::size_t(j)));
      for (Eigen::Index i = 0; i < n; ++i)
        if (g.has_arc(std::size_t(j), std::size_t(i))) w.entries(i, j) = share;
    }
  } else {
    const ValidationReport r =
        validate_column_stochastic(rule.custom, g, std::numeric_limits<double>::min(),
                                   kUserStochasticTol);
    if (!r.ok())
      throw std::invalid_argument("custom weights violate the mixing assumption: " +
                                  r.summary());
    w.entries = rule.custom;
  }
  w.beta = smallest_positive_entry(w.entries);
  return w;
}

/// Dense text matrices, row-major and whitespace-separated, one row per line.
/// Consecutive matrices are separated by one or more blank lines.
inline std::vector<Matrix> read_dense_matrices(std::istream& is) {
  std::vector<Matrix> out;
  std::vector<std::vector<double>> rows;
  auto flush = [&] {
    if (rows.empty()) return;
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[std::size_t(i)].size()) != n)
        throw std::runtime_error("weights file: matrix " + std::to_string(out.size() + 1) +
                                 " is not square");
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[std::size_t(i)][std::size_t(j)];
    }
    out.push_back(std::move(m));
    rows.clear();
  };
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        throw std::runtime_error("weights file: bad number '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty())
      flush();
    else
      rows.push_back(std::move(row));
  }
  flush();
  if (out.empty()) throw std::runtime_error("weights file: no matrix found");
  return out;
}

inline void write_dense_matrix(std::ostream& os, const Matrix& m) {
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      os << (j ? " " : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace pushsub

#endif  // PUSHSUB_WEIGHTS_HPP
