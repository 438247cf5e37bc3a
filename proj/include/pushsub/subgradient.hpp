#ifndef PUSHSUB_SUBGRADIENT_HPP
#define PUSHSUB_SUBGRADIENT_HPP

/// \file subgradient.hpp
/// \brief Convex per-agent objectives with subgradient oracles, stepsize
/// schedules, and the push-subgradient update.
///
/// The network objective is f(z) = (1/n) sum_i f_i(z). Every objective kind
/// declares a box; the subgradient bound G is only claimed on that box and
/// the simulation engine aborts if an iterate leaves it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushsub/pushsum.hpp"

namespace pushsub {

struct Box {
  Vector lo;
  Vector hi;

  std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }

  bool contains(const Vector& z) const {
    return (z.array() >= lo.array()).all() && (z.array() <= hi.array()).all();
  }

  static Box cube(std::size_t d, double lo, double hi) {
    return {Vector::Constant(Eigen::Index(d), lo), Vector::Constant(Eigen::Index(d), hi)};
  }
};

enum class ObjectiveKind { Quadratic, L1, Hinge, Zero };

inline std::string to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::Quadratic: return "quadratic";
    case ObjectiveKind::L1: return "l1";
    case ObjectiveKind::Hinge: return "hinge";
    case ObjectiveKind::Zero: return "zero";
  }
  return "unknown";
}

inline ObjectiveKind parse_objective_kind(const std::string& s) {
  if (s == "quadratic") return ObjectiveKind::Quadratic;
  if (s == "l1") return ObjectiveKind::L1;
  if (s == "hinge") return ObjectiveKind::Hinge;
  if (s == "zero") return ObjectiveKind::Zero;
  throw std::invalid_argument("unknown objective kind '" + s + "'");
}

/// Per-agent terms, all of one kind:
///   quadratic  f_i(z) = ||z - a_i||^2
///   l1         f_i(z) = sum_k |z_k - a_ik|
///   hinge      f_i(z) = max(0, 1 - b_i <w_i, z>)
///   zero       f_i(z) = 0
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::Zero;
  std::size_t d = 1;
  Matrix targets;   // n x d, a_i (quadratic, l1)
  Matrix features;  // n x d, w_i (hinge)
  Vector labels;    // n, b_i (hinge)
  std::size_t agents = 0;
  Box box;
  double G = 0.0;  // declared bound on ||g_i|| over the box
  std::optional<Vector> zstar;
  std::optional<double> fstar;
  std::string optimum_provenance;
};

inline double term_value(const ObjectiveSpec& obj, std::size_t i, const Vector& z) {
  const auto r = Eigen::Index(i);
  switch (obj.kind) {
    case ObjectiveKind::Quadratic: return (z - obj.targets.row(r).transpose()).squaredNorm();
    case ObjectiveKind::L1: return (z - obj.targets.row(r).transpose()).cwiseAbs().sum();
    case ObjectiveKind::Hinge:
      return std::max(0.0, 1.0 - obj.labels(r) * obj.features.row(r).dot(z));
    case ObjectiveKind::Zero: return 0.0;
  }
  throw std::invalid_argument("term_value: unknown objective kind");
}

/// f(z) = (1/n) sum_i f_i(z)
inline double objective_value(const ObjectiveSpec& obj, const Vector& z) {
  double s = 0.0;
  for (std::size_t i = 0; i < obj.agents; ++i) s += term_value(obj, i, z);
  return s / static_cast<double>(obj.agents);
}

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// A subgradient of f_i at z. At kinks the minimum-norm canonical choice is
/// taken: sign(0) = 0 for l1, the inactive side (zero) for hinge.
inline Vector subgradient(const ObjectiveSpec& obj, std::size_t i, const Vector& z) {
  if (!z.allFinite()) throw std::invalid_argument("subgradient: non-finite point");
  const auto r = Eigen::Index(i);
  switch (obj.kind) {
    case ObjectiveKind::Quadratic: return 2.0 * (z - obj.targets.row(r).transpose());
    case ObjectiveKind::L1: return (z - obj.targets.row(r).transpose()).unaryExpr([](double v) { return sign0(v); });
    case ObjectiveKind::Hinge: {
      const double margin = 1.0 - obj.labels(r) * obj.features.row(r).dot(z);
      if (margin > 0.0) return -obj.labels(r) * obj.features.row(r).transpose();
      return Vector::Zero(z.size());
    }
    case ObjectiveKind::Zero: return Vector::Zero(z.size());
  }
  throw std::invalid_argument("subgradient: unknown objective kind");
}

/// One subgradient per agent, evaluated at the rows of z.
inline Matrix subgradients(const ObjectiveSpec& obj, const Matrix& z) {
  Matrix g(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    g.row(i) = subgradient(obj, std::size_t(i), z.row(i).transpose()).transpose();
  return g;
}

/// Supremum of ||g_i|| over the box for the oracle above.
inline double subgradient_bound_on_box(const ObjectiveSpec& obj) {
  double bound = 0.0;
  for (std::size_t i = 0; i < obj.agents; ++i) {
    const auto r = Eigen::Index(i);
    double b = 0.0;
    switch (obj.kind) {
      case ObjectiveKind::Quadratic: {
        double sq = 0.0;
        for (Eigen::Index k = 0; k < obj.box.lo.size(); ++k) {
          const double a = obj.targets(r, k);
          sq += std::max(std::pow(obj.box.lo(k) - a, 2), std::pow(obj.box.hi(k) - a, 2));
        }
        b = 2.0 * std::sqrt(sq);
        break;
      }
      case ObjectiveKind::L1: b = std::sqrt(static_cast<double>(obj.d)); break;
      case ObjectiveKind::Hinge: b = std::abs(obj.labels(r)) * obj.features.row(r).norm(); break;
      case ObjectiveKind::Zero: b = 0.0; break;
    }
    bound = std::max(bound, b);
  }
  return bound;
}

namespace detail {

inline void check_objective_shape(const ObjectiveSpec& obj) {
  if (obj.agents == 0) throw std::invalid_argument("objective: no agents");
  if (obj.box.lo.size() != Eigen::Index(obj.d) || obj.box.hi.size() != Eigen::Index(obj.d))
    throw std::invalid_argument("objective: box dimension differs from d");
  if ((obj.box.lo.array() > obj.box.hi.array()).any())
    throw std::invalid_argument("objective: box has lo > hi");
}

/// Declared G: the caller's value if it is at least the box supremum,
/// otherwise an error. A zero supremum is declared as 1 so that G > 0.
inline void declare_bound(ObjectiveSpec& obj, std::optional<double> declared) {
  const double sound = subgradient_bound_on_box(obj);
  if (declared) {
    if (!(*declared >= sound) || !(*declared > 0.0))
      throw std::invalid_argument("objective: declared G=" + std::to_string(*declared) +
                                  " is below the subgradient bound " + std::to_string(sound) +
                                  " on the box");
    obj.G = *declared;
  } else {
    obj.G = sound > 0.0 ? sound : 1.0;
  }
}

inline Vector coordinatewise_median(const Matrix& a) {
  Vector m(a.cols());
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    std::vector<double> col(a.col(k).data(), a.col(k).data() + a.rows());
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    m(k) = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return m;
}

}  // namespace detail

struct GridOptimum {
  Vector zstar;
  double fstar = 0.0;
};

/// Dense grid over the box followed by repeated zooming around the best
/// point. Meant for d <= 2.
inline GridOptimum grid_minimize(const ObjectiveSpec& obj, int resolution = 201,
                                 int rounds = 40) {
  if (obj.d == 0 || obj.d > 2) throw std::invalid_argument("grid_minimize: needs d in {1, 2}");
  Vector lo = obj.box.lo, hi = obj.box.hi;
  GridOptimum best{lo, std::numeric_limits<double>::infinity()};
  for (int round = 0; round < rounds; ++round) {
    const Vector step = (hi - lo) / double(resolution - 1);
    const int ny = obj.d == 2 ? resolution : 1;
    for (int a = 0; a < resolution; ++a) {
      for (int b = 0; b < ny; ++b) {
        Vector z(obj.d);
        z(0) = lo(0) + step(0) * a;
        if (obj.d == 2) z(1) = lo(1) + step(1) * b;
        const double f = objective_value(obj, z);
        if (f < best.fstar) best = {z, f};
      }
    }
    lo = (best.zstar - 2.0 * step).cwiseMax(obj.box.lo);
    hi = (best.zstar + 2.0 * step).cwiseMin(obj.box.hi);
    if (((hi - lo).array() <= 0.0).all()) break;
  }
  return best;
}

/// Fills z*, f* analytically where the kind allows (mean for quadratic,
/// coordinate-wise median for l1, zero), otherwise by grid_minimize when
/// d <= 2. An explicit zstar supplied by the caller wins.
inline void resolve_optimum(ObjectiveSpec& obj) {
  if (obj.zstar) {
    obj.fstar = objective_value(obj, *obj.zstar);
    if (obj.optimum_provenance.empty()) obj.optimum_provenance = "declared";
    return;
  }
  switch (obj.kind) {
    case ObjectiveKind::Quadratic:
      obj.zstar = obj.targets.colwise().mean().transpose();
      obj.optimum_provenance = "analytic-mean";
      break;
    case ObjectiveKind::L1:
      obj.zstar = detail::coordinatewise_median(obj.targets);
      obj.optimum_provenance = "analytic-median";
      break;
    case ObjectiveKind::Zero:
      obj.zstar = Vector::Zero(Eigen::Index(obj.d));
      obj.optimum_provenance = "analytic-zero";
      break;
    case ObjectiveKind::Hinge: {
      if (obj.d > 2) return;  // f* stays unknown
      const GridOptimum g = grid_minimize(obj);
      obj.zstar = g.zstar;
      obj.fstar = g.fstar;
      obj.optimum_provenance = "grid-refine";
      return;
    }
  }
  obj.fstar = objective_value(obj, *obj.zstar);
}

namespace detail {

inline ObjectiveSpec targets_objective(ObjectiveKind kind, Matrix targets, Box box,
                                       std::optional<double> G) {
  ObjectiveSpec obj;
  obj.kind = kind;
  obj.agents = std::size_t(targets.rows());
  obj.d = std::size_t(targets.cols());
  obj.targets = std::move(targets);
  obj.box = std::move(box);
  check_objective_shape(obj);
  declare_bound(obj, G);
  resolve_optimum(obj);
  return obj;
}

}  // namespace detail

inline ObjectiveSpec quadratic_objective(Matrix targets, Box box,
                                         std::optional<double> G = std::nullopt) {
  return detail::targets_objective(ObjectiveKind::Quadratic, std::move(targets), std::move(box), G);
}

inline ObjectiveSpec l1_objective(Matrix targets, Box box, std::optional<double> G = std::nullopt) {
  return detail::targets_objective(ObjectiveKind::L1, std::move(targets), std::move(box), G);
}

inline ObjectiveSpec hinge_objective(Matrix features, Vector labels, Box box,
                                     std::optional<double> G = std::nullopt) {
  if (labels.size() != features.rows())
    throw std::invalid_argument("hinge objective: one label per agent required");
  ObjectiveSpec obj;
  obj.kind = ObjectiveKind::Hinge;
  obj.agents = std::size_t(features.rows());
  obj.d = std::size_t(features.cols());
  obj.features = std::move(features);
  obj.labels = std::move(labels);
  obj.box = std::move(box);
  detail::check_objective_shape(obj);
  detail::declare_bound(obj, G);
  resolve_optimum(obj);
  return obj;
}

inline ObjectiveSpec zero_objective(std::size_t agents, Box box,
                                    std::optional<double> G = std::nullopt) {
  ObjectiveSpec obj;
  obj.kind = ObjectiveKind::Zero;
  obj.agents = agents;
  obj.d = box.dim();
  obj.box = std::move(box);
  detail::check_objective_shape(obj);
  detail::declare_bound(obj, G);
  resolve_optimum(obj);
  return obj;
}

/// f(point) - f*. Not clipped; tiny negative values are float noise and are
/// clipped only by reporting code.
inline double optimality_gap(const ObjectiveSpec& obj, const Vector& point) {
  if (!obj.fstar)
    throw std::logic_error("optimality_gap: f* unknown for this objective; resolve it first");
  return objective_value(obj, point) - *obj.fstar;
}

inline double reported_gap(double gap) { return (gap < 0.0 && gap >= -1e-12) ? 0.0 : gap; }

// ---------------------------------------------------------------------------
// Stepsize schedules

enum class ScheduleKind { Harmonic, Polynomial, FixedHorizon, Zero };

inline std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Harmonic: return "harmonic";
    case ScheduleKind::Polynomial: return "polynomial";
    case ScheduleKind::FixedHorizon: return "fixed-horizon";
    case ScheduleKind::Zero: return "zero";
  }
  return "unknown";
}

inline ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "harmonic") return ScheduleKind::Harmonic;
  if (s == "polynomial") return ScheduleKind::Polynomial;
  if (s == "fixed-horizon") return ScheduleKind::FixedHorizon;
  if (s == "zero") return ScheduleKind::Zero;
  throw std::invalid_argument("unknown schedule kind '" + s + "'");
}

/// harmonic a/(t+1), polynomial a/(t+1)^p, fixed-horizon 1/sqrt(T) for
/// t < T, and zero (pure push-sum).
struct StepsizeSchedule {
  ScheduleKind kind = ScheduleKind::Harmonic;
  double a = 1.0;
  double p = 1.0;
  std::size_t T = 0;

  static StepsizeSchedule harmonic(double a) { return {ScheduleKind::Harmonic, a, 1.0, 0}; }
  static StepsizeSchedule polynomial(double a, double p) {
    return {ScheduleKind::Polynomial, a, p, 0};
  }
  static StepsizeSchedule fixed_horizon(std::size_t T) {
    return {ScheduleKind::FixedHorizon, 1.0, 0.0, T};
  }
  static StepsizeSchedule zero() { return {ScheduleKind::Zero, 0.0, 0.0, 0}; }
};

inline double stepsize(const StepsizeSchedule& s, std::size_t t) {
  const double tp1 = static_cast<double>(t) + 1.0;
  switch (s.kind) {
    case ScheduleKind::Harmonic: return s.a / tp1;
    case ScheduleKind::Polynomial: return s.a / std::pow(tp1, s.p);
    case ScheduleKind::FixedHorizon:
      if (s.T == 0) throw std::invalid_argument("stepsize: fixed-horizon needs T > 0");
      if (t >= s.T)
        throw std::out_of_range("stepsize: fixed-horizon schedule queried at t=" +
                                std::to_string(t) + " >= T=" + std::to_string(s.T));
      return 1.0 / std::sqrt(static_cast<double>(s.T));
    case ScheduleKind::Zero: return 0.0;
  }
  throw std::invalid_argument("stepsize: unknown kind");
}

struct ScheduleReport {
  bool applicable = true;        // false for fixed-horizon and zero
  bool positive = false;
  bool non_increasing = false;   // numerical spot-check over t <= 1e4
  bool sum_diverges = false;     // sum alpha = infinity
  bool square_summable = false;  // sum alpha^2 < infinity
  std::string note;

  bool satisfies_assumption() const {
    return applicable && positive && non_increasing && sum_diverges && square_summable;
  }
};

/// Classifies the diminishing-stepsize assumption (positive, non-increasing,
/// non-summable, square-summable) per family; the series facts are the
/// p-series tests, non-increase is spot-checked numerically.
inline ScheduleReport validate_schedule(const StepsizeSchedule& s) {
  ScheduleReport r;
  switch (s.kind) {
    case ScheduleKind::FixedHorizon:
      r.applicable = false;
      r.positive = s.T > 0;
      r.non_increasing = true;
      r.note = "fixed regime, diminishing-stepsize assumption not applicable (alpha = 1/sqrt(T) over T steps)";
      return r;
    case ScheduleKind::Zero:
      r.applicable = false;
      r.non_increasing = true;
      r.note = "zero stepsize, pure push-sum; diminishing-stepsize assumption not applicable";
      return r;
    case ScheduleKind::Harmonic:
    case ScheduleKind::Polynomial: {
      const double p = s.kind == ScheduleKind::Harmonic ? 1.0 : s.p;
      r.positive = s.a > 0.0 && std::isfinite(s.a);
      r.sum_diverges = p <= 1.0;
      r.square_summable = p > 0.5;
      r.non_increasing = true;
      double prev = stepsize(s, 0);
      for (std::size_t t = 1; t <= 10000; ++t) {
        const double cur = stepsize(s, t);
        if (cur > prev) {
          r.non_increasing = false;
          break;
        }
        prev = cur;
      }
      if (!r.positive) r.note = "stepsize not positive";
      else if (!r.sum_diverges) r.note = "sum of alpha converges (p > 1)";
      else if (!r.square_summable) r.note = "sum of alpha^2 diverges (p <= 1/2)";
      else if (!r.non_increasing) r.note = "stepsize increases";
      else r.note = "satisfies the diminishing-stepsize assumption";
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Push-subgradient update

/// x' = W (x - alpha g), y' = W y, with g evaluated by the caller at the
/// pre-step ratios z(t) = x(t)/y(t). The subtraction happens before mixing.
inline NetworkState pushsub_step(const NetworkState& s, const WeightMatrix& w, double alpha,
                                 const Matrix& g) {
  check_dimensions(s, w.entries, "pushsub_step");
  if (g.rows() != s.x.rows() || g.cols() != s.x.cols())
    throw std::invalid_argument("pushsub_step: subgradient shape mismatch");
  if (!(alpha >= 0.0)) throw std::invalid_argument("pushsub_step: stepsize must be >= 0");
  NetworkState next;
  next.t = s.t + 1;
  next.x = w.entries * (s.x - alpha * g);
  next.y = w.entries * s.y;
  return next;
}

inline NetworkState pushsub_step(const NetworkState& s, const WeightMatrix& w, double alpha,
                                 const ObjectiveSpec& obj) {
  if (s.x.rows() != Eigen::Index(obj.agents) || s.x.cols() != Eigen::Index(obj.d))
    throw std::invalid_argument("pushsub_step: state does not match objective dimensions");
  return pushsub_step(s, w, alpha, subgradients(obj, ratio_state(s)));
}

/// Ratio-space form of the same update: z(t+1) = S(t) [z(t) - alpha g / y(t)],
/// row i of g divided by y_i. Used as an independent cross-check of
/// pushsub_step.
inline Matrix zspace_step(const Matrix& z, const Vector& y, const WeightMatrix& w, double alpha,
                          const Matrix& g) {
  const SMatrix s = build_s_matrix(w, y);
  Matrix shifted = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) shifted.row(i) -= alpha * g.row(i) / y(i);
  return s.entries * shifted;
}

}  // namespace pushsub

#endif  // PUSHSUB_SUBGRADIENT_HPP
