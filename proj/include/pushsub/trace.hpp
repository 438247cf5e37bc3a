#ifndef PUSHSUB_TRACE_HPP
#define PUSHSUB_TRACE_HPP

/// \file trace.hpp
/// \brief Per-step records of a push-subgradient run and the running
/// averages whose optimality gap the finite-time bounds control.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushsub/subgradient.hpp"

namespace pushsub {

/// State at time t plus diagnostics of the transition t -> t+1.
struct StepRecord {
  std::size_t t = 0;
  double alpha = 0.0;
  Matrix x;  // n x d
  Vector y;
  Matrix z;  // n x d, x_i / y_i
  Matrix g;  // n x d, subgradients at z(t)
  Vector zbar;       // (1/n) sum_i z_i(t)
  Vector lyapunov;   // pi(t)^T z(t) with pi = y/n
  double consensus_err = 0.0;
  double gap_running_avg = std::numeric_limits<double>::quiet_NaN();

  // transition diagnostics
  double lyapunov_residual = 0.0;    // max_k |<z(t+1)> - <z(t)> + (alpha/n) sum_i g_i(t)|
  double zspace_residual = 0.0;      // max |z(t+1) from (x, y) - z(t+1) from S(t)|
  double pi_residual = 0.0;          // ||pi(t)^T - pi(t+1)^T S(t)||_inf
  double consensus_deviation = 0.0;  // max_i ||z_i(t+1) - (1/n) sum_j (x_j - alpha g_j)||
  double max_subgradient_norm = 0.0;
};

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string graph_kind;
  std::string schedule;
  std::string objective;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t steps = 0;
  std::optional<std::size_t> window;  // connectivity certificate over the run horizon
};

struct RunTrace {
  RunMetadata meta;
  std::vector<StepRecord> steps;
  NetworkState final_state;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  /// min over all recorded times (final state included) and agents of y_i.
  double min_weight() const {
    double m = final_state.y.size() ? final_state.y.minCoeff()
                                    : std::numeric_limits<double>::infinity();
    for (const auto& r : steps) m = std::min(m, r.y.minCoeff());
    return m;
  }
};

/// sum_{tau <= upto} alpha(tau) s(tau) / sum_{tau <= upto} alpha(tau), with
/// s = zbar or s = z_agent. When every alpha in range is zero the plain mean
/// is returned.
inline Vector weighted_running_average(const RunTrace& trace, std::size_t upto,
                                       std::optional<std::size_t> agent = std::nullopt) {
  if (trace.empty()) throw std::invalid_argument("weighted_running_average: empty trace");
  if (upto >= trace.size())
    throw std::out_of_range("weighted_running_average: index beyond trace");
  const auto& first = trace.steps.front();
  Vector acc = Vector::Zero(first.zbar.size());
  Vector plain = acc;
  double weight = 0.0;
  for (std::size_t tau = 0; tau <= upto; ++tau) {
    const StepRecord& r = trace.steps[tau];
    const Vector s = agent ? Vector(r.z.row(Eigen::Index(*agent)).transpose()) : r.zbar;
    acc += r.alpha * s;
    plain += s;
    weight += r.alpha;
  }
  if (weight > 0.0) return acc / weight;
  return plain / static_cast<double>(upto + 1);
}

/// All prefixes at once: entry t equals weighted_running_average(trace, t, agent).
inline std::vector<Vector> running_averages(const RunTrace& trace,
                                            std::optional<std::size_t> agent = std::nullopt) {
  std::vector<Vector> out;
  if (trace.empty()) return out;
  out.reserve(trace.size());
  Vector acc = Vector::Zero(trace.steps.front().zbar.size());
  Vector plain = acc;
  double weight = 0.0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const StepRecord& r = trace.steps[t];
    const Vector s = agent ? Vector(r.z.row(Eigen::Index(*agent)).transpose()) : r.zbar;
    acc += r.alpha * s;
    plain += s;
    weight += r.alpha;
    out.push_back(weight > 0.0 ? Vector(acc / weight) : Vector(plain / double(t + 1)));
  }
  return out;
}

}  // namespace pushsub

#endif  // PUSHSUB_TRACE_HPP
