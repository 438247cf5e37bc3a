#ifndef PUSHSUB_ENGINE_HPP
#define PUSHSUB_ENGINE_HPP

/// \file engine.hpp
/// \brief Single-threaded, deterministic stepping loop that produces a
/// RunTrace, and the pure push-sum probe used to measure mixing rates.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushsub/trace.hpp"

namespace pushsub {

/// Raised when an iterate leaves the objective's box or a subgradient exceeds
/// the declared G; either voids the bound hypotheses for the run.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_hypotheses(const ObjectiveSpec& obj, const Matrix& z, const Matrix& g,
                             std::size_t t) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (!obj.box.contains(z.row(i).transpose())) {
      std::ostringstream os;
      os << "agent " << i + 1 << " left the objective box at t=" << t << " (z=" << z.row(i)
         << "); the declared G no longer covers the trajectory";
      throw HypothesisViolation(os.str());
    }
    const double gn = g.row(i).norm();
    if (gn > obj.G * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "agent " << i + 1 << " emitted subgradient norm " << gn << " > G=" << obj.G
         << " at t=" << t;
      throw HypothesisViolation(os.str());
    }
  }
}

}  // namespace detail

/// Runs `steps` push-subgradient iterations on the given weight sequence,
/// recording t = 0 .. steps-1. The final state (time `steps`) is kept in
/// RunTrace::final_state.
inline RunTrace simulate(std::span<const WeightMatrix> ws, const ObjectiveSpec& obj,
                         const StepsizeSchedule& schedule, const Matrix& x0, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("simulate: steps must be >= 1");
  if (ws.size() < steps) throw std::invalid_argument("simulate: fewer weight matrices than steps");
  if (x0.rows() != Eigen::Index(obj.agents) || x0.cols() != Eigen::Index(obj.d))
    throw std::invalid_argument("simulate: x0 shape does not match the objective");
  const auto n = static_cast<double>(obj.agents);

  RunTrace trace;
  trace.meta.n = obj.agents;
  trace.meta.d = obj.d;
  trace.meta.steps = steps;
  trace.meta.objective = to_string(obj.kind);
  trace.meta.schedule = to_string(schedule.kind);
  trace.steps.reserve(steps);

  NetworkState state = make_initial_state(x0);
  Matrix z = ratio_state(state);
  Vector avg_acc = Vector::Zero(Eigen::Index(obj.d));
  Vector plain_acc = avg_acc;
  double weight_acc = 0.0;

  for (std::size_t t = 0; t < steps; ++t) {
    const WeightMatrix& w = ws[t];
    StepRecord r;
    r.t = t;
    r.alpha = stepsize(schedule, t);
    r.g = subgradients(obj, z);
    detail::check_hypotheses(obj, z, r.g, t);
    r.max_subgradient_norm = r.g.rowwise().norm().maxCoeff();
    r.zbar = z.colwise().mean().transpose();
    const Vector pi = state.y / n;
    r.lyapunov = z.transpose() * pi;
    r.consensus_err = consensus_error(z);

    avg_acc += r.alpha * r.zbar;
    plain_acc += r.zbar;
    weight_acc += r.alpha;
    if (obj.fstar) {
      const Vector avg =
          weight_acc > 0.0 ? Vector(avg_acc / weight_acc) : Vector(plain_acc / double(t + 1));
      r.gap_running_avg = optimality_gap(obj, avg);
    }

    NetworkState next = pushsub_step(state, w, r.alpha, r.g);
    const Matrix z_next = ratio_state(next);

    const Vector pi_next = next.y / n;
    const Vector lyap_next = z_next.transpose() * pi_next;
    const Vector predicted = r.lyapunov - (r.alpha / n) * r.g.colwise().sum().transpose();
    r.lyapunov_residual = (lyap_next - predicted).cwiseAbs().maxCoeff();

    const SMatrix s = build_s_matrix(w, state.y);
    r.pi_residual = pi_recursion_residual(pi, pi_next, s);
    r.zspace_residual = (zspace_step(z, state.y, w, r.alpha, r.g) - z_next).cwiseAbs().maxCoeff();

    const Eigen::RowVectorXd center = (state.x - r.alpha * r.g).colwise().sum() / n;
    double dev = 0.0;
    for (Eigen::Index i = 0; i < z_next.rows(); ++i)
      dev = std::max(dev, (z_next.row(i) - center).norm());
    r.consensus_deviation = dev;

    r.x = state.x;
    r.y = state.y;
    r.z = z;
    trace.steps.push_back(std::move(r));

    state = std::move(next);
    z = z_next;
  }
  trace.final_state = std::move(state);
  return trace;
}

/// Consensus error of pure push-sum started from x(0) = I (one coordinate per
/// agent), i.e. max_i || row_i(Phi_S(t,0)) - (1/n) 1^T ||. Entry t is the
/// value at time t, t = 0 .. steps.
inline std::vector<double> probe_consensus_errors(std::span<const WeightMatrix> ws,
                                                  std::size_t steps) {
  if (ws.empty()) throw std::invalid_argument("probe_consensus_errors: no weights");
  steps = std::min(steps, ws.size());
  const auto n = Eigen::Index(ws.front().size());
  NetworkState s = make_initial_state(Matrix::Identity(n, n));
  std::vector<double> out;
  out.reserve(steps + 1);
  out.push_back(consensus_error(ratio_state(s)));
  for (std::size_t t = 0; t < steps; ++t) {
    s = pushsum_step(s, ws[t]);
    out.push_back(consensus_error(ratio_state(s)));
  }
  return out;
}

}  // namespace pushsub

#endif  // PUSHSUB_ENGINE_HPP
