#ifndef PUSHSUB_VERIFY_HPP
#define PUSHSUB_VERIFY_HPP

/// \file verify.hpp
/// \brief Invariant suite for a configuration over a short prefix of its
/// horizon. A failed weight check marks every dependent check SKIP.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pushsub/engine.hpp"
#include "pushsub/experiment.hpp"
#include "pushsub/prepare.hpp"

namespace pushsub {

inline constexpr std::size_t kVerifyHorizon = 60;
inline constexpr std::size_t kProductSpan = 50;
inline constexpr double kProductTol = 1e-9;

enum class CheckStatus { Pass, Fail, Skip };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skip: return "SKIP";
  }
  return "?";
}

struct InvariantCheck {
  std::string name;
  CheckStatus status = CheckStatus::Skip;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyResult {
  std::size_t horizon = 0;
  std::vector<InvariantCheck> checks;

  bool pass() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const InvariantCheck& c) { return c.status == CheckStatus::Fail; });
  }
  const InvariantCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline InvariantCheck at_most(std::string name, double value, double tol, std::string detail = {}) {
  InvariantCheck c{std::move(name), value <= tol ? CheckStatus::Pass : CheckStatus::Fail, value,
                   tol, std::move(detail)};
  return c;
}

inline InvariantCheck skipped(std::string name, std::string why) {
  return {std::move(name), CheckStatus::Skip, 0.0, 0.0, std::move(why)};
}

}  // namespace detail

inline VerifyResult verify_config(const ExperimentConfig& cfg,
                                  std::size_t horizon_cap = kVerifyHorizon) {
  PreparedRun run = prepare_inputs(cfg);
  VerifyResult v;
  v.horizon = std::min(run.steps(), horizon_cap);
  const std::size_t H = v.horizon;
  const std::size_t n = run.n();

  const std::vector<std::string> downstream{
      "mass conservation", "S row-stochastic", "S support", "S entry floor", "product identity",
      "absolute probability recursion", "absolute probability stochastic", "weight floor",
      "Lyapunov recursion", "z-space recursion"};

  // Weights are checked on the whole horizon, not only the verified prefix.
  std::size_t bad = 0;
  std::string first_bad;
  for (std::size_t t = 0; t < run.weight_reports.size(); ++t)
    if (!run.weight_reports[t].ok()) {
      if (!bad) first_bad = "t=" + std::to_string(t) + ": " + run.weight_reports[t].summary();
      ++bad;
    }
  if (bad) {
    v.checks.push_back({"mixing weights", CheckStatus::Fail, double(bad), 0.0,
                        std::to_string(bad) + " invalid matrices; first at " + first_bad});
    for (const auto& name : downstream)
      v.checks.push_back(detail::skipped(name, "mixing-weight assumption failed"));
    return v;
  }
  v.checks.push_back({"mixing weights", CheckStatus::Pass, 0.0, 0.0,
                      "column-stochastic and graph-compliant at all " +
                          std::to_string(run.weights.size()) + " steps"});
  if (run.window)
    v.checks.push_back({"connectivity certificate", CheckStatus::Pass, double(*run.window), 0.0,
                        "L=" + std::to_string(*run.window) + " over the generated horizon"});
  else
    v.checks.push_back({"connectivity certificate", CheckStatus::Fail, 0.0, 0.0,
                        "no window L makes every block union strongly connected"});

  // Pure push-sum over the prefix.
  NetworkState s = make_initial_state(run.x0);
  const Vector mass0 = run.x0.colwise().sum().transpose();
  std::vector<Vector> ys{s.y};
  std::vector<SMatrix> ss;
  double mass_drift = 0.0, s_rows = 0.0, pi_rec = 0.0, pi_stoch = stochastic_defect(s.y / double(n));
  double s_min = std::numeric_limits<double>::infinity(), beta_min = s_min, y_min = s.y.minCoeff();
  bool support_ok = true;
  std::string support_detail;
  for (std::size_t t = 0; t < H; ++t) {
    const WeightMatrix& w = run.weights[t];
    ss.push_back(build_s_matrix(w, s.y));
    const SMatrix& S = ss.back();
    s_rows = std::max(s_rows, (S.entries.rowwise().sum().array() - 1.0).abs().maxCoeff());
    for (Eigen::Index i = 0; i < S.entries.rows(); ++i)
      for (Eigen::Index j = 0; j < S.entries.cols(); ++j)
        if ((S.entries(i, j) > 0.0) != (w.entries(i, j) > 0.0) && support_ok) {
          support_ok = false;
          support_detail = "t=" + std::to_string(t) + " entry (" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + ")";
        }
    s_min = std::min(s_min, S.gamma);
    beta_min = std::min(beta_min, w.beta);
    NetworkState next = pushsum_step(s, w);
    pi_rec = std::max(pi_rec, pi_recursion_residual(s.y / double(n), next.y / double(n), S));
    pi_stoch = std::max(pi_stoch, stochastic_defect(next.y / double(n)));
    const Vector mass = next.x.colwise().sum().transpose();
    mass_drift = std::max({mass_drift, (mass - mass0).cwiseAbs().maxCoeff() /
                                           std::max(1.0, mass0.cwiseAbs().maxCoeff()),
                           std::abs(next.y.sum() - double(n))});
    y_min = std::min(y_min, next.y.minCoeff());
    ys.push_back(next.y);
    s = std::move(next);
  }
  v.checks.push_back(detail::at_most("mass conservation", mass_drift, kMassTol,
                                     "relative drift of sum x and |sum y - n|"));
  v.checks.push_back(detail::at_most("S row-stochastic", s_rows, kConstructedStochasticTol));
  v.checks.push_back({"S support", support_ok ? CheckStatus::Pass : CheckStatus::Fail, 0.0, 0.0,
                      support_ok ? "support of S equals support of W" : support_detail});

  double prod = 0.0;
  for (std::size_t tau = 0; tau < H; ++tau)
    for (std::size_t t = tau + 1; t <= std::min(H, tau + kProductSpan); ++t)
      prod = std::max(prod, verify_product_identity(std::span<const WeightMatrix>(run.weights).first(H),
                                                    ss, ys, tau, t));
  v.checks.push_back(detail::at_most("product identity", prod, kProductTol,
                                     "all 0 <= tau < t <= " + std::to_string(H) +
                                         ", t - tau <= " + std::to_string(kProductSpan)));
  v.checks.push_back(detail::at_most("absolute probability recursion", pi_rec, kPiRecursionTol));
  v.checks.push_back(
      detail::at_most("absolute probability stochastic", pi_stoch, kConstructedStochasticTol));

  if (run.window) {
    const TheoryConstants k = theory_constants(n, *run.window);
    const double floor = k.eta;
    v.checks.push_back({"weight floor", y_min >= floor ? CheckStatus::Pass : CheckStatus::Fail,
                        y_min, floor, "min y_i(t) against n^{-nL}"});
    const double s_floor = beta_min * floor / double(n);
    v.checks.push_back({"S entry floor", s_min >= s_floor ? CheckStatus::Pass : CheckStatus::Fail,
                        s_min, s_floor, "min positive S entry against beta n^{-nL} / n"});
  } else {
    v.checks.push_back(detail::skipped("weight floor", "no connectivity certificate"));
    v.checks.push_back(detail::skipped("S entry floor", "no connectivity certificate"));
  }

  if (run.schedule.kind == ScheduleKind::Zero) {
    v.checks.push_back(detail::skipped("Lyapunov recursion", "zero stepsize"));
    v.checks.push_back(detail::skipped("z-space recursion", "zero stepsize"));
    return v;
  }
  try {
    const RunTrace tr = simulate(run.weights, run.objective, run.schedule, run.x0, H);
    double lyap = 0.0, zsp = 0.0;
    for (const auto& r : tr.steps) {
      lyap = std::max(lyap, r.lyapunov_residual);
      zsp = std::max(zsp, r.zspace_residual);
    }
    v.checks.push_back(detail::at_most("Lyapunov recursion", lyap, kLyapunovTol));
    v.checks.push_back(detail::at_most("z-space recursion", zsp, kLyapunovTol));
  } catch (const HypothesisViolation& e) {
    v.checks.push_back({"Lyapunov recursion", CheckStatus::Fail, 0.0, 0.0, e.what()});
    v.checks.push_back(detail::skipped("z-space recursion", "run aborted"));
  }
  return v;
}

}  // namespace pushsub

#endif  // PUSHSUB_VERIFY_HPP
