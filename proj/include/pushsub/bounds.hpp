#ifndef PUSHSUB_BOUNDS_HPP
#define PUSHSUB_BOUNDS_HPP

/// \file bounds.hpp
/// \brief Right-hand sides of the finite-time error bounds for the
/// push-subgradient method, the consensus contraction bound, and rate fits.
///
/// Every gap bound is reported as four summands in a fixed order:
///   term 1  optimization term   (||zbar(0) - z*||^2 + G^2 sum alpha^2) / (2 sum alpha)
///   term 2  initial spread      G alpha(0) sum_i ||zbar(0) - z_i(0)|| ... / (n sum alpha)
///   term 3  initial mass        (32 G / eta) ||sum_i x_i(0) + alpha(0) g_i(0)|| ...
///   term 4  stepsize consensus  (32 n G^2 / (eta (1 - mu))) ...
/// Time-varying forms follow the displayed indices literally: the mu-weighted
/// sums in terms 3 and 4 run over tau <= t-1 (empty at t = 0) while the
/// denominators run over tau <= t.
///
/// eta and mu are carried in log space. With worst-case constants 1/eta
/// overflows for moderate n; the resulting infinite right-hand side is a
/// valid, vacuous bound.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pushsub/pushsum.hpp"
#include "pushsub/subgradient.hpp"

namespace pushsub {

/// The pair (eta, mu) entering every bound.
struct RateConstants {
  double log_eta = 0.0;
  double log_mu = -std::numeric_limits<double>::infinity();
  double log_one_minus_mu = 0.0;
  std::string source;

  static RateConstants from_theory(const TheoryConstants& k) {
    return {k.log_eta, k.log_mu, k.log_one_minus_mu, "theory"};
  }

  /// mu = 0 is allowed (instant consensus, e.g. a single agent).
  static RateConstants empirical(double eta, double mu) {
    if (!(eta > 0.0)) throw std::invalid_argument("RateConstants: eta must be > 0");
    if (!(mu >= 0.0 && mu < 1.0)) throw std::invalid_argument("RateConstants: mu must be in [0,1)");
    return {std::log(eta), mu > 0.0 ? std::log(mu) : -std::numeric_limits<double>::infinity(),
            std::log1p(-mu), "empirical"};
  }

  double eta() const { return std::exp(log_eta); }
  double mu() const { return std::exp(log_mu); }
  double inv_eta() const { return std::exp(-log_eta); }
  double inv_one_minus_mu() const { return std::exp(-log_one_minus_mu); }

  /// mu^e for e >= 0, with mu^0 = 1 even when mu = 0.
  double mu_pow(double e) const { return e == 0.0 ? 1.0 : std::exp(e * log_mu); }
};

struct BoundInputs {
  std::size_t n = 1;
  std::size_t d = 1;
  double G = 1.0;
  RateConstants constants;
  Matrix z0;  // n x d, z_i(0) (= x_i(0) since y(0) = 1)
  Matrix x0;  // n x d
  Matrix g0;  // n x d, g_i(0)
  Vector zstar;
  StepsizeSchedule schedule;

  Vector zbar0() const { return z0.colwise().mean().transpose(); }
};

struct BoundTerms {
  std::array<double, 4> term{0.0, 0.0, 0.0, 0.0};

  double rhs() const { return term[0] + term[1] + term[2] + term[3]; }
};

/// One row of a bound report: lhs is the measured gap.
struct BoundEntry {
  std::size_t t = 0;
  double lhs = 0.0;
  BoundTerms terms;

  double rhs() const { return terms.rhs(); }
  double margin() const { return rhs() - lhs; }
};

namespace detail {

/// a * b with 0 * inf = 0: an empty or vanishing sum kills an overflowing
/// coefficient.
inline double scaled(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

inline void check_inputs(const BoundInputs& in) {
  if (!(in.constants.log_mu < 0.0)) throw std::invalid_argument("bounds: mu must be < 1");
  if (!(in.constants.log_eta > -std::numeric_limits<double>::infinity()))
    throw std::invalid_argument("bounds: eta must be > 0");
  if (!(in.G > 0.0)) throw std::invalid_argument("bounds: G must be > 0");
  if (in.z0.rows() != Eigen::Index(in.n) || in.x0.rows() != Eigen::Index(in.n) ||
      in.g0.rows() != Eigen::Index(in.n))
    throw std::invalid_argument("bounds: initial data must have one row per agent");
}

/// ||sum_i x_i(0) + alpha(0) g_i(0)||
inline double initial_mass_norm(const BoundInputs& in) {
  const double a0 = stepsize(in.schedule, 0);
  return (in.x0 + a0 * in.g0).colwise().sum().norm();
}

/// sum_i ||zbar(0) - z_i(0)|| (+ ||z_k(0) - z_i(0)|| when agent k is given)
inline double initial_spread(const BoundInputs& in, std::optional<std::size_t> agent) {
  const Eigen::RowVectorXd zbar = in.zbar0().transpose();
  double s = 0.0;
  for (Eigen::Index i = 0; i < in.z0.rows(); ++i) {
    s += (zbar - in.z0.row(i)).norm();
    if (agent) s += (in.z0.row(Eigen::Index(*agent)) - in.z0.row(i)).norm();
  }
  return s;
}

struct StepsizeSums {
  double alpha = 0.0;      // sum_{tau <= t} alpha(tau)
  double alpha_sq = 0.0;   // sum_{tau <= t} alpha(tau)^2
  double mass = 0.0;       // sum_{tau <= t-1} alpha(tau) mu^tau
  double mixing = 0.0;     // sum_{tau <= t-1} alpha(tau) (alpha(0) mu^{tau/2} + alpha(ceil(tau/2)))
};

inline BoundTerms timevarying_terms(const BoundInputs& in, const StepsizeSums& s,
                                    std::optional<std::size_t> agent) {
  const double G = in.G;
  const double n = static_cast<double>(in.n);
  const double a0 = stepsize(in.schedule, 0);
  const double dist0 = (in.zbar0() - in.zstar).squaredNorm();
  const double inv_eta = in.constants.inv_eta();
  BoundTerms b;
  b.term[0] = (dist0 + G * G * s.alpha_sq) / (2.0 * s.alpha);
  const double spread_coef = agent ? 1.0 : 2.0;
  b.term[1] = spread_coef * G * a0 * initial_spread(in, agent) / (n * s.alpha);
  b.term[2] = scaled(32.0 * G * initial_mass_norm(in) * inv_eta, s.mass / s.alpha);
  b.term[3] = scaled(32.0 * n * G * G * inv_eta * in.constants.inv_one_minus_mu(),
                     s.mixing / s.alpha);
  return b;
}

inline BoundTerms fixed_terms(const BoundInputs& in, std::size_t T,
                              std::optional<std::size_t> agent) {
  if (in.schedule.kind != ScheduleKind::FixedHorizon || in.schedule.T != T)
    throw std::invalid_argument("fixed-stepsize bound: schedule must be fixed-horizon with this T");
  const double G = in.G;
  const double n = static_cast<double>(in.n);
  const double Td = static_cast<double>(T);
  const double sqrtT = std::sqrt(Td);
  const double dist0 = (in.zbar0() - in.zstar).squaredNorm();
  const double k = in.constants.inv_eta() * in.constants.inv_one_minus_mu();
  BoundTerms b;
  b.term[0] = (dist0 + G * G) / (2.0 * sqrtT);
  const double spread_coef = agent ? 1.0 : 2.0;
  b.term[1] = spread_coef * G * initial_spread(in, agent) / (n * Td);
  b.term[2] = scaled(32.0 * G * k, initial_mass_norm(in) / Td);
  b.term[3] = 32.0 * n * G * G * k / sqrtT;
  return b;
}

inline void require_diminishing(const BoundInputs& in) {
  if (!validate_schedule(in.schedule).satisfies_assumption())
    throw std::invalid_argument(
        "time-varying bound: schedule does not satisfy the diminishing-stepsize assumption");
}

inline StepsizeSums sums_upto(const BoundInputs& in, std::size_t t) {
  StepsizeSums s;
  const double a0 = stepsize(in.schedule, 0);
  for (std::size_t tau = 0; tau <= t; ++tau) {
    const double a = stepsize(in.schedule, tau);
    s.alpha += a;
    s.alpha_sq += a * a;
    if (tau + 1 <= t) {
      const double tf = static_cast<double>(tau);
      s.mass += a * in.constants.mu_pow(tf);
      s.mixing += a * (a0 * in.constants.mu_pow(tf / 2.0) + stepsize(in.schedule, (tau + 1) / 2));
    }
  }
  return s;
}

}  // namespace detail

/// Network-average bound for a diminishing stepsize, evaluated at time t by
/// direct summation.
inline BoundTerms bound_timevarying(const BoundInputs& in, std::size_t t) {
  detail::check_inputs(in);
  detail::require_diminishing(in);
  return detail::timevarying_terms(in, detail::sums_upto(in, t), std::nullopt);
}

/// Agent-k bound for a diminishing stepsize.
inline BoundTerms bound_timevarying_agent(const BoundInputs& in, std::size_t t, std::size_t k) {
  detail::check_inputs(in);
  detail::require_diminishing(in);
  if (k >= in.n) throw std::out_of_range("bound_timevarying_agent: agent index");
  return detail::timevarying_terms(in, detail::sums_upto(in, t), k);
}

/// Network-average bound for alpha = 1/sqrt(T), evaluated for the average
/// over tau = 0 .. T-1.
inline BoundTerms bound_fixed(const BoundInputs& in, std::size_t T) {
  detail::check_inputs(in);
  return detail::fixed_terms(in, T, std::nullopt);
}

inline BoundTerms bound_fixed_agent(const BoundInputs& in, std::size_t T, std::size_t k) {
  detail::check_inputs(in);
  if (k >= in.n) throw std::out_of_range("bound_fixed_agent: agent index");
  return detail::fixed_terms(in, T, k);
}

/// Bounds for every t in [0, horizon) in one pass, accumulating the stepsize
/// sums alongside. agent = nullopt gives the network-average form.
inline std::vector<BoundTerms> bound_timevarying_series(const BoundInputs& in, std::size_t horizon,
                                                        std::optional<std::size_t> agent =
                                                            std::nullopt) {
  detail::check_inputs(in);
  detail::require_diminishing(in);
  if (agent && *agent >= in.n) throw std::out_of_range("bound_timevarying_series: agent index");
  std::vector<BoundTerms> out;
  out.reserve(horizon);
  detail::StepsizeSums s;
  const double a0 = stepsize(in.schedule, 0);
  for (std::size_t t = 0; t < horizon; ++t) {
    if (t > 0) {
      const std::size_t tau = t - 1;
      const double a = stepsize(in.schedule, tau);
      const double tf = static_cast<double>(tau);
      s.mass += a * in.constants.mu_pow(tf);
      s.mixing += a * (a0 * in.constants.mu_pow(tf / 2.0) + stepsize(in.schedule, (tau + 1) / 2));
    }
    const double a = stepsize(in.schedule, t);
    s.alpha += a;
    s.alpha_sq += a * a;
    out.push_back(detail::timevarying_terms(in, s, agent));
  }
  return out;
}

/// Consensus contraction bound at time t on
/// max_i || z_i(t+1) - (1/n) sum_j (x_j(t) - alpha(t) g_j(t)) ||.
struct ConsensusBound {
  double general = 0.0;  // (8/eta) mu^t M + (8 n G / eta) sum_{s=0}^t mu^{t-s} alpha(s)
  std::optional<double> refined;  // (8/eta) mu^t M + (8 n G / (eta (1-mu))) (alpha(0) mu^{t/2} + alpha(ceil(t/2)))
};

inline ConsensusBound consensus_contraction_bound(const BoundInputs& in, std::size_t t) {
  detail::check_inputs(in);
  const double inv_eta = in.constants.inv_eta();
  const double n = static_cast<double>(in.n);
  const double tf = static_cast<double>(t);
  const double head = detail::scaled(8.0 * inv_eta, in.constants.mu_pow(tf) *
                                                        detail::initial_mass_norm(in));
  double tail = 0.0;
  for (std::size_t s = 0; s <= t; ++s)
    tail += in.constants.mu_pow(static_cast<double>(t - s)) * stepsize(in.schedule, s);
  ConsensusBound b;
  b.general = head + detail::scaled(8.0 * n * in.G * inv_eta, tail);
  if (validate_schedule(in.schedule).satisfies_assumption()) {
    const double a0 = stepsize(in.schedule, 0);
    const double mix = a0 * in.constants.mu_pow(tf / 2.0) + stepsize(in.schedule, (t + 1) / 2);
    b.refined = head + detail::scaled(8.0 * n * in.G * inv_eta * in.constants.inv_one_minus_mu(),
                                      mix);
  }
  return b;
}

/// Series form of consensus_contraction_bound, with the geometric tail
/// accumulated recursively: R(t) = mu R(t-1) + alpha(t).
inline std::vector<ConsensusBound> consensus_contraction_series(const BoundInputs& in,
                                                                std::size_t horizon) {
  detail::check_inputs(in);
  const double inv_eta = in.constants.inv_eta();
  const double n = static_cast<double>(in.n);
  const double mass = detail::initial_mass_norm(in);
  const double mu = in.constants.mu_pow(1.0);
  const bool diminishing = validate_schedule(in.schedule).satisfies_assumption();
  const double a0 = stepsize(in.schedule, 0);
  std::vector<ConsensusBound> out;
  out.reserve(horizon);
  double tail = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double tf = static_cast<double>(t);
    tail = mu * tail + stepsize(in.schedule, t);
    const double head = detail::scaled(8.0 * inv_eta, in.constants.mu_pow(tf) * mass);
    ConsensusBound b;
    b.general = head + detail::scaled(8.0 * n * in.G * inv_eta, tail);
    if (diminishing) {
      const double mix = a0 * in.constants.mu_pow(tf / 2.0) + stepsize(in.schedule, (t + 1) / 2);
      b.refined = head + detail::scaled(8.0 * n * in.G * inv_eta * in.constants.inv_one_minus_mu(),
                                        mix);
    }
    out.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate fits

struct RateFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  std::size_t excluded = 0;        // nonpositive values left out of the fit
  bool exact_convergence = false;  // every value was nonpositive
};

/// Ordinary least squares of ys on xs.
inline RateFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t m = xs.size();
  if (m < 2 || ys.size() != m) throw std::invalid_argument("least_squares: need >= 2 points");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / double(m);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("least_squares: abscissae are all equal");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.used = m;
  return f;
}

/// Slope of log(gap) against log(T). Nonpositive gaps are excluded; if all
/// are nonpositive the result is flagged as exact convergence.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 (T, gap) points");
  std::vector<double> lx, ly;
  std::size_t excluded = 0;
  for (const auto& [T, gap] : points) {
    if (!(T > 0.0)) throw std::invalid_argument("fit_rate: T must be positive");
    if (gap > 0.0) {
      lx.push_back(std::log(T));
      ly.push_back(std::log(gap));
    } else {
      ++excluded;
    }
  }
  if (lx.empty()) {
    RateFit f;
    f.excluded = excluded;
    f.exact_convergence = true;
    return f;
  }
  if (lx.size() < 2)
    throw std::invalid_argument("fit_rate: fewer than 2 positive gaps remain after exclusion");
  RateFit f = least_squares(lx, ly);
  f.excluded = excluded;
  return f;
}

/// Geometric envelope e(t) <= A rho^t fitted by log-linear regression.
struct GeometricFit {
  double rho = 0.0;
  double amplitude = 0.0;
  double r2 = 1.0;
  double slope = -std::numeric_limits<double>::infinity();  // log rho
  std::size_t first = 0;  // fitted index range [first, last]
  std::size_t last = 0;
  bool exact = false;     // decayed to the floor immediately; rho = 0
};

/// Fits the decay of errors[t] over the second half of its pre-floor
/// prefix. Values at or below `floor` are treated as converged. The envelope
/// amplitude is the smallest A with errors[t] <= A rho^t on the fitted range.
inline GeometricFit fit_geometric_rate(const std::vector<double>& errors, double floor = 1e-13) {
  GeometricFit f;
  std::size_t usable = 0;
  while (usable < errors.size() && errors[usable] > floor) ++usable;
  if (usable == 0) {
    f.exact = true;
    return f;
  }
  if (usable == 1) {
    // gone after one step
    f.exact = true;
    f.amplitude = errors[0];
    return f;
  }
  if (usable < 4) {
    // too short to regress; end-to-end ratio
    f.slope = std::log(errors[usable - 1] / errors[0]) / double(usable - 1);
    f.rho = std::exp(f.slope);
    f.amplitude = errors[0];
    f.last = usable - 1;
    return f;
  }
  f.first = usable / 2;
  f.last = usable - 1;
  std::vector<double> xs, ys;
  for (std::size_t t = f.first; t <= f.last; ++t) {
    xs.push_back(double(t));
    ys.push_back(std::log(errors[t]));
  }
  const RateFit lf = least_squares(xs, ys);
  f.slope = lf.slope;
  f.r2 = lf.r2;
  f.rho = std::exp(lf.slope);
  double log_a = -std::numeric_limits<double>::infinity();
  for (std::size_t t = f.first; t <= f.last; ++t)
    log_a = std::max(log_a, ys[t - f.first] - lf.slope * double(t));
  f.amplitude = std::exp(log_a);
  return f;
}

}  // namespace pushsub

#endif  // PUSHSUB_BOUNDS_HPP
