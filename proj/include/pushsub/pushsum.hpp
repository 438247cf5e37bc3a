#ifndef PUSHSUB_PUSHSUM_HPP
#define PUSHSUB_PUSHSUM_HPP

/// \file pushsum.hpp
/// \brief Push-sum dynamics, the row-stochastic companion matrices S(t),
/// backward transition products, and the absolute probability sequence
/// pi(t) = y(t)/n.
///
/// States hold one row per agent: x is n x d, y has n entries. Products are
/// accumulated by left-multiplying the newest factor, so
/// transition_product(Ms, tau, t) = M(t-1) * ... * M(tau). Floating-point
/// results depend on that order.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushsub/weights.hpp"

namespace pushsub {

struct NetworkState {
  std::size_t t = 0;
  Matrix x;  // n x d numerators
  Vector y;  // n weights

  std::size_t agents() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

/// x(0) as given, y(0) = 1.
inline NetworkState make_initial_state(Matrix x0) {
  NetworkState s;
  s.y = Vector::Ones(x0.rows());
  s.x = std::move(x0);
  return s;
}

inline void check_dimensions(const NetworkState& s, const Matrix& w, const char* who) {
  if (w.rows() != w.cols() || w.rows() != s.x.rows() || s.y.size() != s.x.rows())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

/// x' = W x, y' = W y.
inline NetworkState pushsum_step(const NetworkState& s, const WeightMatrix& w) {
  check_dimensions(s, w.entries, "pushsum_step");
  NetworkState next;
  next.t = s.t + 1;
  next.x = w.entries * s.x;
  next.y = w.entries * s.y;
  return next;
}

/// Weights below this are treated as a broken mixing sequence.
inline constexpr double kWeightFloor = 1e-300;

/// z_i = x_i / y_i.
inline Matrix ratio_state(const NetworkState& s) {
  Matrix z(s.x.rows(), s.x.cols());
  for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
    if (!(s.y(i) > kWeightFloor))
      throw std::runtime_error("ratio_state: agent " + std::to_string(i + 1) + " has weight y=" +
                               std::to_string(s.y(i)) +
                               " at or below the numeric floor; the weight matrix is invalid");
    z.row(i) = s.x.row(i) / s.y(i);
  }
  return z;
}

/// max_i || z_i - mean_j z_j ||_2
inline double consensus_error(const Matrix& z) {
  if (z.rows() == 0) throw std::invalid_argument("consensus_error: no agents");
  const Eigen::RowVectorXd mean = z.colwise().mean();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) worst = std::max(worst, (z.row(i) - mean).norm());
  return worst;
}

/// Row-stochastic companion of W(t) given y(t).
struct SMatrix {
  Matrix entries;
  double gamma = 0.0;  // smallest positive entry

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

/// s_ij = w_ij y_j / sum_k w_ik y_k. Depends on y only.
inline SMatrix build_s_matrix(const WeightMatrix& w, const Vector& y) {
  const Matrix& wm = w.entries;
  if (wm.rows() != y.size() || wm.cols() != y.size())
    throw std::invalid_argument("build_s_matrix: dimension mismatch");
  if ((y.array() <= 0.0).any()) throw std::invalid_argument("build_s_matrix: y must be positive");
  SMatrix s;
  s.entries.resize(wm.rows(), wm.cols());
  for (Eigen::Index i = 0; i < wm.rows(); ++i) {
    const double denom = wm.row(i).dot(y);
    if (!(denom > 0.0))
      throw std::runtime_error("build_s_matrix: zero denominator in row " + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < wm.cols(); ++j) s.entries(i, j) = wm(i, j) * y(j) / denom;
  }
  s.gamma = smallest_positive_entry(s.entries);
  return s;
}

namespace detail {

template <typename M>
Matrix backward_product(std::span<const M> factors, std::size_t tau, std::size_t t) {
  if (!(tau < t)) throw std::invalid_argument("transition product: need tau < t");
  if (t > factors.size())
    throw std::out_of_range("transition product: end beyond available factors");
  Matrix p = factors[tau].entries;
  for (std::size_t k = tau + 1; k < t; ++k) p = factors[k].entries * p;
  return p;
}

}  // namespace detail

/// Phi_W(t, tau) = W(t-1) ... W(tau); column-stochastic.
inline Matrix transition_product_w(std::span<const WeightMatrix> ws, std::size_t tau,
                                   std::size_t t) {
  return detail::backward_product(ws, tau, t);
}

/// Phi_S(t, tau) = S(t-1) ... S(tau); row-stochastic.
inline Matrix transition_product_s(std::span<const SMatrix> ss, std::size_t tau, std::size_t t) {
  return detail::backward_product(ss, tau, t);
}

/// max_ij | [Phi_S(t,tau)]_ij y_i(t) - [Phi_W(t,tau)]_ij y_j(tau) |, where
/// ys[k] = y(k). Zero in exact arithmetic.
inline double verify_product_identity(std::span<const WeightMatrix> ws,
                                      std::span<const SMatrix> ss, std::span<const Vector> ys,
                                      std::size_t tau, std::size_t t) {
  if (ws.size() != ss.size() || ys.size() < ws.size() + 1)
    throw std::invalid_argument("verify_product_identity: inconsistent history lengths");
  const Matrix pw = transition_product_w(ws, tau, t);
  const Matrix ps = transition_product_s(ss, tau, t);
  const Vector& yt = ys[t];
  const Vector& ytau = ys[tau];
  double worst = 0.0;
  for (Eigen::Index i = 0; i < pw.rows(); ++i)
    for (Eigen::Index j = 0; j < pw.cols(); ++j)
      worst = std::max(worst, std::abs(ps(i, j) * yt(i) - pw(i, j) * ytau(j)));
  return worst;
}

/// Mass violations beyond this abort absolute_probability().
inline constexpr double kMassFatalTol = 1e-6;

/// pi = y / n.
inline Vector absolute_probability(const Vector& y) {
  const auto n = static_cast<double>(y.size());
  if (y.size() == 0) throw std::invalid_argument("absolute_probability: empty vector");
  if (std::abs(y.sum() - n) > kMassFatalTol)
    throw std::runtime_error("absolute_probability: sum of y is " + std::to_string(y.sum()) +
                             ", expected " + std::to_string(n) + " (mass not conserved)");
  return y / n;
}

struct AbsProbSeq {
  std::vector<Vector> pi;
  double pi_min = std::numeric_limits<double>::infinity();

  void append(const Vector& y) {
    pi.push_back(absolute_probability(y));
    pi_min = std::min(pi_min, pi.back().minCoeff());
  }
};

/// || pi(t)^T - pi(t+1)^T S(t) ||_inf
inline double pi_recursion_residual(const Vector& pi_t, const Vector& pi_next, const SMatrix& s) {
  const Eigen::RowVectorXd lhs = pi_next.transpose() * s.entries;
  return (pi_t.transpose() - lhs).cwiseAbs().maxCoeff();
}

/// Worst deviation of a vector from being stochastic: a negative entry or
/// |sum - 1|.
inline double stochastic_defect(const Vector& v) {
  return std::max(std::abs(v.sum() - 1.0), std::max(0.0, -v.minCoeff()));
}

/// Worst-case constants for windows of length L on n agents: eta_lb = n^{-nL},
/// mu_ub = (1 - n^{-nL})^{1/L}, c = 4.
///
/// eta_lb underflows and mu_ub rounds to 1.0 long before n = 10, so the
/// log-space fields are authoritative; eta and mu are convenience copies.
struct TheoryConstants {
  std::size_t n = 1;
  std::size_t window = 1;
  double log_eta = 0.0;
  double eta = 1.0;
  double log_mu = -std::numeric_limits<double>::infinity();  // log(mu_ub)
  double mu = 0.0;
  double one_minus_mu = 1.0;
  double log_one_minus_mu = 0.0;  // log(1 - mu_ub), finite even when eta underflows
  double c = 4.0;
};

inline TheoryConstants theory_constants(std::size_t n, std::size_t window) {
  if (n == 0 || window == 0) throw std::invalid_argument("theory_constants: n, L must be >= 1");
  TheoryConstants k;
  k.n = n;
  k.window = window;
  k.log_eta = -static_cast<double>(n) * static_cast<double>(window) *
              std::log(static_cast<double>(n));
  k.eta = std::exp(k.log_eta);
  if (n == 1) {
    k.log_mu = -std::numeric_limits<double>::infinity();
    k.mu = 0.0;
    k.one_minus_mu = 1.0;
  } else {
    // log1p(-eta) with eta = exp(log_eta); for tiny eta this is -eta.
    const double log1m_eta =
        k.log_eta < -30.0 ? -std::exp(k.log_eta) : std::log1p(-std::exp(k.log_eta));
    // Kept strictly negative when eta underflows so that mu_ub < 1 survives.
    k.log_mu = std::min(log1m_eta / static_cast<double>(window),
                        -std::numeric_limits<double>::denorm_min());
    k.mu = std::exp(k.log_mu);
    k.one_minus_mu = -std::expm1(k.log_mu);
    // 1 - (1 - eta)^{1/L} ~ eta / L once eta is tiny.
    k.log_one_minus_mu = k.log_eta < -30.0 ? k.log_eta - std::log(static_cast<double>(window))
                                           : std::log(k.one_minus_mu);
  }
  return k;
}

}  // namespace pushsub

#endif  // PUSHSUB_PUSHSUM_HPP
