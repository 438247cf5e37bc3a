#ifndef PUSHSUB_SWEEP_HPP
#define PUSHSUB_SWEEP_HPP

/// \file sweep.hpp
/// \brief Horizon sweep under alpha = 1/sqrt(T): one run per T with the same
/// seed, then a log-log fit of the final gap against T.

#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "pushsub/experiment.hpp"

namespace pushsub {

struct SweepPoint {
  std::size_t T = 0;
  double gap = 0.0;           // raw f(avg) - f* at t = T-1
  double reported_gap = 0.0;  // clipped for display and fitting
  double rhs_theory = std::numeric_limits<double>::quiet_NaN();
  double rhs_empirical = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  RateFit fit;
};

inline ExperimentConfig horizon_variant(const ExperimentConfig& base, std::size_t T) {
  ExperimentConfig c = base;
  c.graph.horizon = T;
  c.schedule.kind = "fixed-horizon";
  c.schedule.T = T;
  return c;
}

inline SweepResult run_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& horizons,
                             bool parallel = true) {
  if (horizons.size() < 3) throw ConfigError("sweep: need at least 3 horizons");
  for (std::size_t k = 1; k < horizons.size(); ++k)
    if (horizons[k] <= horizons[k - 1]) throw ConfigError("sweep: horizons must increase");
  for (std::size_t T : horizons) prepare_run(horizon_variant(base, T));  // fail fast, serially

  auto one = [&base](std::size_t T) {
    const ExperimentResult r = run_experiment(horizon_variant(base, T));
    SweepPoint p;
    p.T = T;
    p.gap = r.trace.steps.back().gap_running_avg;
    p.reported_gap = reported_gap(p.gap);
    p.rhs_theory = r.columns.rhs_theory.back();
    p.rhs_empirical = r.columns.rhs_empirical.back();
    p.pass = r.pass;
    return p;
  };
  SweepResult out;
  if (parallel) {
    std::vector<std::future<SweepPoint>> jobs;
    for (std::size_t T : horizons) jobs.push_back(std::async(std::launch::async, one, T));
    for (auto& j : jobs) out.points.push_back(j.get());
  } else {
    for (std::size_t T : horizons) out.points.push_back(one(T));
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : out.points) pts.emplace_back(double(p.T), p.reported_gap);
  out.fit = fit_rate(pts);
  return out;
}

inline nlohmann::json sweep_json(const SweepResult& s) {
  using detail::num;
  nlohmann::json j;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points)
    pts.push_back({{"T", p.T},
                   {"gap", num(p.gap)},
                   {"gap_reported", num(p.reported_gap)},
                   {"rhs_theory", num(p.rhs_theory)},
                   {"rhs_empirical", num(p.rhs_empirical)},
                   {"pass", p.pass}});
  j["points"] = pts;
  j["fit"] = {{"slope", num(s.fit.slope)},
              {"intercept", num(s.fit.intercept)},
              {"r2", num(s.fit.r2)},
              {"used", s.fit.used},
              {"excluded", s.fit.excluded},
              {"exact_convergence", s.fit.exact_convergence}};
  return j;
}

inline void write_sweep(const SweepResult& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "sweep.json");
    out << sweep_json(s).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "sweep.csv");
    out << "T,gap,rhs_theory,rhs_empirical\n";
    for (const auto& p : s.points)
      out << p.T << ',' << format_double(p.gap) << ',' << format_double(p.rhs_theory) << ','
          << format_double(p.rhs_empirical) << '\n';
  }
  std::vector<double> T, gap, rhs, ref;
  for (const auto& p : s.points) {
    T.push_back(double(p.T));
    gap.push_back(p.reported_gap);
    rhs.push_back(p.rhs_empirical);
  }
  if (!s.points.empty() && s.points.front().reported_gap > 0.0)
    for (double t : T) ref.push_back(s.points.front().reported_gap * std::sqrt(T.front() / t));
  SvgPlot plot("final gap against horizon", "T", "gap");
  plot.log_x().log_y().add({"gap", T, gap, "#1f77b4"}).add({"rhs (measured)", T, rhs, "#d62728", true});
  if (!ref.empty()) plot.add({"T^-1/2 reference", T, ref, "#7f7f7f", true});
  plot.write_file((dir / "sweep.svg").string());
}

}  // namespace pushsub

#endif  // PUSHSUB_SWEEP_HPP
