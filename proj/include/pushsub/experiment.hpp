#ifndef PUSHSUB_EXPERIMENT_HPP
#define PUSHSUB_EXPERIMENT_HPP

/// \file experiment.hpp
/// \brief End-to-end runs: simulate a prepared configuration, evaluate the
/// finite-time bounds with theoretical and measured constants, and summarize.
///
/// Measured constants: eta is the smallest y_i(t) seen in the run; mu is the
/// larger of the fitted geometric rate of pure push-sum from x(0) = I and the
/// smallest rate whose envelope 4 mu^t dominates that probe at every t.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pushsub/bounds.hpp"
#include "pushsub/csv.hpp"
#include "pushsub/engine.hpp"
#include "pushsub/prepare.hpp"
#include "pushsub/svg.hpp"

namespace pushsub {

inline constexpr double kLyapunovTol = 1e-9;
inline constexpr double kPiRecursionTol = 1e-10;
inline constexpr double kMassTol = 1e-9;
inline constexpr std::size_t kProbeSteps = 2000;

struct EmpiricalConstants {
  bool certified = false;
  double eta = 0.0;
  double mu = 1.0;
  double rho_fit = std::numeric_limits<double>::quiet_NaN();
  double fit_r2 = std::numeric_limits<double>::quiet_NaN();
  double envelope_mu = 0.0;
  std::string note;
};

inline EmpiricalConstants estimate_empirical_constants(std::span<const WeightMatrix> ws,
                                                       double min_weight) {
  EmpiricalConstants e;
  e.eta = min_weight;
  const std::vector<double> errs = probe_consensus_errors(ws, kProbeSteps);
  const GeometricFit fit = fit_geometric_rate(errs);
  e.rho_fit = fit.exact ? 0.0 : fit.rho;
  e.fit_r2 = fit.r2;
  for (std::size_t t = 1; t < errs.size(); ++t)
    if (errs[t] > 1e-13)
      e.envelope_mu = std::max(e.envelope_mu, std::pow(errs[t] / 4.0, 1.0 / double(t)));
  e.mu = std::max(e.rho_fit, e.envelope_mu);
  e.certified = std::isfinite(e.mu) && e.mu < 1.0 && e.eta > 0.0;
  if (!e.certified)
    e.note = "probe did not contract within " + std::to_string(errs.size() - 1) +
             " steps; measured constants unavailable";
  return e;
}

/// Running minimum of rhs - lhs over the evaluated times of one bound.
struct BoundCheck {
  std::string name;       // network, agents, consensus, consensus-refined
  std::string constants;  // theory or empirical
  std::size_t evaluated = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t argmin_t = 0;
  std::size_t argmin_agent = 0;
  bool vacuous = false;  // some rhs was +inf

  void add(std::size_t t, double lhs, double rhs, std::size_t agent = 0) {
    ++evaluated;
    if (std::isinf(rhs) && rhs > 0) vacuous = true;
    const double m = rhs - lhs;
    if (std::isnan(m) || m < min_margin) {
      min_margin = std::isnan(m) ? -std::numeric_limits<double>::infinity() : m;
      argmin_t = t;
      argmin_agent = agent;
    }
  }
  bool pass() const { return !(min_margin < 0.0); }
};

struct InvariantStats {
  double max_lyapunov_residual = 0.0;
  double max_zspace_residual = 0.0;
  double max_pi_residual = 0.0;
  double max_mass_drift = 0.0;  // |sum_i y_i(t) - n|
  double min_weight = 0.0;
  double weight_floor = 0.0;    // n^{-nL}
  double max_subgradient_norm = 0.0;
};

struct ExperimentResult {
  PreparedRun run;
  RunTrace trace;
  TheoryConstants theory;
  EmpiricalConstants empirical;
  BoundColumns columns;
  std::vector<double> envelope_theory;     // consensus bound (general form), NaN if skipped
  std::vector<double> envelope_empirical;
  std::vector<BoundCheck> checks;
  InvariantStats invariants;
  std::vector<std::string> failures;
  std::string bounds_note;
  bool pass = true;
  nlohmann::json summary;
};

namespace detail {

inline nlohmann::json num(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json vec_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline void evaluate_bounds(ExperimentResult& r) {
  const PreparedRun& run = r.run;
  const ObjectiveSpec& obj = run.objective;
  const std::size_t steps = r.trace.size();
  const auto& cfg = run.config.bounds;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  r.envelope_theory.assign(steps, nan);
  r.envelope_empirical.assign(steps, nan);

  if (!obj.zstar || !obj.fstar) {
    r.bounds_note = "optimum unknown; bounds not evaluated";
    return;
  }
  if (run.schedule.kind == ScheduleKind::Zero) {
    r.bounds_note = "zero stepsize: bounds not applicable";
    return;
  }
  const bool diminishing = run.schedule_report.satisfies_assumption();

  BoundInputs base;
  base.n = run.n();
  base.d = obj.d;
  base.G = obj.G;
  base.z0 = run.x0;
  base.x0 = run.x0;
  base.g0 = r.trace.steps.front().g;
  base.zstar = *obj.zstar;
  base.schedule = run.schedule;

  struct Set {
    std::string label;
    BoundInputs in;
  };
  std::vector<Set> sets;
  sets.push_back({"theory", base});
  sets.back().in.constants = RateConstants::from_theory(r.theory);
  if (r.empirical.certified) {
    sets.push_back({"empirical", base});
    sets.back().in.constants = RateConstants::empirical(r.empirical.eta, r.empirical.mu);
  }

  for (const Set& s : sets) {
    const bool emp = s.label == "empirical";
    if (cfg.network) {
      BoundCheck chk{"network", s.label};
      if (diminishing) {
        const auto series = bound_timevarying_series(s.in, steps);
        for (std::size_t t = 0; t < steps; ++t) {
          const double lhs = r.trace.steps[t].gap_running_avg;
          chk.add(t, lhs, series[t].rhs());
          r.columns.lhs[t] = lhs;
          (emp ? r.columns.rhs_empirical : r.columns.rhs_theory)[t] = series[t].rhs();
          if (emp) r.columns.terms[t] = series[t].term;
        }
      } else {
        const std::size_t t = steps - 1;
        const BoundTerms b = bound_fixed(s.in, steps);
        const double lhs = r.trace.steps[t].gap_running_avg;
        chk.add(t, lhs, b.rhs());
        r.columns.lhs[t] = lhs;
        (emp ? r.columns.rhs_empirical : r.columns.rhs_theory)[t] = b.rhs();
        if (emp) r.columns.terms[t] = b.term;
      }
      r.checks.push_back(chk);
    }
    if (cfg.agents) {
      BoundCheck chk{"agents", s.label};
      for (std::size_t k = 0; k < run.n(); ++k) {
        const auto avgs = running_averages(r.trace, k);
        if (diminishing) {
          const auto series = bound_timevarying_series(s.in, steps, k);
          for (std::size_t t = 0; t < steps; ++t)
            chk.add(t, optimality_gap(obj, avgs[t]), series[t].rhs(), k);
        } else {
          const std::size_t t = steps - 1;
          chk.add(t, optimality_gap(obj, avgs[t]), bound_fixed_agent(s.in, steps, k).rhs(), k);
        }
      }
      r.checks.push_back(chk);
    }
    if (cfg.consensus) {
      BoundCheck general{"consensus", s.label};
      BoundCheck refined{"consensus-refined", s.label};
      const auto series = consensus_contraction_series(s.in, steps);
      for (std::size_t t = 0; t < steps; ++t) {
        const double lhs = r.trace.steps[t].consensus_deviation;
        general.add(t, lhs, series[t].general);
        if (series[t].refined) refined.add(t, lhs, *series[t].refined);
        (emp ? r.envelope_empirical : r.envelope_theory)[t] = series[t].general;
      }
      r.checks.push_back(general);
      if (refined.evaluated) r.checks.push_back(refined);
    }
  }
  if (!r.empirical.certified) r.bounds_note = r.empirical.note;
}

inline void collect_invariants(ExperimentResult& r) {
  InvariantStats& s = r.invariants;
  const double n = static_cast<double>(r.run.n());
  for (const StepRecord& rec : r.trace.steps) {
    s.max_lyapunov_residual = std::max(s.max_lyapunov_residual, rec.lyapunov_residual);
    s.max_zspace_residual = std::max(s.max_zspace_residual, rec.zspace_residual);
    s.max_pi_residual = std::max(s.max_pi_residual, rec.pi_residual);
    s.max_mass_drift = std::max(s.max_mass_drift, std::abs(rec.y.sum() - n));
    s.max_subgradient_norm = std::max(s.max_subgradient_norm, rec.max_subgradient_norm);
  }
  s.max_mass_drift = std::max(s.max_mass_drift, std::abs(r.trace.final_state.y.sum() - n));
  s.min_weight = r.trace.min_weight();
  s.weight_floor = r.theory.eta;
}

inline nlohmann::json build_summary(const ExperimentResult& r) {
  using nlohmann::json;
  const PreparedRun& run = r.run;
  const ObjectiveSpec& obj = run.objective;
  json j;
  j["config"] = to_json(run.config);
  j["n"] = run.n();
  j["d"] = obj.d;
  j["steps"] = r.trace.size();
  j["certificate"] = {
      {"window", run.window ? json(*run.window) : json(nullptr)},
      {"note", "uniform strong connectivity verified on the generated horizon only"}};
  double beta = std::numeric_limits<double>::infinity();
  for (const auto& w : run.weights) beta = std::min(beta, w.beta);
  j["weights"] = {{"rule", run.config.weights.rule}, {"min_beta", num(beta)}};
  j["schedule"] = {{"kind", to_string(run.schedule.kind)},
                   {"applicable", run.schedule_report.applicable},
                   {"diminishing", run.schedule_report.satisfies_assumption()},
                   {"note", run.schedule_report.note}};
  j["objective"] = {{"kind", to_string(obj.kind)},
                    {"G", obj.G},
                    {"zstar", obj.zstar ? vec_json(*obj.zstar) : json(nullptr)},
                    {"fstar", obj.fstar ? num(*obj.fstar) : json(nullptr)},
                    {"optimum_provenance", obj.optimum_provenance}};
  j["constants"]["theory"] = {{"window", r.theory.window},
                              {"log_eta", num(r.theory.log_eta)},
                              {"eta", num(r.theory.eta)},
                              {"log_mu", num(r.theory.log_mu)},
                              {"mu", num(r.theory.mu)},
                              {"log_one_minus_mu", num(r.theory.log_one_minus_mu)}};
  j["constants"]["empirical"] = {{"certified", r.empirical.certified},
                                 {"eta", num(r.empirical.eta)},
                                 {"mu", num(r.empirical.mu)},
                                 {"rho_fit", num(r.empirical.rho_fit)},
                                 {"fit_r2", num(r.empirical.fit_r2)},
                                 {"envelope_mu", num(r.empirical.envelope_mu)},
                                 {"note", r.empirical.note}};

  const StepRecord& last = r.trace.steps.back();
  json agents = json::array();
  if (obj.fstar)
    for (std::size_t k = 0; k < run.n(); ++k)
      agents.push_back(
          num(reported_gap(optimality_gap(obj, weighted_running_average(r.trace, r.trace.size() - 1, k)))));
  j["final"] = {{"t", last.t},
                {"gap_network", num(last.gap_running_avg)},
                {"gap_network_reported", num(reported_gap(last.gap_running_avg))},
                {"gap_agents_reported", agents},
                {"consensus_err", num(last.consensus_err)}};
  const InvariantStats& s = r.invariants;
  j["invariants"] = {{"max_lyapunov_residual", s.max_lyapunov_residual},
                     {"max_zspace_residual", s.max_zspace_residual},
                     {"max_pi_residual", s.max_pi_residual},
                     {"max_mass_drift", s.max_mass_drift},
                     {"min_weight", s.min_weight},
                     {"weight_floor", num(s.weight_floor)},
                     {"max_subgradient_norm", s.max_subgradient_norm}};
  json checks = json::array();
  for (const BoundCheck& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"constants", c.constants},
                      {"evaluated", c.evaluated},
                      {"min_margin", num(c.min_margin)},
                      {"argmin_t", c.argmin_t},
                      {"argmin_agent", c.argmin_agent + 1},
                      {"vacuous", c.vacuous},
                      {"pass", c.pass()}});
  j["bounds"] = {{"checks", checks}, {"note", r.bounds_note}};
  j["pass"] = r.pass;
  j["failures"] = r.failures;
  return j;
}

}  // namespace detail

/// Runs a validated configuration end to end. Throws ConfigError for invalid
/// inputs and HypothesisViolation when the trajectory leaves the box.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult r;
  r.run = prepare_run(cfg);
  const std::size_t steps = r.run.steps();
  r.trace = simulate(r.run.weights, r.run.objective, r.run.schedule, r.run.x0, steps);
  r.trace.meta.seed = cfg.seed;
  r.trace.meta.graph_kind = cfg.graph.file.empty() ? cfg.graph.kind : "file";
  r.trace.meta.window = r.run.window;
  r.theory = theory_constants(r.run.n(), *r.run.window);
  r.empirical = estimate_empirical_constants(r.run.weights, r.trace.min_weight());
  r.columns = BoundColumns::empty(steps);
  detail::evaluate_bounds(r);
  detail::collect_invariants(r);

  const InvariantStats& s = r.invariants;
  auto fail = [&](const std::string& msg) { r.failures.push_back(msg); };
  if (s.max_lyapunov_residual > kLyapunovTol)
    fail("Lyapunov recursion residual " + format_double(s.max_lyapunov_residual));
  if (s.max_pi_residual > kPiRecursionTol)
    fail("absolute probability recursion residual " + format_double(s.max_pi_residual));
  if (s.max_mass_drift > kMassTol) fail("y mass drift " + format_double(s.max_mass_drift));
  if (s.min_weight < s.weight_floor)
    fail("min y " + format_double(s.min_weight) + " below n^{-nL} " + format_double(s.weight_floor));
  for (const BoundCheck& c : r.checks)
    if (!c.pass())
      fail(c.name + " bound (" + c.constants + ") violated at t=" + std::to_string(c.argmin_t) +
           " by " + format_double(-c.min_margin));
  r.pass = r.failures.empty();
  r.summary = detail::build_summary(r);
  return r;
}

/// gap.svg, consensus.svg and bounds.svg in `dir`.
inline void render_plots(const ExperimentResult& r, const std::filesystem::path& dir) {
  if (r.trace.empty()) throw std::invalid_argument("render_plots: empty trace");
  std::vector<double> t, gap, cons, dev;
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    const StepRecord& rec = r.trace.steps[k];
    t.push_back(double(rec.t));
    gap.push_back(reported_gap(rec.gap_running_avg));
    cons.push_back(rec.consensus_err);
    dev.push_back(rec.consensus_deviation);
  }
  SvgPlot g("optimality gap of the weighted running average", "t", "gap");
  g.log_y().add({"network", t, gap, "#1f77b4"});
  g.write_file((dir / "gap.svg").string());

  SvgPlot c("consensus", "t", "distance");
  c.log_y()
      .add({"max_i |z_i - zbar|", t, cons, "#1f77b4"})
      .add({"next-step deviation", t, dev, "#2ca02c"})
      .add({"envelope (measured)", t, r.envelope_empirical, "#d62728", true})
      .add({"envelope (theory)", t, r.envelope_theory, "#9467bd", true});
  c.write_file((dir / "consensus.svg").string());

  SvgPlot b("bound check", "t", "value");
  b.log_y()
      .add({"lhs", t, r.columns.lhs, "#1f77b4"})
      .add({"rhs (measured)", t, r.columns.rhs_empirical, "#d62728", true})
      .add({"rhs (theory)", t, r.columns.rhs_theory, "#9467bd", true});
  b.write_file((dir / "bounds.svg").string());
}

/// Bound columns for the trace CSV, or nullptr when the network bound is off.
inline const BoundColumns* trace_bounds(const ExperimentResult& r) {
  return r.run.config.bounds.network ? &r.columns : nullptr;
}

inline void write_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("config.json");
    out << to_text(r.run.config);
  }
  {
    auto out = open("trace.csv");
    export_trace(out, r.trace, trace_bounds(r));
  }
  {
    auto out = open("graphs.txt");
    write_graph_sequence(out, r.run.graphs);
  }
  {
    auto out = open("report.json");
    out << r.summary.dump(2) << '\n';
  }
  render_plots(r, dir);
}

/// Recomputes the headline numbers of report.json from trace.csv.
struct ReportCheck {
  std::vector<std::string> lines;
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

inline ReportCheck check_report(const std::filesystem::path& dir) {
  std::ifstream rin(dir / "report.json");
  std::ifstream tin(dir / "trace.csv");
  if (!rin || !tin) throw ConfigError("report: need report.json and trace.csv in " + dir.string());
  nlohmann::json rep;
  CsvTable table;
  try {
    rep = nlohmann::json::parse(rin);
    table = read_csv(tin);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("report: ") + e.what());
  }
  if (table.rows.empty()) throw ConfigError("report: trace.csv has no rows");
  ReportCheck out;
  auto same = [](double a, const nlohmann::json& b) {
    if (b.is_null()) return !std::isfinite(a);
    const double v = b.get<double>();
    return a == v || std::abs(a - v) <= 1e-12 * std::max(1.0, std::abs(v));
  };
  auto compare = [&](const std::string& what, double recomputed, const nlohmann::json& claimed) {
    std::ostringstream os;
    os << what << ": csv=" << format_double(recomputed)
       << " report=" << (claimed.is_null() ? std::string("null") : format_double(claimed.get<double>()));
    out.lines.push_back(os.str());
    if (!same(recomputed, claimed)) out.mismatches.push_back(os.str());
  };
  const auto gap = table.column("gap_running_avg");
  const auto cons = table.column("consensus_err");
  compare("final gap", gap.back(), rep["final"]["gap_network"]);
  compare("final consensus error", cons.back(), rep["final"]["consensus_err"]);

  // Gaps of the weighted running averages, rebuilt from the z columns.
  const ExperimentConfig cfg = config_from_json(rep["config"]);
  const std::size_t n = rep["n"].get<std::size_t>(), d = rep["d"].get<std::size_t>();
  const ObjectiveSpec obj = detail::build_objective(cfg, n);
  if (obj.fstar) {
    const auto alpha = table.column("alpha");
    auto running_gap = [&](const std::string& prefix) {
      Vector acc = Vector::Zero(Eigen::Index(d)), plain = acc;
      double weight = 0.0;
      std::vector<std::vector<double>> cols;
      for (std::size_t k = 1; k <= d; ++k) cols.push_back(table.column(prefix + std::to_string(k)));
      for (std::size_t t = 0; t < alpha.size(); ++t) {
        Vector s = Vector::Zero(Eigen::Index(d));
        for (std::size_t k = 0; k < d; ++k) s(Eigen::Index(k)) = cols[k][t];
        acc += alpha[t] * s;
        plain += s;
        weight += alpha[t];
      }
      return optimality_gap(obj, weight > 0.0 ? Vector(acc / weight)
                                              : Vector(plain / double(alpha.size())));
    };
    compare("final gap (recomputed from zbar)", running_gap("zbar_"), rep["final"]["gap_network"]);
    for (std::size_t i = 0; i < n; ++i)
      compare("final gap agent " + std::to_string(i + 1),
              reported_gap(running_gap("z" + std::to_string(i + 1) + "_")),
              rep["final"]["gap_agents_reported"][i]);
  }

  const bool has_bounds = std::find(table.header.begin(), table.header.end(), "lhs") !=
                          table.header.end();
  const auto lhs = has_bounds ? table.column("lhs") : std::vector<double>{};
  for (const char* which : {"theory", "empirical"}) {
    const auto rhs = has_bounds ? table.column(std::string("rhs_") + which) : std::vector<double>{};
    double m = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t k = 0; k < lhs.size(); ++k)
      if (!std::isnan(rhs[k]) && !std::isnan(lhs[k])) {
        any = true;
        m = std::min(m, rhs[k] - lhs[k]);
      }
    for (const auto& c : rep["bounds"]["checks"])
      if (c["name"] == "network" && c["constants"] == which) {
        if (!any) {
          out.mismatches.push_back(std::string("network bound (") + which +
                                   ") reported but absent from trace.csv");
        } else {
          compare(std::string("network min margin (") + which + ")", m, c["min_margin"]);
        }
      }
  }
  bool all_pass = true;
  for (const auto& c : rep["bounds"]["checks"]) all_pass = all_pass && c["pass"].get<bool>();
  if (rep["pass"].get<bool>() && !all_pass)
    out.mismatches.push_back("report claims pass while a bound check failed");
  return out;
}

}  // namespace pushsub

#endif  // PUSHSUB_EXPERIMENT_HPP
