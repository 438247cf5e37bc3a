// Command-line front end: simulate, verify, sweep, report.
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pushsub/experiment.hpp"
#include "pushsub/sweep.hpp"
#include "pushsub/verify.hpp"

namespace {

using namespace pushsub;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string graph_file;
  std::string weights_file;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool need_config) {
  auto* c = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (need_config) c->required();
  cmd->add_option("--out", f.out, "output directory (default: config 'output')");
  cmd->add_option("--seed", f.seed, "override the config seed");
  cmd->add_option("--graph-file", f.graph_file, "graph sequence file, overrides graph.file");
  cmd->add_option("--weights-file", f.weights_file,
                  "dense weight matrices, implies weights.rule=custom");
}

ExperimentConfig load_with_overrides(const CommonFlags& f) {
  ExperimentConfig c = load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.graph_file.empty()) c.graph.file = f.graph_file;
  if (!f.weights_file.empty()) {
    c.weights.rule = "custom";
    c.weights.file = f.weights_file;
  }
  if (!f.out.empty()) c.output = f.out;
  return c;
}

int cmd_simulate(const CommonFlags& f) {
  const ExperimentConfig cfg = load_with_overrides(f);
  ExperimentResult r;
  try {
    r = run_experiment(cfg);
  } catch (const HypothesisViolation& e) {
    std::cerr << "hypothesis violated: " << e.what() << '\n';
    return 1;
  }
  write_outputs(r, cfg.output);
  const auto& fin = r.summary["final"];
  std::cout << "n=" << r.run.n() << " d=" << r.run.objective.d << " steps=" << r.trace.size()
            << " L=" << *r.run.window << '\n';
  std::cout << "final gap " << fin["gap_network_reported"].dump() << ", consensus error "
            << fin["consensus_err"].dump() << '\n';
  for (const BoundCheck& c : r.checks)
    std::cout << (c.pass() ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.constants
              << ") min margin " << format_double(c.min_margin) << (c.vacuous ? " (vacuous)" : "")
              << '\n';
  if (!r.bounds_note.empty()) std::cout << "note: " << r.bounds_note << '\n';
  for (const auto& m : r.failures) std::cout << "failure: " << m << '\n';
  std::cout << "wrote " << cfg.output << '\n';
  return r.pass ? 0 : 1;
}

int cmd_verify(const CommonFlags& f) {
  const ExperimentConfig cfg = load_with_overrides(f);
  const VerifyResult v = verify_config(cfg);
  std::cout << "verified prefix: " << v.horizon << " steps\n";
  for (const auto& c : v.checks) {
    std::cout << '[' << to_string(c.status) << "] " << c.name;
    if (c.status != CheckStatus::Skip && c.tolerance > 0.0)
      std::cout << "  value=" << format_double(c.value) << " tol=" << format_double(c.tolerance);
    if (!c.detail.empty()) std::cout << "  " << c.detail;
    std::cout << '\n';
  }
  return v.pass() ? 0 : 1;
}

std::vector<std::size_t> parse_horizons(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used);
      if (used != tok.size() || v == 0) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--horizons: bad value '" + tok + "'");
    }
  }
  return out;
}

int cmd_sweep(const CommonFlags& f, const std::string& horizons, double max_slope) {
  const ExperimentConfig cfg = load_with_overrides(f);
  SweepResult s;
  try {
    s = run_sweep(cfg, parse_horizons(horizons));
  } catch (const HypothesisViolation& e) {
    std::cerr << "hypothesis violated: " << e.what() << '\n';
    return 1;
  }
  write_sweep(s, cfg.output);
  bool ok = true;
  for (const auto& p : s.points) {
    std::cout << "T=" << p.T << " gap=" << format_double(p.reported_gap)
              << " rhs_empirical=" << format_double(p.rhs_empirical)
              << (p.pass ? "" : "  (bound check failed)") << '\n';
    ok = ok && p.pass;
  }
  if (s.fit.exact_convergence) {
    std::cout << "every gap is zero: exact convergence, no slope\n";
  } else {
    std::cout << "log-log slope " << format_double(s.fit.slope) << " r2 " << format_double(s.fit.r2)
              << " (" << s.fit.excluded << " nonpositive gaps excluded)\n";
    if (!(s.fit.slope <= max_slope)) {
      std::cout << "slope above " << max_slope << '\n';
      ok = false;
    }
  }
  std::cout << "wrote " << cfg.output << '\n';
  return ok ? 0 : 1;
}

int cmd_report(const CommonFlags& f) {
  std::string dir = f.out;
  if (dir.empty() && !f.config.empty()) dir = load_with_overrides(f).output;
  if (dir.empty()) throw ConfigError("report: pass --out or --config");
  const ReportCheck r = check_report(dir);
  for (const auto& l : r.lines) std::cout << l << '\n';
  for (const auto& m : r.mismatches) std::cout << "MISMATCH " << m << '\n';
  std::cout << (r.ok() ? "report consistent with trace\n" : "report inconsistent with trace\n");
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"push-sum subgradient simulator and bound checker"};
  app.require_subcommand(1);
  CommonFlags sim, ver, swp, rep;
  std::string horizons = "100,400,1600,6400";
  double max_slope = -0.35;

  auto* s = app.add_subcommand("simulate", "run a config, write trace, plots and report");
  add_common(s, sim, true);
  auto* v = app.add_subcommand("verify", "check the invariant suite on a config");
  add_common(v, ver, true);
  auto* w = app.add_subcommand("sweep", "fixed-stepsize runs across horizons and a rate fit");
  add_common(w, swp, true);
  w->add_option("--horizons", horizons, "comma-separated increasing T values");
  w->add_option("--max-slope", max_slope, "largest acceptable log-log slope");
  auto* r = app.add_subcommand("report", "recompute report numbers from the trace");
  add_common(r, rep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (v->parsed()) return cmd_verify(ver);
    if (w->parsed()) return cmd_sweep(swp, horizons, max_slope);
    if (r->parsed()) return cmd_report(rep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
