// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pushsub/experiment.hpp"
#include "pushsub/sweep.hpp"
#include "pushsub/verify.hpp"

using namespace pushsub;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* id, bool ok, const std::string& what) {
  std::printf("[%s] %s %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const GeneratorKind kKinds[] = {GeneratorKind::StaticCycle, GeneratorKind::RotatingArc,
                                GeneratorKind::RandomWalkable};

ExperimentConfig base_config(std::uint64_t seed, GeneratorKind kind, std::size_t n, std::size_t d,
                             std::size_t horizon) {
  ExperimentConfig c;
  c.seed = seed;
  c.d = d;
  c.graph.kind = to_string(kind);
  c.graph.n = n;
  c.graph.horizon = horizon;
  c.objective.box_lo.assign(d, -10.0);
  c.objective.box_hi.assign(d, 10.0);
  c.init.lo.assign(d, 1.0);
  c.init.hi.assign(d, 5.0);
  return c;
}

// Certified optimization configs, diminishing schedule; the fixed-horizon
// twin of each is built by fixed_twin().
std::vector<ExperimentConfig> certified_configs() {
  struct Row {
    GeneratorKind kind;
    std::size_t n, d;
    const char* objective;
  };
  const Row rows[] = {
      {GeneratorKind::StaticCycle, 3, 1, "quadratic"},  {GeneratorKind::RotatingArc, 4, 1, "l1"},
      {GeneratorKind::RandomWalkable, 5, 1, "l1"},      {GeneratorKind::RandomWalkable, 6, 2, "quadratic"},
      {GeneratorKind::StaticCycle, 5, 2, "hinge"},      {GeneratorKind::RotatingArc, 3, 2, "hinge"},
      {GeneratorKind::RandomWalkable, 2, 1, "quadratic"}, {GeneratorKind::StaticCycle, 6, 2, "l1"},
      {GeneratorKind::RandomWalkable, 4, 2, "hinge"},   {GeneratorKind::RotatingArc, 5, 1, "quadratic"},
  };
  std::vector<ExperimentConfig> out;
  std::mt19937_64 data_rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uint64_t seed = 100;
  for (const Row& r : rows) {
    ExperimentConfig c = base_config(seed++, r.kind, r.n, r.d, 400);
    c.objective.kind = r.objective;
    for (std::size_t i = 0; i < r.n; ++i) {
      std::vector<double> row(r.d);
      for (double& v : row) v = u(data_rng);
      if (c.objective.kind == "hinge") {
        c.objective.features.push_back(row);
        c.objective.labels.push_back(i % 2 ? -1.0 : 1.0);
      } else {
        c.objective.targets.push_back(row);
      }
    }
    c.schedule.kind = "harmonic";
    c.schedule.a = 0.2;
    out.push_back(c);
  }
  return out;
}

ExperimentConfig fixed_twin(ExperimentConfig c) {
  c.schedule.kind = "fixed-horizon";
  c.schedule.T = c.graph.horizon;
  return c;
}

std::string trace_bytes(const ExperimentResult& r) {
  std::ostringstream os;
  export_trace(os, r.trace, trace_bounds(r));
  return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct RunStats {
  double pi_residual = 0.0;
  double pi_stochastic = 0.0;
  double lyapunov = 0.0;
  double mass = 0.0;
  double floor_slack = std::numeric_limits<double>::infinity();  // min y / n^{-nL}
  std::size_t runs = 0;
  std::size_t optimization_runs = 0;

  void absorb(const ExperimentResult& r) {
    ++runs;
    const double n = double(r.run.n());
    auto stoch = [&](const Vector& y) { pi_stochastic = std::max(pi_stochastic, stochastic_defect(y / n)); };
    for (const auto& s : r.trace.steps) {
      pi_residual = std::max(pi_residual, s.pi_residual);
      stoch(s.y);
    }
    stoch(r.trace.final_state.y);
    if (r.run.schedule.kind != ScheduleKind::Zero) {
      ++optimization_runs;
      lyapunov = std::max(lyapunov, r.invariants.max_lyapunov_residual);
    }
    mass = std::max(mass, r.invariants.max_mass_drift);
    floor_slack = std::min(floor_slack, r.invariants.min_weight / r.invariants.weight_floor);
  }
};

}  // namespace

int main() {
  RunStats stats;

  // AC1: pure push-sum on 20 seeded configs.
  {
    const auto t0 = Clock::now();
    double worst_err = 0.0, worst_slope = -std::numeric_limits<double>::infinity(), worst_r2 = 1.0;
    std::size_t exact = 0;
    bool ok = true;
    for (std::size_t k = 0; k < 20; ++k) {
      const std::size_t n = 2 + k % 5;
      ExperimentConfig c = base_config(1000 + k, kKinds[k % 3], n, 1, 300);
      c.objective.kind = "zero";
      c.schedule.kind = "zero";
      const ExperimentResult r = run_experiment(c);
      stats.absorb(r);
      const double avg = r.run.x0.mean();
      const Matrix z = ratio_state(r.trace.final_state);
      const double err = (z.array() - avg).abs().maxCoeff();
      worst_err = std::max(worst_err, err);
      std::vector<double> errors;
      for (const auto& s : r.trace.steps) errors.push_back(s.consensus_err);
      errors.push_back(consensus_error(z));
      const GeometricFit fit = fit_geometric_rate(errors);
      if (fit.exact) {
        ++exact;
      } else {
        worst_slope = std::max(worst_slope, fit.slope);
        worst_r2 = std::min(worst_r2, fit.r2);
        ok = ok && fit.slope < 0.0 && fit.r2 >= 0.9;
      }
      ok = ok && err <= 1e-8;
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 5.0;
    report("AC1", ok,
           "push-sum consensus: max_i |z_i(300) - avg| = " + fmt("%.3g", worst_err) +
               ", worst fitted slope " + fmt("%.4f", worst_slope) + ", worst r2 " +
               fmt("%.4f", worst_r2) + ", " + std::to_string(exact) +
               " runs exact within one step, " + fmt("%.2f", secs) + " s");
  }

  // AC2: product identity.
  {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 2 + seed % 5;
      const std::size_t H = 80;
      const GraphSequence seq =
          generate_sequence({kKinds[seed % 3]}, n, H, 500 + seed);
      std::vector<WeightMatrix> ws;
      for (const auto& g : seq.graphs) ws.push_back(build_weights(g, WeightRule::uniform_out_degree()));
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-5.0, 5.0);
      Matrix x0(Eigen::Index(n), 1);
      for (Eigen::Index i = 0; i < x0.rows(); ++i) x0(i, 0) = u(rng);
      NetworkState s = make_initial_state(x0);
      std::vector<Vector> ys{s.y};
      std::vector<SMatrix> ss;
      for (std::size_t t = 0; t < H; ++t) {
        ss.push_back(build_s_matrix(ws[t], s.y));
        s = pushsum_step(s, ws[t]);
        ys.push_back(s.y);
      }
      for (std::size_t tau = 0; tau < H; ++tau)
        for (std::size_t t = tau + 1; t <= std::min(H, tau + 50); ++t)
          worst = std::max(worst, verify_product_identity(ws, ss, ys, tau, t));
    }
    report("AC2", worst <= 1e-9,
           "product identity: max residual " + fmt("%.3g", worst) + " over 10 seeds, t - tau <= 50");
  }

  // AC5 / AC6 / AC9 runs; AC3 and AC4 gather over everything simulated.
  {
    const auto t0 = Clock::now();
    double min_margin = std::numeric_limits<double>::infinity();
    double min_envelope = std::numeric_limits<double>::infinity();
    bool certified = true, checked = true;
    std::size_t evaluated = 0;
    std::string worst_where;
    for (const ExperimentConfig& base : certified_configs()) {
      for (const ExperimentConfig& c : {base, fixed_twin(base)}) {
        const ExperimentResult r = run_experiment(c);
        stats.absorb(r);
        certified = certified && r.empirical.certified && r.run.window;
        for (const BoundCheck& b : r.checks) {
          if (b.constants != "empirical") continue;
          if (b.name == "network" || b.name == "agents") {
            evaluated += b.evaluated;
            if (b.min_margin < min_margin) {
              min_margin = b.min_margin;
              worst_where = b.name + " seed " + std::to_string(c.seed) + " " + c.schedule.kind;
            }
          }
        }
        const std::size_t upto = std::min<std::size_t>(r.trace.size(), 201);
        for (std::size_t t = 0; t < upto; ++t) {
          const double rhs = r.envelope_empirical[t];
          if (std::isnan(rhs)) checked = false;
          min_envelope = std::min(min_envelope, rhs - r.trace.steps[t].consensus_deviation);
        }
      }
    }
    const double secs = seconds_since(t0);
    report("AC5", certified && min_margin >= 0.0 && secs < 60.0,
           "bound dominance with measured constants: min margin " + fmt("%.6g", min_margin) + " (" +
               worst_where + "), " + std::to_string(evaluated) + " evaluations on 10 configs x 2 schedules, " +
               fmt("%.2f", secs) + " s");
    report("AC6", certified && checked && min_envelope >= 0.0,
           "consensus contraction envelope, t <= 200: min margin " + fmt("%.6g", min_envelope));
  }

  // AC7: rate sweep.
  {
    const auto t0 = Clock::now();
    ExperimentConfig c = base_config(11, GeneratorKind::RandomWalkable, 5, 1, 100);
    c.objective.kind = "l1";
    c.objective.targets = {{0.0}, {1.0}, {1.5}, {3.0}, {4.0}};
    const SweepResult s = run_sweep(c, {100, 400, 1600, 6400});
    // The sweep's runs count toward the invariant criteria too.
    for (std::size_t T : {100, 400, 1600, 6400}) stats.absorb(run_experiment(horizon_variant(c, T)));
    const double secs = seconds_since(t0);
    std::string table;
    for (const auto& p : s.points)
      table += " T=" + std::to_string(p.T) + ":" + fmt("%.3g", p.reported_gap);
    report("AC7", !s.fit.exact_convergence && s.fit.slope <= -0.35 && s.fit.r2 >= 0.9 && secs < 120.0,
           "O(1/sqrt T) sweep, l1 median n=5: slope " + fmt("%.4f", s.fit.slope) + " r2 " +
               fmt("%.4f", s.fit.r2) + " |" + table + ", " + fmt("%.2f", secs) + " s");
  }

  report("AC3", stats.pi_residual <= 1e-10 && stats.pi_stochastic <= 1e-12,
         "absolute probability sequence over " + std::to_string(stats.runs) +
             " runs: recursion residual " + fmt("%.3g", stats.pi_residual) + ", stochastic defect " +
             fmt("%.3g", stats.pi_stochastic));
  report("AC4", stats.lyapunov <= 1e-9,
         "Lyapunov recursion over " + std::to_string(stats.optimization_runs) +
             " optimization runs: max residual " + fmt("%.3g", stats.lyapunov));

  // AC8: subgradient inequality.
  {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const std::size_t n = 4, d = 2;
    Matrix targets(n, d), features(n, d);
    Vector labels(n);
    for (Eigen::Index i = 0; i < Eigen::Index(n); ++i) {
      for (Eigen::Index k = 0; k < Eigen::Index(d); ++k) {
        targets(i, k) = u(rng);
        features(i, k) = u(rng) / 4.0;
      }
      labels(i) = i % 2 ? -1.0 : 1.0;
    }
    const Box box = Box::cube(d, -10.0, 10.0);
    const std::vector<ObjectiveSpec> objs{quadratic_objective(targets, box), l1_objective(targets, box),
                                          hinge_objective(features, labels, box), zero_objective(n, box)};
    double worst = std::numeric_limits<double>::infinity();
    std::size_t tests = 0;
    for (const ObjectiveSpec& obj : objs) {
      for (int p = 0; p < 100; ++p) {
        const std::size_t i = std::size_t(p) % n;
        Vector x(d);
        for (auto& v : x) v = u(rng);
        // Every fourth point sits on a kink of the nonsmooth kinds.
        if (p % 4 == 0 && obj.kind == ObjectiveKind::L1) x(0) = obj.targets(Eigen::Index(i), 0);
        if (p % 4 == 0 && obj.kind == ObjectiveKind::Hinge) {
          const Vector w = obj.features.row(Eigen::Index(i)).transpose();
          x -= ((obj.labels(Eigen::Index(i)) * w.dot(x) - 1.0) / (obj.labels(Eigen::Index(i)) * w.squaredNorm())) * w;
        }
        const Vector g = subgradient(obj, i, x);
        const double fx = term_value(obj, i, x);
        for (int q = 0; q < 100; ++q) {
          Vector y(d);
          for (auto& v : y) v = u(rng);
          worst = std::min(worst, term_value(obj, i, y) - fx - g.dot(y - x));
          ++tests;
        }
      }
    }
    report("AC8", worst >= -1e-10,
           "subgradient inequality: min slack " + fmt("%.3g", worst) + " over " +
               std::to_string(tests) + " point/probe pairs, 4 objective kinds");
  }

  report("AC9", stats.mass <= 1e-9 && stats.floor_slack >= 1.0,
         "mass conservation max |sum y - n| = " + fmt("%.3g", stats.mass) +
             ", min y / n^{-nL} = " + fmt("%.3g", stats.floor_slack) + " over " +
             std::to_string(stats.runs) + " runs");

  // AC10: determinism.
  {
    bool ok = true;
    std::string hashes;
    std::vector<ExperimentConfig> cfgs = certified_configs();
    cfgs.resize(3);
    const auto tmp = std::filesystem::temp_directory_path() / "pushsub_acceptance";
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
      const ExperimentResult a = run_experiment(cfgs[k]);
      const ExperimentResult b = run_experiment(cfgs[k]);
      write_outputs(a, tmp / ("a" + std::to_string(k)));
      write_outputs(b, tmp / ("b" + std::to_string(k)));
      const std::uint64_t ha = fnv1a(file_bytes(tmp / ("a" + std::to_string(k)) / "trace.csv"));
      const std::uint64_t hb = fnv1a(file_bytes(tmp / ("b" + std::to_string(k)) / "trace.csv"));
      ok = ok && ha == hb && ha == fnv1a(trace_bytes(a));
      char buf[32];
      std::snprintf(buf, sizeof buf, " %016llx", static_cast<unsigned long long>(ha));
      hashes += buf;
    }
    std::filesystem::remove_all(tmp);
    report("AC10", ok, "repeated runs give identical trace files, FNV-1a:" + hashes);
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
