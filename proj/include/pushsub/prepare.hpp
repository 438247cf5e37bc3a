#ifndef PUSHSUB_PREPARE_HPP
#define PUSHSUB_PREPARE_HPP

/// \file prepare.hpp
/// \brief Turns an ExperimentConfig into concrete inputs: initial values,
/// graph sequence, weight matrices, objective and stepsize schedule.
///
/// One std::mt19937_64 seeded from the config drives every random draw, and
/// x(0) is drawn before the graph sequence, so runs that differ only in the
/// horizon share x(0) and a common graph prefix.

#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pushsub/config.hpp"
#include "pushsub/graph.hpp"
#include "pushsub/pushsum.hpp"
#include "pushsub/subgradient.hpp"
#include "pushsub/weights.hpp"

namespace pushsub {

struct PreparedRun {
  ExperimentConfig config;
  GraphSequence graphs;
  std::vector<Matrix> raw_weights;      // as read or constructed, before validation
  std::vector<ValidationReport> weight_reports;
  std::vector<WeightMatrix> weights;    // filled only when every report is ok
  ObjectiveSpec objective;
  StepsizeSchedule schedule;
  ScheduleReport schedule_report;
  Matrix x0;
  std::optional<std::size_t> window;

  std::size_t n() const { return graphs.n; }
  std::size_t steps() const { return graphs.horizon(); }
  bool weights_ok() const { return !weights.empty(); }
};

namespace detail {

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), Eigen::Index(v.size()));
}

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols,
                        const std::string& what) {
  Matrix m(Eigen::Index(rows.size()), Eigen::Index(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw ConfigError(what + ": row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows[i].size()) + " entries, expected " +
                        std::to_string(cols));
    for (std::size_t k = 0; k < cols; ++k) m(Eigen::Index(i), Eigen::Index(k)) = rows[i][k];
  }
  return m;
}

inline Box config_box(const ExperimentConfig& c) {
  const auto& o = c.objective;
  if (o.box_lo.size() != c.d || o.box_hi.size() != c.d)
    throw ConfigError("objective.box: lo and hi need d=" + std::to_string(c.d) + " entries");
  return Box{to_vector(o.box_lo), to_vector(o.box_hi)};
}

inline Matrix draw_initial_values(const ExperimentConfig& c, std::size_t n, std::mt19937_64& rng) {
  const auto& in = c.init;
  if (in.mode == "explicit") {
    if (in.x.size() != n)
      throw ConfigError("init.x: expected " + std::to_string(n) + " rows, got " +
                        std::to_string(in.x.size()));
    return to_matrix(in.x, c.d, "init.x");
  }
  if (in.mode != "random") throw ConfigError("init.mode: expected 'random' or 'explicit'");
  const Box box = config_box(c);
  const Vector lo = in.lo.empty() ? box.lo : to_vector(in.lo);
  const Vector hi = in.hi.empty() ? box.hi : to_vector(in.hi);
  if (lo.size() != Eigen::Index(c.d) || hi.size() != Eigen::Index(c.d))
    throw ConfigError("init.lo/init.hi: need d entries");
  if ((lo.array() > hi.array()).any()) throw ConfigError("init: lo > hi");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix x(Eigen::Index(n), Eigen::Index(c.d));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = lo(k) + (hi(k) - lo(k)) * unif(rng);
  return x;
}

inline GraphSequence load_graphs(const ExperimentConfig& c, std::mt19937_64& rng) {
  if (!c.graph.file.empty()) {
    std::ifstream in(c.graph.file);
    if (!in) throw ConfigError("cannot open graph file '" + c.graph.file + "'");
    GraphSequence seq;
    try {
      seq = read_graph_sequence(in);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (seq.n != c.graph.n)
      throw ConfigError("graph file has n=" + std::to_string(seq.n) + " but graph.n=" +
                        std::to_string(c.graph.n));
    if (seq.horizon() < c.graph.horizon)
      throw ConfigError("graph file has horizon " + std::to_string(seq.horizon()) +
                        " < graph.horizon=" + std::to_string(c.graph.horizon));
    seq.graphs.resize(c.graph.horizon);
    seq.seed = c.seed;
    return seq;
  }
  GeneratorSpec spec;
  try {
    spec.kind = parse_generator_kind(c.graph.kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("graph.kind: ") + e.what());
  }
  spec.inject_period = c.graph.inject_period;
  spec.arc_probability = c.graph.arc_probability;
  try {
    GraphSequence seq = generate_sequence(spec, c.graph.n, c.graph.horizon, rng);
    seq.seed = c.seed;
    return seq;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
}

inline std::vector<Matrix> load_raw_weights(const ExperimentConfig& c, const GraphSequence& seq) {
  std::vector<Matrix> out;
  if (c.weights.rule == "uniform-out-degree") {
    out.reserve(seq.horizon());
    for (const Digraph& g : seq.graphs) {
      if (!g.has_all_self_arcs()) throw ConfigError("graph lacks a self-arc");
      out.push_back(build_weights(g, WeightRule::uniform_out_degree()).entries);
    }
    return out;
  }
  if (c.weights.rule != "custom")
    throw ConfigError("weights.rule: expected 'uniform-out-degree' or 'custom'");
  if (c.weights.file.empty()) throw ConfigError("weights.rule=custom needs weights.file");
  std::ifstream in(c.weights.file);
  if (!in) throw ConfigError("cannot open weights file '" + c.weights.file + "'");
  std::vector<Matrix> ms;
  try {
    ms = read_dense_matrices(in);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (ms.size() == 1) {
    out.assign(seq.horizon(), ms.front());
  } else if (ms.size() >= seq.horizon()) {
    out.assign(ms.begin(), ms.begin() + std::ptrdiff_t(seq.horizon()));
  } else {
    throw ConfigError("weights file holds " + std::to_string(ms.size()) +
                      " matrices; need 1 or at least the horizon (" +
                      std::to_string(seq.horizon()) + ")");
  }
  for (const Matrix& m : out)
    if (m.rows() != Eigen::Index(seq.n) || m.cols() != Eigen::Index(seq.n))
      throw ConfigError("weights file: matrices must be " + std::to_string(seq.n) + "x" +
                        std::to_string(seq.n));
  return out;
}

inline ObjectiveSpec build_objective(const ExperimentConfig& c, std::size_t n) {
  const auto& o = c.objective;
  const Box box = config_box(c);
  ObjectiveSpec obj;
  try {
    const ObjectiveKind kind = parse_objective_kind(o.kind);
    switch (kind) {
      case ObjectiveKind::Quadratic:
      case ObjectiveKind::L1: {
        if (o.targets.size() != n)
          throw ConfigError("objective.targets: expected " + std::to_string(n) + " rows");
        Matrix a = to_matrix(o.targets, c.d, "objective.targets");
        obj = kind == ObjectiveKind::Quadratic ? quadratic_objective(a, box, o.G)
                                               : l1_objective(a, box, o.G);
        break;
      }
      case ObjectiveKind::Hinge: {
        if (o.features.size() != n || o.labels.size() != n)
          throw ConfigError("objective: hinge needs " + std::to_string(n) +
                            " feature rows and labels");
        obj = hinge_objective(to_matrix(o.features, c.d, "objective.features"),
                              to_vector(o.labels), box, o.G);
        break;
      }
      case ObjectiveKind::Zero:
        obj = zero_objective(n, box, o.G);
        break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("objective: ") + e.what());
  }
  if (o.zstar) {
    if (o.zstar->size() != c.d) throw ConfigError("objective.zstar: need d entries");
    const Vector z = to_vector(*o.zstar);
    const double f = objective_value(obj, z);
    if (obj.fstar && f > *obj.fstar + 1e-9)
      throw ConfigError("objective.zstar is not a minimizer: f(zstar)=" + std::to_string(f) +
                        " > " + std::to_string(*obj.fstar));
    obj.zstar = z;
    obj.fstar = f;
    obj.optimum_provenance = "declared";
  }
  return obj;
}

inline StepsizeSchedule build_schedule(const ExperimentConfig& c) {
  const auto& s = c.schedule;
  ScheduleKind kind;
  try {
    kind = parse_schedule_kind(s.kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule.kind: ") + e.what());
  }
  switch (kind) {
    case ScheduleKind::Harmonic:
      return StepsizeSchedule::harmonic(s.a);
    case ScheduleKind::Polynomial:
      return StepsizeSchedule::polynomial(s.a, s.p);
    case ScheduleKind::FixedHorizon: {
      const std::size_t T = s.T == 0 ? c.graph.horizon : s.T;
      if (T != c.graph.horizon)
        throw ConfigError("schedule.T=" + std::to_string(T) + " must equal graph.horizon=" +
                          std::to_string(c.graph.horizon));
      return StepsizeSchedule::fixed_horizon(T);
    }
    case ScheduleKind::Zero:
      return StepsizeSchedule::zero();
  }
  throw ConfigError("schedule.kind: unsupported");
}

}  // namespace detail

/// Builds every input of a run. Weight validation results are kept rather
/// than thrown so that verify can report them; `weights` stays empty when any
/// matrix fails.
inline PreparedRun prepare_inputs(const ExperimentConfig& cfg) {
  if (cfg.d == 0) throw ConfigError("d must be >= 1");
  if (cfg.graph.n == 0) throw ConfigError("graph.n must be >= 1");
  if (cfg.graph.horizon == 0) throw ConfigError("graph.horizon must be >= 1");
  PreparedRun run;
  run.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  run.x0 = detail::draw_initial_values(cfg, cfg.graph.n, rng);
  run.graphs = detail::load_graphs(cfg, rng);
  run.raw_weights = detail::load_raw_weights(cfg, run.graphs);
  const double beta_min = cfg.weights.rule == "uniform-out-degree"
                              ? 1.0 / static_cast<double>(run.n())
                              : std::numeric_limits<double>::min();
  const double tol =
      cfg.weights.rule == "uniform-out-degree" ? kConstructedStochasticTol : kUserStochasticTol;
  bool all_ok = true;
  for (std::size_t t = 0; t < run.raw_weights.size(); ++t) {
    run.weight_reports.push_back(
        validate_column_stochastic(run.raw_weights[t], run.graphs[t], beta_min, tol));
    all_ok = all_ok && run.weight_reports.back().ok();
  }
  if (all_ok) {
    run.weights.reserve(run.raw_weights.size());
    for (const Matrix& m : run.raw_weights)
      run.weights.push_back(WeightMatrix{m, smallest_positive_entry(m)});
  }
  run.objective = detail::build_objective(cfg, run.n());
  run.schedule = detail::build_schedule(cfg);
  run.schedule_report = validate_schedule(run.schedule);
  run.window = uniform_connectivity_window(run.graphs);
  return run;
}

/// prepare_inputs plus the hard preconditions of a simulation run. Each
/// failure names the hypothesis that does not hold.
inline PreparedRun prepare_run(const ExperimentConfig& cfg) {
  PreparedRun run = prepare_inputs(cfg);
  for (std::size_t t = 0; t < run.weight_reports.size(); ++t)
    if (!run.weight_reports[t].ok())
      throw ConfigError("mixing-weight assumption violated at t=" + std::to_string(t) + ": " +
                        run.weight_reports[t].summary());
  if (run.schedule_report.applicable && !run.schedule_report.satisfies_assumption())
    throw ConfigError("diminishing-stepsize assumption violated: " + run.schedule_report.note);
  if (!run.window)
    throw ConfigError(
        "uniform strong connectivity: no window L certifies the graph sequence over the horizon");
  for (Eigen::Index i = 0; i < run.x0.rows(); ++i)
    if (!run.objective.box.contains(run.x0.row(i).transpose()))
      throw ConfigError("init: x_" + std::to_string(i + 1) + "(0) lies outside the objective box");
  return run;
}

}  // namespace pushsub

#endif  // PUSHSUB_PREPARE_HPP
