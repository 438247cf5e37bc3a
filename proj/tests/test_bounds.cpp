#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pushsub/bounds.hpp"
#include "pushsub/engine.hpp"
#include "pushsub/experiment.hpp"

using namespace pushsub;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(Eigen::Index(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

BoundInputs inputs_for(const ObjectiveSpec& obj, const Matrix& x0, StepsizeSchedule sched,
                       RateConstants k) {
  BoundInputs in;
  in.n = obj.agents;
  in.d = obj.d;
  in.G = obj.G;
  in.constants = k;
  in.z0 = x0;
  in.x0 = x0;
  in.g0 = subgradients(obj, x0);
  in.zstar = *obj.zstar;
  in.schedule = sched;
  return in;
}

BoundInputs three_agent(StepsizeSchedule sched) {
  const ObjectiveSpec q = quadratic_objective(col({1, 3, 5}), Box::cube(1, -10.0, 10.0));
  return inputs_for(q, col({1, 2, 6}), sched, RateConstants::empirical(0.2, 0.6));
}

}  // namespace

TEST(Constants, EmpiricalValidation) {
  EXPECT_THROW(RateConstants::empirical(0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(RateConstants::empirical(0.5, 1.0), std::invalid_argument);
  const RateConstants k = RateConstants::empirical(0.25, 0.0);
  EXPECT_EQ(k.mu_pow(0.0), 1.0);
  EXPECT_EQ(k.mu_pow(3.0), 0.0);
  EXPECT_DOUBLE_EQ(k.inv_eta(), 4.0);
}

TEST(TimeVarying, SeriesMatchesDirectEvaluation) {
  for (const auto& sched : {StepsizeSchedule::harmonic(0.3), StepsizeSchedule::polynomial(0.5, 0.7)}) {
    const BoundInputs in = three_agent(sched);
    const auto net = bound_timevarying_series(in, 200);
    const auto ag = bound_timevarying_series(in, 200, 2);
    for (std::size_t t : {0u, 1u, 2u, 17u, 100u, 199u}) {
      const BoundTerms a = bound_timevarying(in, t);
      const BoundTerms b = bound_timevarying_agent(in, t, 2);
      for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(net[t].term[k], a.term[k], 1e-12 * std::max(1.0, a.term[k])) << t;
        EXPECT_NEAR(ag[t].term[k], b.term[k], 1e-12 * std::max(1.0, b.term[k])) << t;
      }
      EXPECT_EQ(a.rhs(), a.term[0] + a.term[1] + a.term[2] + a.term[3]);
    }
  }
}

TEST(TimeVarying, MixingSumsEmptyAtZero) {
  const BoundTerms b = bound_timevarying(three_agent(StepsizeSchedule::harmonic(0.3)), 0);
  EXPECT_EQ(b.term[2], 0.0);
  EXPECT_EQ(b.term[3], 0.0);
}

TEST(TimeVarying, TermsDecreaseLate) {
  const auto s = bound_timevarying_series(three_agent(StepsizeSchedule::harmonic(0.3)), 5000);
  for (std::size_t t = 1000; t < 5000; t += 500) EXPECT_LT(s[t + 499].rhs(), s[t].rhs()) << t;
}

TEST(TimeVarying, RejectsNonDiminishing) {
  EXPECT_THROW(bound_timevarying(three_agent(StepsizeSchedule::polynomial(1.0, 0.4)), 5),
               std::invalid_argument);
  EXPECT_THROW(bound_timevarying(three_agent(StepsizeSchedule::fixed_horizon(10)), 5),
               std::invalid_argument);
  EXPECT_THROW(bound_timevarying_agent(three_agent(StepsizeSchedule::harmonic(1.0)), 5, 3),
               std::out_of_range);
}

TEST(TimeVarying, SingleAgentReducesToClassicForm) {
  const ObjectiveSpec q = quadratic_objective(col({2.0}), Box::cube(1, -10.0, 10.0));
  const Matrix x0 = col({7.0});
  const auto sched = StepsizeSchedule::harmonic(0.5);
  const BoundInputs in = inputs_for(q, x0, sched, RateConstants::from_theory(theory_constants(1, 1)));
  std::vector<WeightMatrix> ws(300, WeightMatrix{Matrix::Ones(1, 1), 1.0});
  const RunTrace tr = simulate(ws, q, sched, x0, 300);
  const auto avg = running_averages(tr);
  double sa = 0.0, sa2 = 0.0;
  for (std::size_t t = 0; t < 300; ++t) {
    const double a = stepsize(sched, t);
    sa += a;
    sa2 += a * a;
    const BoundTerms b = bound_timevarying(in, t);
    EXPECT_NEAR(b.term[0], (25.0 + q.G * q.G * sa2) / (2.0 * sa), 1e-12 * b.term[0]);
    EXPECT_EQ(b.term[1], 0.0);
    EXPECT_LE(optimality_gap(q, avg[t]), b.term[0]) << t;
  }
}

TEST(TimeVarying, IdenticalStartsGiveEqualAgentAndNetworkBounds) {
  const ObjectiveSpec q = quadratic_objective(col({1, 3, 5, 0}), Box::cube(1, -10.0, 10.0));
  const BoundInputs in = inputs_for(q, col({2, 2, 2, 2}), StepsizeSchedule::harmonic(0.2),
                                    RateConstants::empirical(0.3, 0.5));
  for (std::size_t t : {0u, 10u, 300u}) {
    const BoundTerms net = bound_timevarying(in, t);
    EXPECT_EQ(net.term[1], 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
      const BoundTerms a = bound_timevarying_agent(in, t, k);
      for (int j = 0; j < 4; ++j) EXPECT_EQ(a.term[j], net.term[j]);
    }
  }
}

TEST(TimeVarying, MonotoneInGAndEta) {
  const BoundInputs base = three_agent(StepsizeSchedule::harmonic(0.3));
  BoundInputs bigG = base;
  bigG.G *= 2.0;
  BoundInputs small_eta = base;
  small_eta.constants = RateConstants::empirical(0.05, 0.6);
  for (std::size_t t : {1u, 50u, 400u}) {
    const double r = bound_timevarying(base, t).rhs();
    EXPECT_GT(bound_timevarying(bigG, t).rhs(), r);
    EXPECT_GT(bound_timevarying(small_eta, t).rhs(), r);
  }
}

TEST(TimeVarying, OverflowingConstantsAreVacuousNotNan) {
  BoundInputs in = three_agent(StepsizeSchedule::harmonic(0.3));
  in.constants = RateConstants::from_theory(theory_constants(60, 40));
  EXPECT_EQ(bound_timevarying(in, 0).term[2], 0.0);
  const double r = bound_timevarying(in, 10).rhs();
  EXPECT_TRUE(std::isinf(r) && r > 0.0);
}

TEST(Fixed, SingleAgentForm) {
  const ObjectiveSpec q = quadratic_objective(col({0.0}), Box::cube(1, -4.0, 4.0));
  const BoundInputs in = inputs_for(q, col({3.0}), StepsizeSchedule::fixed_horizon(100),
                                    RateConstants::empirical(1.0, 0.0));
  const BoundTerms b = bound_fixed(in, 100);
  EXPECT_NEAR(b.term[0], (9.0 + q.G * q.G) / 20.0, 1e-15);
  EXPECT_EQ(b.term[1], 0.0);
}

TEST(Fixed, HalvesWhenHorizonQuadruples) {
  BoundInputs a = three_agent(StepsizeSchedule::fixed_horizon(400));
  BoundInputs b = three_agent(StepsizeSchedule::fixed_horizon(1600));
  const double ratio = bound_fixed(b, 1600).rhs() / bound_fixed(a, 400).rhs();
  EXPECT_GE(ratio, 0.45);
  EXPECT_LE(ratio, 0.55);
}

TEST(Fixed, RequiresMatchingSchedule) {
  EXPECT_THROW(bound_fixed(three_agent(StepsizeSchedule::fixed_horizon(100)), 200),
               std::invalid_argument);
  EXPECT_THROW(bound_fixed(three_agent(StepsizeSchedule::harmonic(0.1)), 100),
               std::invalid_argument);
  EXPECT_NO_THROW(bound_fixed_agent(three_agent(StepsizeSchedule::fixed_horizon(100)), 100, 1));
}

TEST(Consensus, ZeroStepsizeIsPureContraction) {
  const BoundInputs in = three_agent(StepsizeSchedule::zero());
  const double mass = in.x0.colwise().sum().norm();
  for (std::size_t t : {0u, 1u, 7u, 30u}) {
    const ConsensusBound b = consensus_contraction_bound(in, t);
    EXPECT_NEAR(b.general, 8.0 / 0.2 * std::pow(0.6, double(t)) * mass, 1e-12 * b.general);
    EXPECT_FALSE(b.refined.has_value());
  }
}

TEST(Consensus, ValueAtZero) {
  const BoundInputs in = three_agent(StepsizeSchedule::harmonic(0.3));
  const double M = (in.x0 + 0.3 * in.g0).colwise().sum().norm();
  const ConsensusBound b = consensus_contraction_bound(in, 0);
  EXPECT_NEAR(b.general, (8.0 / 0.2) * (M + 3.0 * in.G * 0.3), 1e-12 * b.general);
  ASSERT_TRUE(b.refined.has_value());
}

TEST(Consensus, SeriesMatchesDirect) {
  const BoundInputs in = three_agent(StepsizeSchedule::polynomial(0.4, 0.8));
  const auto s = consensus_contraction_series(in, 120);
  for (std::size_t t = 0; t < 120; t += 7) {
    const ConsensusBound b = consensus_contraction_bound(in, t);
    EXPECT_NEAR(s[t].general, b.general, 1e-12 * b.general);
    EXPECT_NEAR(*s[t].refined, *b.refined, 1e-12 * *b.refined);
  }
}

TEST(Bounds, HoldOnThreeAgentCycle) {
  const ObjectiveSpec q = quadratic_objective(col({1, 3, 5}), Box::cube(1, -10.0, 10.0));
  const Matrix x0 = col({1, 2, 6});
  const auto sched = StepsizeSchedule::harmonic(0.2);
  const std::size_t T = 400;
  const auto seq = generate_sequence({GeneratorKind::StaticCycle}, 3, T, 0ULL);
  std::vector<WeightMatrix> ws;
  for (const auto& g : seq.graphs) ws.push_back(build_weights(g, WeightRule::uniform_out_degree()));
  const RunTrace tr = simulate(ws, q, sched, x0, T);
  const EmpiricalConstants emp = estimate_empirical_constants(ws, tr.min_weight());
  ASSERT_TRUE(emp.certified);

  const auto avg = running_averages(tr);
  for (const RateConstants& k : {RateConstants::from_theory(theory_constants(3, 1)),
                                 RateConstants::empirical(emp.eta, emp.mu)}) {
    const BoundInputs in = inputs_for(q, x0, sched, k);
    const auto net = bound_timevarying_series(in, T);
    const auto cons = consensus_contraction_series(in, T);
    for (std::size_t t = 0; t < T; ++t) {
      EXPECT_LE(optimality_gap(q, avg[t]), net[t].rhs()) << k.source << " t=" << t;
      if (t <= 200) EXPECT_LE(tr.steps[t].consensus_deviation, cons[t].general) << k.source;
    }
    for (std::size_t a = 0; a < 3; ++a) {
      const auto agent_avg = running_averages(tr, a);
      const auto ag = bound_timevarying_series(in, T, a);
      for (std::size_t t = 0; t < T; t += 9)
        EXPECT_LE(optimality_gap(q, agent_avg[t]), ag[t].rhs()) << k.source << " agent " << a;
    }
  }
}

TEST(FitRate, ExactPowerLaws) {
  std::vector<std::pair<double, double>> half, one;
  for (double T : {100.0, 400.0, 1600.0, 6400.0}) {
    half.push_back({T, 3.0 / std::sqrt(T)});
    one.push_back({T, 2.0 / T});
  }
  const RateFit a = fit_rate(half);
  EXPECT_NEAR(a.slope, -0.5, 1e-12);
  EXPECT_NEAR(a.r2, 1.0, 1e-12);
  EXPECT_NEAR(fit_rate(one).slope, -1.0, 1e-12);
}

TEST(FitRate, ExclusionAndErrors) {
  const RateFit z = fit_rate({{10, 0.0}, {20, -1e-15}, {40, 0.0}});
  EXPECT_TRUE(z.exact_convergence);
  EXPECT_EQ(z.excluded, 3u);
  const RateFit p = fit_rate({{10, 0.1}, {20, 0.0}, {40, 0.025}});
  EXPECT_EQ(p.excluded, 1u);
  EXPECT_NEAR(p.slope, -1.0, 1e-12);
  EXPECT_THROW(fit_rate({{10, 0.1}, {20, 0.05}}), std::invalid_argument);
  EXPECT_THROW(fit_rate({{10, 0.1}, {20, 0.0}, {40, 0.0}}), std::invalid_argument);
  EXPECT_THROW(fit_rate({{0, 0.1}, {20, 0.05}, {40, 0.02}}), std::invalid_argument);
}

TEST(FitGeometric, Cases) {
  std::vector<double> e;
  for (int t = 0; t < 40; ++t) e.push_back(4.0 * std::pow(0.7, t));
  const GeometricFit f = fit_geometric_rate(e);
  EXPECT_NEAR(f.rho, 0.7, 1e-12);
  EXPECT_NEAR(f.amplitude, 4.0, 1e-9);
  EXPECT_FALSE(f.exact);

  EXPECT_TRUE(fit_geometric_rate({0.0, 0.0}).exact);
  const GeometricFit once = fit_geometric_rate({2.0, 0.0, 0.0});
  EXPECT_TRUE(once.exact);
  EXPECT_EQ(once.amplitude, 2.0);
  EXPECT_NEAR(fit_geometric_rate({1.0, 0.5, 0.25, 0.0}).rho, 0.5, 1e-15);
}

// The sum-norm head term vanishes when the initial values sum to zero, while
// the agents still disagree; the displayed form then fails at t = 0.
TEST(Consensus, ZeroSumStartBreaksSumNormForm) {
  const ObjectiveSpec q = quadratic_objective(col({0, 0, 0}), Box::cube(1, -10.0, 10.0));
  const Matrix x0 = col({-1, 0, 1});
  const auto sched = StepsizeSchedule::zero();
  const auto seq = generate_sequence({GeneratorKind::StaticCycle}, 3, 5, 0ULL);
  std::vector<WeightMatrix> ws;
  for (const auto& g : seq.graphs) ws.push_back(build_weights(g, WeightRule::uniform_out_degree()));
  const RunTrace tr = simulate(ws, q, sched, x0, 5);
  const ConsensusBound b =
      consensus_contraction_bound(inputs_for(q, x0, sched, RateConstants::empirical(0.5, 0.5)), 0);
  EXPECT_EQ(b.general, 0.0);
  EXPECT_GT(tr.steps[0].consensus_deviation, 0.4);
}

TEST(Fixed, MonotoneInGNAndEta) {
  const BoundInputs base = three_agent(StepsizeSchedule::fixed_horizon(400));
  const double r = bound_fixed(base, 400).rhs();
  BoundInputs bigG = base;
  bigG.G *= 1.5;
  EXPECT_GT(bound_fixed(bigG, 400).rhs(), r);
  BoundInputs small_eta = base;
  small_eta.constants = RateConstants::empirical(0.1, 0.6);
  EXPECT_GT(bound_fixed(small_eta, 400).rhs(), r);

  // A fourth agent placed at the current mean leaves the data otherwise unchanged.
  const ObjectiveSpec q4 = quadratic_objective(col({1, 3, 5, 3}), Box::cube(1, -10.0, 10.0));
  const BoundInputs more = inputs_for(q4, col({1, 2, 6, 3}), StepsizeSchedule::fixed_horizon(400),
                                      RateConstants::empirical(0.2, 0.6));
  EXPECT_GT(bound_fixed(more, 400).rhs(), r);
}
