#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pushsub/weights.hpp"

using namespace pushsub;

namespace {

bool has_kind(const ValidationReport& r, ViolationKind k) {
  for (const auto& v : r.violations)
    if (v.kind == k) return true;
  return false;
}

}  // namespace

TEST(BuildWeights, ThreeCycleHasTwoHalvesPerColumn) {
  const WeightMatrix w = build_weights(cycle_graph(3), WeightRule::uniform_out_degree());
  for (Eigen::Index j = 0; j < 3; ++j) {
    int halves = 0;
    for (Eigen::Index i = 0; i < 3; ++i) {
      if (w.entries(i, j) == 0.5) ++halves;
      else EXPECT_EQ(w.entries(i, j), 0.0);
    }
    EXPECT_EQ(halves, 2);
    EXPECT_EQ(w.entries(j, j), 0.5);
    EXPECT_EQ(w.entries((j + 1) % 3, j), 0.5);
  }
  EXPECT_EQ(w.beta, 0.5);
}

TEST(BuildWeights, SelfArcsOnlyGivesIdentity) {
  const WeightMatrix w = build_weights(Digraph(4), WeightRule::uniform_out_degree());
  EXPECT_TRUE(w.entries.isApprox(Matrix::Identity(4, 4), 0.0));
  EXPECT_EQ(w.beta, 1.0);
}

TEST(BuildWeights, SingleAgent) {
  const WeightMatrix w = build_weights(Digraph(1), WeightRule::uniform_out_degree());
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.entries(0, 0), 1.0);
}

TEST(BuildWeights, UniformRuleAlwaysValidates) {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 6;
    Digraph g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && coin(rng)) g.add_arc(i, j);
    const WeightMatrix w = build_weights(g, WeightRule::uniform_out_degree());
    const ValidationReport r =
        validate_column_stochastic(w, g, 1.0 / double(n), kConstructedStochasticTol);
    EXPECT_TRUE(r.ok()) << r.summary();
    EXPECT_GE(w.beta, 1.0 / double(n));
  }
}

TEST(BuildWeights, CustomIsValidatedNotRepaired) {
  const Digraph g = cycle_graph(3);
  Matrix good = build_weights(g, WeightRule::uniform_out_degree()).entries;
  good(0, 0) = 0.7;
  good(1, 0) = 0.3;
  const WeightMatrix w = build_weights(g, WeightRule::custom_entries(good));
  EXPECT_TRUE(w.entries.isApprox(good, 0.0));
  EXPECT_DOUBLE_EQ(w.beta, 0.3);

  Matrix bad = good;
  bad(1, 0) = 0.2;
  EXPECT_THROW(build_weights(g, WeightRule::custom_entries(bad)), std::invalid_argument);
}

TEST(Validate, ColumnSumViolationNamesColumn) {
  const Digraph g = cycle_graph(3);
  Matrix m = build_weights(g, WeightRule::uniform_out_degree()).entries;
  m(1, 1) = 0.4;  // column 2 sums to 0.9
  const ValidationReport r = validate_column_stochastic(m, g, 0.1, kUserStochasticTol);
  ASSERT_FALSE(r.ok());
  ASSERT_TRUE(has_kind(r, ViolationKind::ColumnSum));
  for (const auto& v : r.violations)
    if (v.kind == ViolationKind::ColumnSum) {
      EXPECT_EQ(v.col, 1u);
      EXPECT_NEAR(v.value, 0.9, 1e-15);
      EXPECT_NE(v.message.find("column 2"), std::string::npos) << v.message;
    }
}

TEST(Validate, SupportViolation) {
  const Digraph g = cycle_graph(3);
  Matrix m = build_weights(g, WeightRule::uniform_out_degree()).entries;
  // Move mass of column 1 onto a non-arc (1 -> 3 is absent in the 3-cycle).
  m(1, 0) = 0.25;
  m(2, 0) = 0.25;
  const ValidationReport r = validate_column_stochastic(m, g, 0.1, kUserStochasticTol);
  EXPECT_TRUE(has_kind(r, ViolationKind::Support));
  EXPECT_FALSE(has_kind(r, ViolationKind::ColumnSum));
}

TEST(Validate, BetaZeroDiagonalNegativeAndShape) {
  const Digraph g = cycle_graph(2);
  Matrix m(2, 2);
  m << 0.95, 0.5, 0.05, 0.5;
  EXPECT_TRUE(has_kind(validate_column_stochastic(m, g, 0.1, kUserStochasticTol),
                       ViolationKind::BelowBeta));
  m << 0.0, 0.5, 1.0, 0.5;
  EXPECT_TRUE(has_kind(validate_column_stochastic(m, g, 0.01, kUserStochasticTol),
                       ViolationKind::ZeroDiagonal));
  m << 1.5, 0.5, -0.5, 0.5;
  EXPECT_TRUE(has_kind(validate_column_stochastic(m, g, 0.01, kUserStochasticTol),
                       ViolationKind::Negative));
  EXPECT_TRUE(has_kind(validate_column_stochastic(Matrix::Identity(3, 3), g, 0.01,
                                                  kUserStochasticTol),
                       ViolationKind::Shape));
}

TEST(Validate, ToleranceBoundary) {
  const Digraph g = cycle_graph(2);
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.5 + 5e-10, 0.5;
  EXPECT_TRUE(validate_column_stochastic(m, g, 0.1, kUserStochasticTol).ok());
  EXPECT_FALSE(validate_column_stochastic(m, g, 0.1, kConstructedStochasticTol).ok());
}

TEST(DenseMatrices, RoundTripAndErrors) {
  Matrix a(2, 2), b(2, 2);
  a << 0.1, 1.0 / 3.0, 0.9, 2.0 / 3.0;
  b << 1, 0, 0, 1;
  std::stringstream ss;
  write_dense_matrix(ss, a);
  ss << '\n';
  write_dense_matrix(ss, b);
  const auto ms = read_dense_matrices(ss);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_TRUE(ms[0] == a);
  EXPECT_TRUE(ms[1] == b);

  std::istringstream ragged("1 0\n0\n");
  EXPECT_THROW(read_dense_matrices(ragged), std::runtime_error);
  std::istringstream junk("1 x\n0 1\n");
  EXPECT_THROW(read_dense_matrices(junk), std::runtime_error);
  std::istringstream empty("\n\n");
  EXPECT_THROW(read_dense_matrices(empty), std::runtime_error);
}
