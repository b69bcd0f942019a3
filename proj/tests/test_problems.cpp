#include "prescriptor/lp.hpp"
#include "prescriptor/problems.hpp"
#include "prescriptor/recourse.hpp"
#include "prescriptor/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace prescriptor;

namespace {

// Second stage written out as an explicit LP: ship s_ij, emergency t_i.
double shipment_oracle(const ShipmentProblem& p, const Vector& z, const Vector& y) {
  LinearProgram lp;
  const std::size_t dz = p.dz(), dy = p.dy();
  std::vector<std::size_t> t(dz);
  for (std::size_t i = 0; i < dz; ++i) t[i] = lp.add_variable(p.p2);
  std::vector<std::vector<std::size_t>> s(dz, std::vector<std::size_t>(dy));
  for (std::size_t i = 0; i < dz; ++i)
    for (std::size_t j = 0; j < dy; ++j)
      s[i][j] = lp.add_variable(p.ship_cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  for (std::size_t i = 0; i < dz; ++i) {
    const auto r = lp.add_row(RowSense::le, z(static_cast<Eigen::Index>(i)));
    for (std::size_t j = 0; j < dy; ++j) lp.set(r, s[i][j], 1.0);
    lp.set(r, t[i], -1.0);
  }
  for (std::size_t j = 0; j < dy; ++j) {
    const auto r = lp.add_row(RowSense::ge, y(static_cast<Eigen::Index>(j)));
    for (std::size_t i = 0; i < dz; ++i) lp.set(r, s[i][j], 1.0);
  }
  const LpSolution sol = solve_lp(lp);
  EXPECT_EQ(sol.status, LpStatus::optimal);
  return p.p1 * z.sum() + sol.objective;
}

Vector random_demand(Rng& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> unif(0.0, scale);
  Vector y(static_cast<Eigen::Index>(n));
  for (auto& v : y) v = unif(rng);
  return y;
}

}  // namespace

TEST(Shipment, BenchmarkDistancesMatchPublishedTable) {
  const double first_cols[12][4] = {
      {0.15, 1.3124, 1.85, 1.3124},      {0.50026, 0.93408, 1.7874, 1.6039}, {0.93408, 0.50026, 1.6039, 1.7874},
      {1.3124, 0.15, 1.3124, 1.85},      {1.6039, 0.50026, 0.93408, 1.7874}, {1.7874, 0.93408, 0.50026, 1.6039},
      {1.85, 1.3124, 0.15, 1.3124},      {1.7874, 1.6039, 0.50026, 0.93408}, {1.6039, 1.7874, 0.93408, 0.50026},
      {1.3124, 1.85, 1.3124, 0.15},      {0.93408, 1.7874, 1.6039, 0.50026}, {0.50026, 1.6039, 1.7874, 0.93408}};
  const Matrix D = ShipmentProblem::benchmark_distances();
  ASSERT_EQ(D.rows(), 4);
  ASSERT_EQ(D.cols(), 12);
  for (int j = 0; j < 12; ++j)
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(D(i, j), first_cols[j][i], 6e-5);
  const ShipmentProblem p = ShipmentProblem::benchmark();
  EXPECT_DOUBLE_EQ(p.ship_cost(0, 0), 10.0 * D(0, 0));
  EXPECT_EQ(p.p1, 5.0);
  EXPECT_EQ(p.p2, 100.0);
}

TEST(Shipment, NoStockMeansEmergencyProductionEverywhere) {
  const ShipmentProblem p = ShipmentProblem::benchmark();
  Rng rng(41);
  const Vector y = random_demand(rng, 12, 3.0);
  double expected = 0.0;
  for (Eigen::Index j = 0; j < 12; ++j) expected += y(j) * (p.p2 + p.ship_cost.col(j).minCoeff());
  EXPECT_NEAR(shipment_cost(p, Vector::Zero(4), y), expected, 1e-8);
}

TEST(Shipment, MatchesExplicitLp) {
  const ShipmentProblem p = ShipmentProblem::benchmark();
  ShipmentRecourse recourse(p);
  Rng rng(42);
  for (int rep = 0; rep < 40; ++rep) {
    const Vector z = random_demand(rng, 4, 8.0);
    const Vector y = random_demand(rng, 12, 3.0);
    const double oracle = shipment_oracle(p, z, y);
    EXPECT_NEAR(recourse.total_cost(z, y), oracle, 1e-8 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(Shipment, GradientMatchesFiniteDifference) {
  const ShipmentProblem p = ShipmentProblem::benchmark();
  ShipmentRecourse recourse(p);
  Rng rng(43);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector z = random_demand(rng, 4, 6.0);
    const Vector y = random_demand(rng, 12, 2.0);
    const auto v = recourse.second_stage(z, y);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double h = 1e-6;
      Vector zu = z, zd = z;
      zu(i) += h;
      zd(i) -= h;
      const double right = (recourse.second_stage(zu, y).cost - v.cost) / h;
      const double left = (v.cost - recourse.second_stage(zd, y).cost) / h;
      if (std::abs(right - left) > 1e-5) continue;
      EXPECT_NEAR(v.grad_z(i), right, 1e-5);
      ++checked;
    }
  }
  EXPECT_GT(checked, 40);
}

TEST(Shipment, CostIsConvexInStock) {
  const ShipmentProblem p = ShipmentProblem::benchmark();
  Rng rng(44);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector a = random_demand(rng, 4, 6.0), b = random_demand(rng, 4, 6.0);
    const Vector y = random_demand(rng, 12, 2.0);
    const double mid = shipment_cost(p, 0.5 * (a + b), y);
    EXPECT_LE(mid, 0.5 * (shipment_cost(p, a, y) + shipment_cost(p, b, y)) + 1e-9);
  }
}

TEST(Portfolio, CostClosedForm) {
  PortfolioProblem p;
  p.dy = 2;
  p.lambda = 0.5;
  p.epsilon = 0.2;
  Decision d{Vector::Constant(2, 0.5), 0.01};
  Vector y(2);
  y << -0.04, 0.02;  // return -0.01, loss 0.01
  EXPECT_NEAR(portfolio_cost(p, d, y), 0.01 + 0.0 / 0.2 + 0.005, 1e-15);
  y << -0.10, 0.02;  // return -0.04
  EXPECT_NEAR(portfolio_cost(p, d, y), 0.01 + 0.03 / 0.2 + 0.02, 1e-15);
}

TEST(Newsvendor, PinballLoss) {
  NewsvendorSpec s;
  s.tau = 0.8;
  EXPECT_NEAR(newsvendor_cost(s, 3.0, 5.0), 1.6, 1e-15);
  EXPECT_NEAR(newsvendor_cost(s, 5.0, 3.0), 0.4, 1e-15);
  EXPECT_EQ(newsvendor_cost(s, 2.0, 2.0), 0.0);
}

TEST(CapNewsvendor, NegativeSales) {
  CapacitatedNewsvendorProblem p;
  p.d = 3;
  Vector z(3), y(3);
  z << 0.2, 0.5, 0.3;
  y << 0.1, 0.7, 0.0;
  EXPECT_NEAR(capacitated_newsvendor_cost(p, z, y), -0.6, 1e-15);
}

TEST(Problems, FeasibilityViolation) {
  PortfolioProblem pf;
  pf.dy = 3;
  Decision d{Vector::Constant(3, 0.4), 0.0};
  EXPECT_NEAR(feasibility_violation(pf, d), 0.2, 1e-15);
  d.z << 0.5, 0.6, -0.1;
  EXPECT_NEAR(feasibility_violation(pf, d), 0.1, 1e-15);
  CapacitatedNewsvendorProblem cn;
  cn.d = 3;
  d.z << 0.5, 0.6, 0.1;
  EXPECT_NEAR(feasibility_violation(cn, d), 0.2, 1e-15);
  EXPECT_EQ(feasibility_violation(NewsvendorSpec{}, Decision{Vector::Constant(1, -3.0), 0.0}), 0.0);
}

TEST(Problems, Validation) {
  PortfolioProblem p;
  p.epsilon = 1.0;
  EXPECT_THROW(validate_problem(p), std::invalid_argument);
  NewsvendorSpec n;
  n.tau = 0.0;
  EXPECT_THROW(validate_problem(n), std::invalid_argument);
  ShipmentProblem s = ShipmentProblem::benchmark();
  s.p2 = 4.0;
  EXPECT_THROW(validate_problem(s), std::invalid_argument);
  EXPECT_EQ(outcome_dim(ShipmentProblem::benchmark()), 12u);
  EXPECT_EQ(decision_dim(ShipmentProblem::benchmark()), 4u);
  EXPECT_EQ(problem_name(CapacitatedNewsvendorProblem{}), "cap-newsvendor");
}

// The epigraph LP value equals the weighted cost evaluated directly at the
// returned decision, for every problem.
TEST(Epigraph, OptimumEqualsDirectObjective) {
  Rng rng(45);
  std::normal_distribution<double> normal;
  const std::vector<Problem> problems = {PortfolioProblem{}, ShipmentProblem::benchmark(),
                                         CapacitatedNewsvendorProblem{}, NewsvendorSpec{0.3}};
  for (const Problem& problem : problems) {
    const std::size_t dy = outcome_dim(problem);
    std::vector<Scenario> sc;
    for (int i = 0; i < 15; ++i) {
      Vector y(static_cast<Eigen::Index>(dy));
      for (auto& v : y) v = std::holds_alternative<PortfolioProblem>(problem) ? 0.05 * normal(rng) : std::abs(normal(rng));
      sc.push_back({std::abs(normal(rng)) + 0.01, y});
    }
    const EpigraphLp e = lp_epigraph(problem, sc);
    const LpSolution sol = solve_lp(e.lp);
    ASSERT_EQ(sol.status, LpStatus::optimal) << problem_name(problem);
    Decision d;
    d.z.resize(static_cast<Eigen::Index>(e.z_cols.size()));
    for (std::size_t j = 0; j < e.z_cols.size(); ++j) d.z(static_cast<Eigen::Index>(j)) = sol.x(static_cast<Eigen::Index>(e.z_cols[j]));
    if (e.beta_col >= 0) d.beta = sol.x(e.beta_col);
    CostEvaluator eval(problem);
    double direct = 0.0;
    for (const auto& s : sc) direct += s.weight * eval(d, s.y);
    EXPECT_NEAR(sol.objective, direct, 1e-7 * std::max(1.0, std::abs(direct))) << problem_name(problem);
    EXPECT_LE(feasibility_violation(problem, d), 1e-9);
  }
}

TEST(Epigraph, RejectsNegativeWeights) {
  std::vector<Scenario> sc = {{-0.1, Vector::Zero(1)}};
  EXPECT_THROW(lp_epigraph(NewsvendorSpec{}, sc), std::invalid_argument);
}

TEST(Epigraph, NewsvendorIsWeightedQuantile) {
  // The 0.55 quantile of {1, 2, 3, 4} with weights {0.1, 0.2, 0.3, 0.4} is 3.
  std::vector<Scenario> sc;
  for (int i = 1; i <= 4; ++i) sc.push_back({0.1 * i, Vector::Constant(1, i)});
  const EpigraphLp e = lp_epigraph(NewsvendorSpec{0.55}, sc);
  const LpSolution sol = solve_lp(e.lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.x(static_cast<Eigen::Index>(e.z_cols[0])), 3.0, 1e-9);
}
