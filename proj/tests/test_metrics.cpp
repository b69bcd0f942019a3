#include "prescriptor/metrics.hpp"
#include "prescriptor/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace prescriptor;

namespace {

Matrix uniform_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = unif(rng);
  return M;
}

}  // namespace

TEST(PairwiseSum, SmallAndLarge) {
  EXPECT_EQ(pairwise_sum({}), 0.0);
  EXPECT_EQ(pairwise_sum({1.0, 2.0, 3.5}), 6.5);
  const std::vector<double> v(1 << 20, 0.1);
  long double exact = 0.0L;
  for (double x : v) exact += static_cast<long double>(x);
  EXPECT_NEAR(pairwise_sum(v), static_cast<double>(exact), 1e-9);
}

TEST(MeanSe, ClosedForm) {
  const MeanSe m = mean_se({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(mean_se({7.0}).se, 0.0);
}

TEST(Prescriptiveness, HandValues) {
  EXPECT_DOUBLE_EQ(coefficient_of_prescriptiveness(2.0, 3.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(coefficient_of_prescriptiveness(3.0, 3.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(coefficient_of_prescriptiveness(1.0, 3.0, 1.0), 1.0);
  EXPECT_LT(coefficient_of_prescriptiveness(4.0, 3.0, 1.0), 0.0);
  EXPECT_THROW(coefficient_of_prescriptiveness(1.0, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(coefficient_of_prescriptiveness(1.0, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(coefficient_of_prescriptiveness(NAN, 2.0, 1.0), std::invalid_argument);
}

TEST(PerfectForesight, CapacitatedNewsvendorSellsUpToCapacity) {
  const Matrix Y = uniform_matrix(100, 12, 71, 0.0, 0.2);
  CapacitatedNewsvendorProblem p;
  p.capacity = 1.1;
  double expected = 0.0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) expected -= std::min(Y.row(i).sum(), 1.1);
  EXPECT_NEAR(perfect_foresight_risk(p, Y), expected / 100.0, 1e-12);
}

TEST(PerfectForesight, PortfolioPicksBestAsset) {
  const Matrix Y = uniform_matrix(80, 12, 72, -0.1, 0.1);
  PortfolioProblem p;
  p.lambda = 0.4;
  double expected = 0.0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) expected -= 1.4 * Y.row(i).maxCoeff();
  EXPECT_NEAR(perfect_foresight_risk(p, Y), expected / 80.0, 1e-12);
}

TEST(PerfectForesight, NewsvendorIsZero) {
  EXPECT_EQ(perfect_foresight_risk(NewsvendorSpec{0.3}, uniform_matrix(50, 1, 73, 0.0, 5.0)), 0.0);
}

TEST(RealizedCosts, ThreadCountDoesNotMatter) {
  const Matrix Y = uniform_matrix(500, 12, 74, 0.0, 2.0);
  const ShipmentProblem p = ShipmentProblem::benchmark();
  Decision d{Vector::Constant(4, 3.0), 0.0};
  const auto a = realized_costs(p, d, Y, 1);
  const auto b = realized_costs(p, d, Y, 5);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a[7], shipment_cost(p, d.z, Y.row(7).transpose()), 1e-9);
}

TEST(EstimateRisk, SaaRiskIsMeanRealizedCostAndReportIsConsistent) {
  const Matrix X = uniform_matrix(120, 2, 75, -1.0, 1.0);
  Matrix Y = uniform_matrix(120, 1, 76, 0.0, 1.0);
  Y.col(0) += 2.0 * X.col(0);
  const Matrix Xv = uniform_matrix(300, 2, 77, -1.0, 1.0);
  Matrix Yv = uniform_matrix(300, 1, 78, 0.0, 1.0);
  Yv.col(0) += 2.0 * Xv.col(0);
  const NewsvendorSpec spec{0.5};
  const Prescription saa = make_prescription("saa", {}, {X, Y, std::nullopt}, spec);
  const Prescription knn = make_prescription("knn", {}, {X, Y, std::nullopt}, spec);
  const auto costs = realized_costs(spec, solve_saa(spec, Y).decision, Yv);
  EXPECT_NEAR(estimate_risk(saa, Xv, Yv), pairwise_sum(costs) / 300.0, 1e-15);
  EXPECT_EQ(estimate_risk(knn, Xv, Yv, 1), estimate_risk(knn, Xv, Yv, 3));
  const RiskReport r = prescriptiveness_report(knn, saa, Xv, Yv);
  EXPECT_EQ(r.n_validation, 300u);
  EXPECT_EQ(r.perfect_foresight_risk, 0.0);
  EXPECT_DOUBLE_EQ(r.P, 1.0 - r.policy_risk / r.saa_risk);
  // Covariates explain most of the variation, so the local method beats SAA.
  EXPECT_GT(r.P, 0.3);
  EXPECT_LE(r.P, 1.0);
}
