#include "prescriptor/datagen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace prescriptor;

namespace {

Eigen::MatrixXd sample_cov(const Matrix& X) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd c = X.rowwise() - mean;
  return c.transpose() * c / static_cast<double>(X.rows() - 1);
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }
double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); }

// Means of consecutive blocks; their spread gives an autocorrelation-robust SE.
Eigen::VectorXd block_se_of_mean(const Matrix& X, Eigen::Index block) {
  const Eigen::Index blocks = X.rows() / block;
  Matrix means(blocks, X.cols());
  for (Eigen::Index b = 0; b < blocks; ++b) means.row(b) = X.middleRows(b * block, block).colwise().mean();
  const Eigen::MatrixXd c = sample_cov(means);
  return (c.diagonal() / static_cast<double>(blocks)).cwiseSqrt();
}

}  // namespace

TEST(ArmaSpec, InnovationCovarianceMatchesClosedForm) {
  const double d = 0.05, o = 0.05 / 7.0;
  Eigen::Matrix3d expected;
  expected << d, o, -o, o, d, o, -o, o, d;
  EXPECT_LT((ArmaSpec::benchmark_innovation_covariance() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ArmaSpec, BenchmarkLagMatrices) {
  const ArmaSpec s = ArmaSpec::benchmark();
  Eigen::Matrix3d phi1, phi2, theta1, theta2;
  phi1 << 0.5, -0.9, 0, 1.1, -0.7, 0, 0, 0, 0.5;
  phi2 << 0, -0.5, 0, -0.5, 0, 0, 0, 0, 0;
  theta1 << 0.4, 0.8, 0, -1.1, -0.3, 0, 0, 0, 0;
  theta2 << 0, -0.8, 0, -1.1, 0, 0, 0, 0, 0;
  EXPECT_EQ(s.phi1, phi1);
  EXPECT_EQ(s.phi2, phi2);
  EXPECT_EQ(s.theta1, theta1);
  EXPECT_EQ(s.theta2, theta2);
}

TEST(SimulateArma, WhiteNoiseReproducesInnovationCovariance) {
  ArmaSpec spec;
  spec.sigma_u = ArmaSpec::benchmark_innovation_covariance();
  const Matrix X = simulate_arma(spec, 100000, 11);
  const Eigen::MatrixXd c = sample_cov(X);
  EXPECT_LT((c - spec.sigma_u).norm(), 0.05 * spec.sigma_u.norm());
}

TEST(SimulateArma, DeterministicInSeed) {
  const ArmaSpec spec = ArmaSpec::benchmark();
  EXPECT_EQ(simulate_arma(spec, 5, 3), simulate_arma(spec, 5, 3));
  EXPECT_NE(simulate_arma(spec, 5, 3), simulate_arma(spec, 5, 4));
}

TEST(SimulateArma, BenchmarkIsStationary) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 100000, 5);
  const Matrix a = X.topRows(50000), b = X.bottomRows(50000);
  const Eigen::VectorXd diff = (a.colwise().mean() - b.colwise().mean()).transpose();
  const Eigen::VectorXd se = (block_se_of_mean(a, 1000).array().square() + block_se_of_mean(b, 1000).array().square()).sqrt();
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_LT(std::abs(diff(j)), 3.0 * se(j)) << "component " << j;
}

TEST(SimulateArma, LongRunStaysFinite) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 1000000, 9);
  EXPECT_TRUE(X.allFinite());
}

TEST(SimulateArma, RejectsNonSpdCovariance) {
  ArmaSpec spec;
  spec.sigma_u << 1, 2, 0, 2, 1, 0, 0, 0, 1;
  try {
    simulate_arma(spec, 3, 1);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "invalid innovation covariance");
  }
}

TEST(FactorModel, BenchmarkLoadings) {
  const FactorModelSpec s = FactorModelSpec::portfolio();
  ASSERT_EQ(s.A.rows(), 12);
  ASSERT_EQ(s.A.cols(), 3);
  EXPECT_DOUBLE_EQ(s.A(0, 0), 0.02);
  EXPECT_DOUBLE_EQ(s.A(4, 1), 0.02);
  EXPECT_DOUBLE_EQ(s.A(5, 0), 0.0025);
  EXPECT_DOUBLE_EQ(s.B(0, 1), -0.075);
  EXPECT_DOUBLE_EQ(s.B(11, 2), 0.0);
  EXPECT_DOUBLE_EQ(s.B(10, 2), 0.075);
}

TEST(GenerateOutcomes, ShipmentDemandIsNonnegative) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 5000, 2);
  const Matrix Y = generate_outcomes(FactorModelSpec::shipment(), X, 3);
  EXPECT_EQ(Y.cols(), 12);
  EXPECT_GE(Y.minCoeff(), 0.0);
  EXPECT_GT(Y.maxCoeff(), 0.0);
}

// Var(Y_i) = A_i' S A_i + |A_i|^2 / 16 + B_i' S B_i for zero-mean X with covariance S.
TEST(GenerateOutcomes, PortfolioMomentsMatchModel) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 100000, 21);
  const FactorModelSpec spec = FactorModelSpec::portfolio();
  const Matrix Y = generate_outcomes(spec, X, 22);
  const Eigen::MatrixXd S = sample_cov(X);
  const Eigen::MatrixXd cy = sample_cov(Y);
  const Eigen::VectorXd se_mean = block_se_of_mean(Y, 1000);
  for (Eigen::Index i = 0; i < 12; ++i) {
    const Eigen::VectorXd a = spec.A.row(i).transpose(), b = spec.B.row(i).transpose();
    const double var = a.dot(S * a) + a.squaredNorm() / 16.0 + b.dot(S * b);
    EXPECT_NEAR(std::sqrt(cy(i, i)), std::sqrt(var), 0.03 * std::sqrt(var)) << "security " << i;
    EXPECT_LT(std::abs(Y.col(i).mean()), 4.0 * se_mean(i)) << "security " << i;
  }
}

TEST(GenerateOutcomes, PureNoiseVarianceWithoutVarianceLoading) {
  FactorModelSpec spec = FactorModelSpec::portfolio();
  spec.B.setZero();
  const Matrix X = Matrix::Constant(100000, 3, 0.3);
  const Matrix Y = generate_outcomes(spec, X, 4);
  const Eigen::MatrixXd cy = sample_cov(Y);
  for (Eigen::Index i = 0; i < 12; ++i) {
    const double var = spec.A.row(i).squaredNorm() / 16.0;
    EXPECT_NEAR(cy(i, i), var, 0.03 * var);
  }
}

TEST(GenerateOutcomes, RejectsDimensionMismatch) {
  EXPECT_THROW(generate_outcomes(FactorModelSpec::portfolio(), Matrix::Zero(4, 2), 1), std::invalid_argument);
}

TEST(ConditionalSample, ZeroCovariateHasZeroMean) {
  const Matrix Y = conditional_sample(FactorModelSpec::portfolio(), Vector::Zero(3), 200000, 8);
  for (Eigen::Index i = 0; i < 12; ++i) {
    const double se = std::sqrt(sample_cov(Y.col(i))(0, 0) / static_cast<double>(Y.rows()));
    EXPECT_LT(std::abs(Y.col(i).mean()), 3.0 * se);
  }
}

TEST(ConditionalSample, SingleDrawIsDeterministic) {
  const Vector x = Vector::Constant(3, 0.2);
  EXPECT_EQ(conditional_sample(FactorModelSpec::portfolio(), x, 1, 5),
            conditional_sample(FactorModelSpec::portfolio(), x, 1, 5));
}

// Y_i = 100 max{0, N(mu, s^2)} with mu = A_i'x, s^2 = |A_i|^2/16 + (B_i'x)^2, so
// E[Y_i] = 100 (mu Phi(mu/s) + s phi(mu/s)).
TEST(ConditionalSample, ShipmentMeanMatchesRectifiedNormal) {
  const FactorModelSpec spec = FactorModelSpec::shipment();
  Vector x(3);
  x << 1.2, 0.9, 1.5;
  const Matrix Y = conditional_sample(spec, x, 200000, 13);
  for (Eigen::Index i = 0; i < 12; ++i) {
    const double mu = spec.A.row(i).dot(x);
    const double s = std::sqrt(spec.A.row(i).squaredNorm() / 16.0 + std::pow(spec.B.row(i).dot(x), 2));
    const double mean = 100.0 * (mu * normal_cdf(mu / s) + s * normal_pdf(mu / s));
    EXPECT_NEAR(Y.col(i).mean(), mean, 0.02 * mean) << "location " << i;
  }
}

TEST(PolluteFeatures, ZeroExtraIsIdentity) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 20, 1);
  EXPECT_EQ(pollute_features(X, 0, 5), X);
}

TEST(PolluteFeatures, AddsIndependentColumns) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 10000, 1);
  const Matrix Y = generate_outcomes(FactorModelSpec::portfolio(), X, 2);
  const Matrix P = pollute_features(X, 16, 5);
  ASSERT_EQ(P.cols(), 19);
  EXPECT_EQ(P.leftCols(3), X);
  Matrix joined(P.rows(), 17);
  joined << P.rightCols(16), Y.col(0);
  const Eigen::MatrixXd c = sample_cov(joined);
  for (Eigen::Index j = 0; j < 16; ++j) {
    const double corr = c(j, 16) / std::sqrt(c(j, j) * c(16, 16));
    EXPECT_LT(std::abs(corr), 0.05);
    EXPECT_NEAR(c(j, j), 1.0, 0.05);
  }
  EXPECT_EQ(pollute_features(X, 16, 5), P);
}

TEST(CensorDataset, ExtremeThresholds) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 300, 1);
  const Matrix Y = generate_outcomes(FactorModelSpec::shipment(), X, 2).col(0);
  const Dataset d{X, Y, 0, ""};
  const CensoredDataset none = censor_dataset(d, 1e9, 1.0, 3);
  EXPECT_EQ(none.censoring_rate(), 0.0);
  EXPECT_EQ(none.U, Y.col(0));
  const CensoredDataset all = censor_dataset(d, -1e9, 1.0, 3);
  EXPECT_EQ(all.censoring_rate(), 1.0);
}

TEST(CensorDataset, RateMatchesThresholdDistribution) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 20000, 1);
  const Matrix Y = generate_outcomes(FactorModelSpec::shipment(), X, 2).col(0);
  const double mu = 4.0, spread = 2.0;
  const CensoredDataset cd = censor_dataset(Dataset{X, Y, 0, ""}, mu, spread, 7);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) expected += normal_cdf((Y(i, 0) - mu) / spread);
  expected /= static_cast<double>(Y.rows());
  EXPECT_NEAR(cd.censoring_rate(), expected, 0.02);
  ASSERT_TRUE(cd.true_Y.has_value());
  for (std::size_t i = 0; i < cd.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    EXPECT_LE(cd.U(r), (*cd.true_Y)(r));
    if (cd.delta[i]) EXPECT_EQ(cd.U(r), (*cd.true_Y)(r));
  }
}

TEST(CensorDataset, RejectsMultivariateOutcome) {
  const Dataset d{Matrix::Zero(3, 3), Matrix::Zero(3, 2), 0, ""};
  try {
    censor_dataset(d, 0.0, 1.0, 1);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "censoring supports univariate outcomes only");
  }
}

TEST(CensorDataset, CalibrationHitsTargetRate) {
  const Matrix X = simulate_arma(ArmaSpec::benchmark(), 4000, 1);
  const Matrix Y = generate_outcomes(FactorModelSpec::shipment(), X, 2).col(0);
  const Vector y = Y.col(0);
  const double spread = 3.0;
  const double mu = calibrate_threshold_mean(y, spread, 0.3, 17);
  const CensoredDataset cd = censor_dataset(Dataset{X, Y, 0, ""}, mu, spread, 17);
  EXPECT_NEAR(cd.censoring_rate(), 0.3, 0.01);
}
