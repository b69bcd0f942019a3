#pragma once

#include "prescriptor/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace prescriptor {

// 3-dimensional ARMA(2,2) covariate process
//   X(t) - Phi1 X(t-1) - Phi2 X(t-2) = U(t) + Theta1 U(t-1) + Theta2 U(t-2),
// with Gaussian innovations U ~ N(0, sigma_u).
struct ArmaSpec {
  Eigen::Matrix3d phi1 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d phi2 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d theta1 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d theta2 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d sigma_u = Eigen::Matrix3d::Identity();
  std::size_t burn_in = 500;

  // Parameterization of the synthetic market-factor / demand-feature process.
  static ArmaSpec benchmark();
  // (Sigma_U)_ij = (1[i=j] 8/7 - (-1)^(i+j) / 7) * 0.05
  static Eigen::Matrix3d benchmark_innovation_covariance();

  // Throws std::invalid_argument("invalid innovation covariance") unless
  // sigma_u is symmetric positive definite.
  void validate() const;
};

enum class OutcomeKind { portfolio_returns, shipment_demand };

// Y_i = A_i^T (X + delta_i / 4) + (B_i^T X) eps_i, with delta_i ~ N(0, I),
// eps_i ~ N(0, 1) independent; shipment demand is 100 * max{0, .}.
struct FactorModelSpec {
  Matrix A;
  Matrix B;
  OutcomeKind kind = OutcomeKind::portfolio_returns;

  static FactorModelSpec portfolio();
  static FactorModelSpec shipment();

  Eigen::Index dx() const { return A.cols(); }
  Eigen::Index dy() const { return A.rows(); }
  void validate() const;
};

struct Dataset {
  Matrix X;
  Matrix Y;
  std::uint64_t seed = 0;
  std::string meta;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  void validate() const;
};

struct CensoredDataset {
  Matrix X;
  Vector U;                     // observed min{Y, V}
  std::vector<std::uint8_t> delta;  // 1 iff Y <= V (uncensored)
  std::optional<Vector> true_Y;  // kept for oracle scoring only

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  double censoring_rate() const;
};

// n consecutive observations after discarding spec.burn_in steps from a
// zero initial state.
Matrix simulate_arma(const ArmaSpec& spec, std::size_t n, std::uint64_t seed);

Matrix generate_outcomes(const FactorModelSpec& spec, const Matrix& X, std::uint64_t seed);

// m iid draws of Y | X = x.
Matrix conditional_sample(const FactorModelSpec& spec, const Vector& x, std::size_t m,
                          std::uint64_t seed);

// Appends `extra` iid standard normal columns.
Matrix pollute_features(const Matrix& X, std::size_t extra, std::uint64_t seed);

// Right-censors a univariate outcome with an independent Gaussian threshold
// V ~ N(threshold_mean, threshold_spread^2).
CensoredDataset censor_dataset(const Dataset& dataset, double threshold_mean,
                               double threshold_spread, std::uint64_t seed);

// Threshold mean whose censoring rate on Y (with the threshold noise drawn
// from `seed`) is closest to target_rate. Bisection on common random numbers.
double calibrate_threshold_mean(const Vector& y, double threshold_spread, double target_rate,
                                std::uint64_t seed);

}  // namespace prescriptor
