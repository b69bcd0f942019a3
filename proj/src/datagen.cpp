#include "prescriptor/datagen.hpp"

#include "prescriptor/rng.hpp"

#include <algorithm>
#include <cmath>

namespace prescriptor {

namespace {

Matrix pattern_rows(std::initializer_list<std::initializer_list<double>> rows, double scale) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v * scale;
    ++i;
  }
  return m;
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite entries");
}

}  // namespace

Eigen::Matrix3d ArmaSpec::benchmark_innovation_covariance() {
  Eigen::Matrix3d s;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      // 1-based indices in the closed form; parity is unchanged by the shift.
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      s(i, j) = ((i == j ? 8.0 / 7.0 : 0.0) - sign / 7.0) * 0.05;
    }
  }
  return s;
}

ArmaSpec ArmaSpec::benchmark() {
  ArmaSpec spec;
  spec.phi1 << 0.5, -0.9, 0.0, 1.1, -0.7, 0.0, 0.0, 0.0, 0.5;
  spec.phi2 << 0.0, -0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0;
  spec.theta1 << 0.4, 0.8, 0.0, -1.1, -0.3, 0.0, 0.0, 0.0, 0.0;
  spec.theta2 << 0.0, -0.8, 0.0, -1.1, 0.0, 0.0, 0.0, 0.0, 0.0;
  spec.sigma_u = benchmark_innovation_covariance();
  spec.burn_in = 500;
  return spec;
}

void ArmaSpec::validate() const {
  const bool finite = phi1.allFinite() && phi2.allFinite() && theta1.allFinite() &&
                      theta2.allFinite() && sigma_u.allFinite();
  if (!finite) throw std::invalid_argument("ARMA coefficients must be finite");
  if (!sigma_u.isApprox(sigma_u.transpose(), 1e-12)) {
    throw std::invalid_argument("invalid innovation covariance");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(sigma_u);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("invalid innovation covariance");
}

FactorModelSpec FactorModelSpec::portfolio() {
  FactorModelSpec spec;
  spec.A = pattern_rows({{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8},
                         {0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8},
                         {0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8},
                         {0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}},
                        0.025);
  spec.B = pattern_rows({{0, -1, -1}, {-1, 0, -1}, {-1, -1, 0}, {0, -1, 1},
                         {-1, 0, 1},  {-1, 1, 0},  {0, 1, -1},  {1, 0, -1},
                         {1, -1, 0},  {0, 1, 1},   {1, 0, 1},   {1, 1, 0}},
                        0.075);
  spec.kind = OutcomeKind::portfolio_returns;
  return spec;
}

FactorModelSpec FactorModelSpec::shipment() {
  FactorModelSpec spec = portfolio();
  spec.kind = OutcomeKind::shipment_demand;
  return spec;
}

void FactorModelSpec::validate() const {
  if (A.rows() != B.rows() || A.cols() != B.cols() || A.size() == 0) {
    throw std::invalid_argument("factor loadings A and B must have equal, nonzero shapes");
  }
  check_finite(A, "factor loading A");
  check_finite(B, "factor loading B");
}

void Dataset::validate() const {
  if (X.rows() != Y.rows()) throw std::invalid_argument("X and Y row counts differ");
  check_finite(X, "X");
  check_finite(Y, "Y");
}

double CensoredDataset::censoring_rate() const {
  if (delta.empty()) return 0.0;
  const auto censored = std::count(delta.begin(), delta.end(), std::uint8_t{0});
  return static_cast<double>(censored) / static_cast<double>(delta.size());
}

Matrix simulate_arma(const ArmaSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_arma requires n >= 1");
  spec.validate();
  const Eigen::Matrix3d chol = spec.sigma_u.llt().matrixL();

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector3d x1 = Eigen::Vector3d::Zero(), x2 = Eigen::Vector3d::Zero();
  Eigen::Vector3d u1 = Eigen::Vector3d::Zero(), u2 = Eigen::Vector3d::Zero();

  Matrix out(static_cast<Eigen::Index>(n), 3);
  const std::size_t total = spec.burn_in + n;
  for (std::size_t t = 0; t < total; ++t) {
    Eigen::Vector3d e;
    for (int k = 0; k < 3; ++k) e(k) = normal(rng);
    const Eigen::Vector3d u = chol * e;
    const Eigen::Vector3d x =
        spec.phi1 * x1 + spec.phi2 * x2 + u + spec.theta1 * u1 + spec.theta2 * u2;
    x2 = x1;
    x1 = x;
    u2 = u1;
    u1 = u;
    if (t >= spec.burn_in) out.row(static_cast<Eigen::Index>(t - spec.burn_in)) = x.transpose();
  }
  return out;
}

namespace {

template <typename RowSource>
Matrix draw_outcomes(const FactorModelSpec& spec, Eigen::Index rows, RowSource row_of,
                     std::uint64_t seed) {
  spec.validate();
  const Eigen::Index dx = spec.dx();
  const Eigen::Index dy = spec.dy();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Y(rows, dy);
  Vector shifted(dx);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto x = row_of(r);
    for (Eigen::Index i = 0; i < dy; ++i) {
      for (Eigen::Index k = 0; k < dx; ++k) shifted(k) = x(k) + normal(rng) / 4.0;
      const double eps = normal(rng);
      double v = spec.A.row(i).dot(shifted) + spec.B.row(i).dot(x) * eps;
      if (spec.kind == OutcomeKind::shipment_demand) v = 100.0 * std::max(0.0, v);
      Y(r, i) = v;
    }
  }
  return Y;
}

}  // namespace

Matrix generate_outcomes(const FactorModelSpec& spec, const Matrix& X, std::uint64_t seed) {
  if (X.cols() != spec.dx()) {
    throw std::invalid_argument("dimension mismatch: X has " + std::to_string(X.cols()) +
                                " columns, outcome model expects " + std::to_string(spec.dx()));
  }
  return draw_outcomes(spec, X.rows(), [&](Eigen::Index r) { return X.row(r); }, seed);
}

Matrix conditional_sample(const FactorModelSpec& spec, const Vector& x, std::size_t m,
                          std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("conditional_sample requires m >= 1");
  if (x.size() != spec.dx()) {
    throw std::invalid_argument("dimension mismatch: x has " + std::to_string(x.size()) +
                                " entries, outcome model expects " + std::to_string(spec.dx()));
  }
  const Eigen::RowVectorXd xr = x.transpose();
  return draw_outcomes(spec, static_cast<Eigen::Index>(m), [&](Eigen::Index) { return xr; }, seed);
}

Matrix pollute_features(const Matrix& X, std::size_t extra, std::uint64_t seed) {
  if (extra == 0) return X;
  Matrix out(X.rows(), X.cols() + static_cast<Eigen::Index>(extra));
  out.leftCols(X.cols()) = X;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = X.cols(); c < out.cols(); ++c) out(r, c) = normal(rng);
  }
  return out;
}

CensoredDataset censor_dataset(const Dataset& dataset, double threshold_mean,
                               double threshold_spread, std::uint64_t seed) {
  if (dataset.Y.cols() != 1) throw std::invalid_argument("censoring supports univariate outcomes only");
  if (!(threshold_spread > 0.0)) throw std::invalid_argument("threshold_spread must be positive");
  const Eigen::Index n = dataset.X.rows();
  CensoredDataset out;
  out.X = dataset.X;
  out.U.resize(n);
  out.delta.resize(static_cast<std::size_t>(n));
  out.true_Y = dataset.Y.col(0);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = threshold_mean + threshold_spread * normal(rng);
    const double y = dataset.Y(i, 0);
    out.U(i) = std::min(y, v);
    out.delta[static_cast<std::size_t>(i)] = y <= v ? 1 : 0;
  }
  return out;
}

double calibrate_threshold_mean(const Vector& y, double threshold_spread, double target_rate,
                                std::uint64_t seed) {
  if (y.size() == 0) throw std::invalid_argument("calibration needs a nonempty sample");
  if (!(target_rate >= 0.0 && target_rate <= 1.0)) throw std::invalid_argument("target_rate must lie in [0, 1]");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector noise(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) noise(i) = threshold_spread * normal(rng);
  auto rate = [&](double mean) {
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) c += (y(i) > mean + noise(i)) ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(y.size());
  };
  // Censoring rate is nonincreasing in the threshold mean.
  double lo = y.minCoeff() - noise.maxCoeff() - 1.0;
  double hi = y.maxCoeff() - noise.minCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rate(mid) > target_rate) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace prescriptor
