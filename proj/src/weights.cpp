#include "prescriptor/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prescriptor {

namespace {

constexpr double kLoessBandwidthInflation = 1e-3;

void check_query(const Matrix& X, const Vector& x) {
  if (X.rows() == 0) throw std::invalid_argument("empty training set");
  if (X.cols() != x.size()) {
    throw std::invalid_argument("dimension mismatch: query has " + std::to_string(x.size()) +
                                " features, training data has " + std::to_string(X.cols()));
  }
}

void check_k(std::size_t k, std::size_t n) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (k > n) throw std::invalid_argument("k exceeds sample size");
}

}  // namespace

double WeightVector::total() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight;
  return s;
}

double WeightVector::negative_mass() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight < 0.0 ? -e.weight : 0.0;
  return s;
}

bool WeightVector::has_negative() const {
  return std::any_of(entries.begin(), entries.end(), [](const WeightEntry& e) { return e.weight < 0.0; });
}

Vector WeightVector::dense() const {
  Vector d = Vector::Zero(static_cast<Eigen::Index>(n_train));
  for (const auto& e : entries) d(static_cast<Eigen::Index>(e.index)) = e.weight;
  return d;
}

void WeightVector::canonicalize() {
  std::sort(entries.begin(), entries.end(),
            [](const WeightEntry& a, const WeightEntry& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].index >= n_train) throw std::invalid_argument("weight index out of range");
    if (!std::isfinite(entries[i].weight)) throw std::invalid_argument("non-finite weight");
    if (i > 0 && entries[i].index == entries[i - 1].index) {
      throw std::invalid_argument("duplicate weight index");
    }
  }
}

WeightVector WeightVector::uniform(std::size_t n) {
  WeightVector w;
  w.n_train = n;
  w.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.entries.push_back({i, 1.0 / static_cast<double>(n)});
  return w;
}

WeightVector WeightVector::from_proportional(std::vector<WeightEntry> raw, std::size_t n_train) {
  WeightVector w;
  w.n_train = n_train;
  double total = 0.0;
  for (const auto& e : raw) total += e.weight;
  if (!(total > 0.0)) throw EmptyNeighborhoodError();
  for (const auto& e : raw) {
    if (e.weight != 0.0) w.entries.push_back({e.index, e.weight / total});
  }
  w.canonicalize();
  return w;
}

KernelKind kernel_from_name(const std::string& name) {
  if (name == "naive") return KernelKind::naive;
  if (name == "epanechnikov") return KernelKind::epanechnikov;
  if (name == "tricubic") return KernelKind::tricubic;
  if (name == "gaussian") return KernelKind::gaussian;
  throw std::invalid_argument("unknown kernel: " + name);
}

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::naive: return "naive";
    case KernelKind::epanechnikov: return "epanechnikov";
    case KernelKind::tricubic: return "tricubic";
    case KernelKind::gaussian: return "gaussian";
  }
  return "unknown";
}

double kernel_eval(KernelKind kind, double norm) {
  switch (kind) {
    case KernelKind::naive:
      return norm <= 1.0 ? 1.0 : 0.0;
    case KernelKind::epanechnikov:
      return norm <= 1.0 ? 1.0 - norm * norm : 0.0;
    case KernelKind::tricubic: {
      if (norm > 1.0) return 0.0;
      const double t = 1.0 - norm * norm * norm;
      return t * t * t;
    }
    case KernelKind::gaussian:
      return std::exp(-0.5 * norm * norm);
  }
  return 0.0;
}

double kernel_eval(KernelKind kind, const Vector& u) { return kernel_eval(kind, u.norm()); }

double BandwidthSchedule::at_sample_size(std::size_t n) const {
  return c * std::pow(static_cast<double>(n), -delta_exp);
}

double BandwidthSchedule::at_point(std::size_t i) const {
  return c * std::pow(static_cast<double>(i), -delta_exp);
}

void BandwidthSchedule::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("bandwidth constant must be positive");
  if (!(delta_exp > 0.0 && delta_exp < 1.0)) throw std::invalid_argument("bandwidth exponent must lie in (0, 1)");
}

Vector distances_to(const Matrix& X, const Vector& x) {
  check_query(X, x);
  Vector d(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) d(i) = (X.row(i).transpose() - x).norm();
  return d;
}

std::vector<std::size_t> nearest_indices(const Vector& dist, std::size_t k) {
  const auto n = static_cast<std::size_t>(dist.size());
  check_k(k, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    const double da = dist(static_cast<Eigen::Index>(a));
    const double db = dist(static_cast<Eigen::Index>(b));
    return da < db || (da == db && a < b);
  };
  if (k < n) std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), closer);
  idx.resize(k);
  std::sort(idx.begin(), idx.end(), closer);
  return idx;
}

WeightVector knn_weights(const Matrix& train_X, const Vector& x, std::size_t k) {
  check_query(train_X, x);
  const auto n = static_cast<std::size_t>(train_X.rows());
  check_k(k, n);
  WeightVector w;
  w.n_train = n;
  const double share = 1.0 / static_cast<double>(k);
  for (std::size_t i : nearest_indices(distances_to(train_X, x), k)) w.entries.push_back({i, share});
  w.canonicalize();
  return w;
}

WeightVector radius_knn_weights(const Matrix& train_X, const Vector& x, std::size_t k,
                                const DecayFunction& decay) {
  check_query(train_X, x);
  const auto n = static_cast<std::size_t>(train_X.rows());
  check_k(k, n);
  const Vector dist = distances_to(train_X, x);
  std::vector<WeightEntry> raw;
  for (std::size_t i : nearest_indices(dist, k)) {
    const double f = decay(dist(static_cast<Eigen::Index>(i)));
    if (!(f > 0.0) || !std::isfinite(f)) throw std::invalid_argument("decay function must be positive and finite");
    raw.push_back({i, f});
  }
  return WeightVector::from_proportional(std::move(raw), n);
}

WeightVector kr_weights(const Matrix& train_X, const Vector& x, KernelKind kind, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const Vector dist = distances_to(train_X, x);
  const auto n = static_cast<std::size_t>(train_X.rows());
  std::vector<WeightEntry> raw;
  if (kind == KernelKind::gaussian) {
    // Shift exponents by the closest point so far-away queries do not underflow.
    const double r0 = dist.minCoeff() / h;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = dist(static_cast<Eigen::Index>(i)) / h;
      const double v = std::exp(-0.5 * (r - r0) * (r + r0));
      if (v > 0.0) raw.push_back({i, v});
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = kernel_eval(kind, dist(static_cast<Eigen::Index>(i)) / h);
      if (v > 0.0) raw.push_back({i, v});
    }
  }
  return WeightVector::from_proportional(std::move(raw), n);
}

WeightVector recursive_kr_weights(const Matrix& train_X, const Vector& x,
                                  const BandwidthSchedule& schedule, KernelKind kind) {
  if (schedule.mode != BandwidthSchedule::Mode::per_point) {
    throw std::invalid_argument("recursive kernel weights need a per-point bandwidth schedule");
  }
  schedule.validate();
  const Vector dist = distances_to(train_X, x);
  const auto n = static_cast<std::size_t>(train_X.rows());
  std::vector<WeightEntry> raw;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = schedule.at_point(i + 1);
    const double v = kernel_eval(kind, dist(static_cast<Eigen::Index>(i)) / h);
    if (v > 0.0) raw.push_back({i, v});
  }
  return WeightVector::from_proportional(std::move(raw), n);
}

WeightVector loess_weights(const Matrix& train_X, const Vector& x, std::size_t k, KernelKind kind) {
  check_query(train_X, x);
  const auto n = static_cast<std::size_t>(train_X.rows());
  check_k(k, n);
  const Vector dist = distances_to(train_X, x);
  const std::vector<std::size_t> nn = nearest_indices(dist, k);
  // The k-th neighbour sits on the kernel boundary; a slight inflation keeps
  // it (barely) inside so the support is exactly the kNN set.
  const double h = dist(static_cast<Eigen::Index>(nn.back())) * (1.0 + kLoessBandwidthInflation);

  const Eigen::Index d = train_X.cols();
  std::vector<double> kv(nn.size());
  Matrix diff(static_cast<Eigen::Index>(nn.size()), d);
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(d, d);
  Vector first_moment = Vector::Zero(d);
  for (std::size_t a = 0; a < nn.size(); ++a) {
    const auto i = static_cast<Eigen::Index>(nn[a]);
    const double r = dist(i);
    kv[a] = h > 0.0 ? kernel_eval(kind, r / h) : (r == 0.0 ? 1.0 : 0.0);
    diff.row(static_cast<Eigen::Index>(a)) = train_X.row(i) - x.transpose();
    const Vector di = diff.row(static_cast<Eigen::Index>(a)).transpose();
    xi.noalias() += kv[a] * di * di.transpose();
    first_moment += kv[a] * di;
  }

  const double trace = xi.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xi, Eigen::EigenvaluesOnly);
  const double min_eig = d > 0 ? eig.eigenvalues().minCoeff() : 0.0;
  if (!(min_eig > 1e-12 * std::max(trace, 1e-300))) {
    xi.diagonal().array() += 1e-8 * (1.0 + trace);
  }
  const Vector correction = xi.ldlt().solve(first_moment);

  std::vector<WeightEntry> raw;
  double total = 0.0;
  for (std::size_t a = 0; a < nn.size(); ++a) {
    if (kv[a] == 0.0) continue;
    const double v = kv[a] * (1.0 - correction.dot(diff.row(static_cast<Eigen::Index>(a)).transpose()));
    raw.push_back({nn[a], v});
    total += v;
  }
  if (raw.empty()) throw EmptyNeighborhoodError();
  if (!(std::abs(total) > 1e-300) || !std::isfinite(total)) {
    throw NumericalError("degenerate local-linear weights at query point");
  }
  WeightVector w;
  w.n_train = n;
  for (const auto& e : raw) {
    if (e.weight != 0.0) w.entries.push_back({e.index, e.weight / total});
  }
  w.canonicalize();
  return w;
}

std::size_t DefaultSchedules::knn_k(std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  return std::max<std::size_t>(1, std::min(k, n > 1 ? n - 1 : 1));
}

double DefaultSchedules::kr_bandwidth(std::size_t n, std::size_t dx) {
  return std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(dx) + 2.0));
}

BandwidthSchedule DefaultSchedules::recursive(std::size_t dx) {
  BandwidthSchedule s;
  s.c = 1.0;
  s.delta_exp = 1.0 / (2.0 * static_cast<double>(dx)) - 0.01;
  s.mode = BandwidthSchedule::Mode::per_point;
  return s;
}

std::size_t DefaultSchedules::loess_k(std::size_t n, std::size_t dx) {
  const auto grow = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.7)));
  return std::min(n, std::max(2 * (dx + 1), grow));
}

Standardizer::Standardizer(const Matrix& X) {
  const Eigen::Index n = X.rows();
  if (n == 0) throw std::invalid_argument("cannot standardize an empty matrix");
  mean_ = X.colwise().mean().transpose();
  scale_.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (X.col(c).array() - mean_(c)).square().sum() / static_cast<double>(n);
    scale_(c) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
}

Matrix Standardizer::transform(const Matrix& X) const {
  Matrix out = X;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    out.row(r) = ((X.row(r).transpose() - mean_).array() / scale_.array()).transpose();
  }
  return out;
}

Vector Standardizer::transform(const Vector& x) const {
  return ((x - mean_).array() / scale_.array()).matrix();
}

}  // namespace prescriptor
