#include "prescriptor/recourse.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace prescriptor {

namespace {

constexpr std::size_t kMaxDualPivots = 2000;

}  // namespace

WarmDualSimplex::WarmDualSimplex(Eigen::MatrixXd A, Vector c, std::vector<std::size_t> initial_basis,
                                 std::size_t cache_size)
    : A_(std::move(A)), c_(std::move(c)), cache_size_(std::max<std::size_t>(1, cache_size)) {
  const auto m = static_cast<std::size_t>(A_.rows());
  if (initial_basis.size() != m) throw std::invalid_argument("initial basis has the wrong size");
  if (c_.size() != A_.cols()) throw std::invalid_argument("cost vector does not match constraint matrix");
  Eigen::MatrixXd B(A_.rows(), A_.rows());
  for (std::size_t i = 0; i < m; ++i) B.col(static_cast<Eigen::Index>(i)) = A_.col(static_cast<Eigen::Index>(initial_basis[i]));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  if (!(lu.rcond() > 1e-12)) throw std::invalid_argument("initial basis is singular");
  Basis basis{std::move(initial_basis), lu.inverse()};

  Vector cb(A_.rows());
  for (std::size_t i = 0; i < m; ++i) cb(static_cast<Eigen::Index>(i)) = c_(static_cast<Eigen::Index>(basis.head[i]));
  const Vector y = basis.binv.transpose() * cb;
  const Vector d = c_ - A_.transpose() * y;
  if (d.minCoeff() < -1e-9) throw std::invalid_argument("initial basis is not dual feasible");
  cache_.push_back(std::move(basis));
}

WarmDualSimplex::Result WarmDualSimplex::read(const Basis& basis, const Vector& xb) const {
  Result r;
  r.x = Vector::Zero(A_.cols());
  Vector cb(A_.rows());
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    const auto j = static_cast<Eigen::Index>(basis.head[static_cast<std::size_t>(i)]);
    r.x(j) = std::max(0.0, xb(i));
    cb(i) = c_(j);
  }
  r.value = c_.dot(r.x);
  r.duals = basis.binv.transpose() * cb;
  return r;
}

void WarmDualSimplex::pivot_to_optimal(Basis& basis, const Vector& b) const {
  const Eigen::Index m = A_.rows();
  const Eigen::Index n = A_.cols();
  const double tol = 1e-9 * (1.0 + b.cwiseAbs().maxCoeff());
  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  for (std::size_t j : basis.head) in_basis[j] = 1;
  Vector cb(m);
  for (std::size_t pivots = 0; pivots < kMaxDualPivots; ++pivots) {
    const Vector xb = basis.binv * b;
    Eigen::Index r;
    if (xb.minCoeff(&r) >= -tol) return;

    for (Eigen::Index i = 0; i < m; ++i) cb(i) = c_(static_cast<Eigen::Index>(basis.head[static_cast<std::size_t>(i)]));
    const Vector y = basis.binv.transpose() * cb;
    const Eigen::RowVectorXd rho = basis.binv.row(r);
    Eigen::Index q = -1;
    double best_ratio = kInf;
    double best_mag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (in_basis[static_cast<std::size_t>(j)]) continue;
      const double alpha = rho.dot(A_.col(j));
      if (alpha >= -1e-11) continue;
      const double d = std::max(0.0, c_(j) - y.dot(A_.col(j)));
      const double ratio = d / -alpha;
      if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && -alpha > best_mag)) {
        best_ratio = std::min(ratio, best_ratio);
        best_mag = -alpha;
        q = j;
      }
    }
    if (q < 0) throw NumericalError("recourse problem is infeasible");

    const Vector alpha = basis.binv * A_.col(q);
    const double pivot = alpha(r);
    basis.binv.row(r) /= pivot;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != r && alpha(i) != 0.0) basis.binv.row(i) -= alpha(i) * basis.binv.row(r);
    }
    in_basis[basis.head[static_cast<std::size_t>(r)]] = 0;
    in_basis[static_cast<std::size_t>(q)] = 1;
    basis.head[static_cast<std::size_t>(r)] = static_cast<std::size_t>(q);
    if ((pivots + 1) % 50 == 0) {
      Eigen::MatrixXd B(m, m);
      for (Eigen::Index i = 0; i < m; ++i) B.col(i) = A_.col(static_cast<Eigen::Index>(basis.head[static_cast<std::size_t>(i)]));
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      if (!(lu.rcond() > 1e-13)) throw NumericalError("recourse basis became singular");
      basis.binv = lu.inverse();
    }
  }
  throw NumericalError("recourse dual simplex did not converge");
}

WarmDualSimplex::Result WarmDualSimplex::solve(const Vector& b) {
  if (b.size() != A_.rows()) throw std::invalid_argument("right-hand side has the wrong size");
  const double tol = 1e-9 * (1.0 + b.cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < cache_.size(); ++k) {
    const Vector xb = cache_[k].binv * b;
    if (xb.minCoeff() >= -tol) {
      ++hits_;
      if (k > 0) std::rotate(cache_.begin(), cache_.begin() + static_cast<std::ptrdiff_t>(k),
                             cache_.begin() + static_cast<std::ptrdiff_t>(k) + 1);
      return read(cache_.front(), xb);
    }
  }
  ++misses_;
  Basis fresh = cache_.front();
  pivot_to_optimal(fresh, b);
  const Vector xb = fresh.binv * b;
  cache_.insert(cache_.begin(), std::move(fresh));
  if (cache_.size() > cache_size_) cache_.pop_back();
  return read(cache_.front(), xb);
}

namespace {

// Columns: s_ij (i * dy + j), t_i, e_j (demand surplus), f_i (unused capacity).
// Rows: sum_i s_ij - e_j = y_j, then sum_j s_ij - t_i + f_i = z_i.
WarmDualSimplex make_recourse_simplex(const ShipmentProblem& p) {
  const auto dz = static_cast<Eigen::Index>(p.dz());
  const auto dy = static_cast<Eigen::Index>(p.dy());
  const Eigen::Index n = dz * dy + dz + dy + dz;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dy + dz, n);
  Vector c = Vector::Zero(n);
  for (Eigen::Index i = 0; i < dz; ++i) {
    for (Eigen::Index j = 0; j < dy; ++j) {
      const Eigen::Index col = i * dy + j;
      A(j, col) = 1.0;
      A(dy + i, col) = 1.0;
      c(col) = p.ship_cost(i, j);
    }
    A(dy + i, dz * dy + i) = -1.0;
    c(dz * dy + i) = p.p2;
    A(dy + i, dz * dy + dz + dy + i) = 1.0;
  }
  std::vector<std::size_t> basis;
  for (Eigen::Index j = 0; j < dy; ++j) {
    A(j, dz * dy + dz + j) = -1.0;
    basis.push_back(static_cast<std::size_t>(dz * dy + dz + j));
  }
  for (Eigen::Index i = 0; i < dz; ++i) basis.push_back(static_cast<std::size_t>(dz * dy + dz + dy + i));
  return WarmDualSimplex(std::move(A), std::move(c), std::move(basis));
}

}  // namespace

ShipmentRecourse::ShipmentRecourse(const ShipmentProblem& problem)
    : problem_((problem.validate(), problem)), simplex_(make_recourse_simplex(problem)) {}

ShipmentRecourse::Value ShipmentRecourse::second_stage(const Vector& z, const Vector& y) {
  const auto dz = static_cast<Eigen::Index>(problem_.dz());
  const auto dy = static_cast<Eigen::Index>(problem_.dy());
  if (z.size() != dz || y.size() != dy) throw std::invalid_argument("dimension mismatch in shipment recourse");
  Vector b(dy + dz);
  b.head(dy) = y;
  b.tail(dz) = z;
  const auto r = simplex_.solve(b);
  return {r.value, r.duals.tail(dz)};
}

double ShipmentRecourse::total_cost(const Vector& z, const Vector& y) {
  return problem_.p1 * z.sum() + second_stage(z, y).cost;
}

}  // namespace prescriptor
