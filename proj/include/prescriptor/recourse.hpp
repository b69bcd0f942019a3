#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/problems.hpp"

#include <vector>

namespace prescriptor {

// Dual simplex for min c^T x s.t. A x = b, x >= 0 with fixed (A, c) and a
// stream of right-hand sides. Optimal bases are cached; a cached basis that
// is primal feasible for a new b is optimal for it without pivoting.
class WarmDualSimplex {
 public:
  struct Result {
    double value = 0.0;
    Vector x;
    Vector duals;  // d value / d b
  };

  // initial_basis must be dual feasible for c.
  WarmDualSimplex(Eigen::MatrixXd A, Vector c, std::vector<std::size_t> initial_basis,
                  std::size_t cache_size = 24);

  Result solve(const Vector& b);
  std::size_t cache_hits() const { return hits_; }
  std::size_t cache_misses() const { return misses_; }

 private:
  struct Basis {
    std::vector<std::size_t> head;
    Eigen::MatrixXd binv;
  };

  Result read(const Basis& basis, const Vector& xb) const;
  void pivot_to_optimal(Basis& basis, const Vector& b) const;

  Eigen::MatrixXd A_;
  Vector c_;
  std::vector<Basis> cache_;
  std::size_t cache_size_;
  std::size_t hits_ = 0, misses_ = 0;
};

// Second-stage value Q(z, y) = min p2 sum t + sum c_ij s_ij of the shipment
// problem and its gradient (the capacity duals) in z.
class ShipmentRecourse {
 public:
  explicit ShipmentRecourse(const ShipmentProblem& problem);

  struct Value {
    double cost = 0.0;
    Vector grad_z;
  };
  Value second_stage(const Vector& z, const Vector& y);
  // p1 sum z + Q(z, y).
  double total_cost(const Vector& z, const Vector& y);

 private:
  ShipmentProblem problem_;
  WarmDualSimplex simplex_;
};

}  // namespace prescriptor
