#pragma once

#include "prescriptor/common.hpp"

#include <limits>
#include <string>
#include <vector>

namespace prescriptor {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { le, eq, ge };

struct LpEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

// min c^T x  s.t.  a_i^T x (<=|=|>=) b_i,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<LpEntry> entries;  // triplets; duplicates are summed

  std::size_t add_variable(double c, double lo = 0.0, double hi = kInf);
  std::size_t add_row(RowSense s, double b);
  void set(std::size_t row, std::size_t col, double value);

  std::size_t num_vars() const { return cost.size(); }
  std::size_t num_rows() const { return rhs.size(); }
  void validate() const;
  // Plain-text dump, one constraint per line.
  std::string dump() const;
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };
std::string to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  Vector x;
  Vector duals;  // d objective / d rhs
  double objective = 0.0;
  std::size_t iterations = 0;
  std::string message;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double verify_tol = 1e-7;
  std::size_t max_iterations = 0;  // 0: automatic
  std::size_t refactor_interval = 100;
  std::size_t degenerate_switch = 50;
};

// Bounded-variable two-phase revised simplex. Dantzig pricing, switching to
// Bland's rule after a run of degenerate pivots.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

// Largest violation of rows and bounds at x, relative to max(1, |b_i|).
double lp_residual(const LinearProgram& lp, const Vector& x);
double lp_objective(const LinearProgram& lp, const Vector& x);

}  // namespace prescriptor
