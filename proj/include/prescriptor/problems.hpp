#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/lp.hpp"
#include "prescriptor/weights.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace prescriptor {

// Mean-CVaR allocation over the simplex:
//   c((z, beta); y) = beta + max{-z^T y - beta, 0} / epsilon - lambda z^T y.
struct PortfolioProblem {
  double lambda = 0.0;
  double epsilon = 0.15;
  std::size_t dy = 12;
  void validate() const;
};

// Two-stage shipment planning: produce z in advance at p1, then ship at
// ship_cost(i, j) per unit, topping up with last-minute production at p2.
struct ShipmentProblem {
  Matrix ship_cost;  // dz x dy
  double p1 = 5.0;
  double p2 = 100.0;

  std::size_t dz() const { return static_cast<std::size_t>(ship_cost.rows()); }
  std::size_t dy() const { return static_cast<std::size_t>(ship_cost.cols()); }
  void validate() const;

  // 12 locations on the unit circle, 4 warehouses on the circle of radius
  // 0.85, c_ij = 10 D_ij, p1 = 5, p2 = 100.
  static ShipmentProblem benchmark();
  static Matrix benchmark_distances();
};

// Cost is minus total sales, -sum_j min{y_j, z_j}, with sum_j z_j <= capacity.
struct CapacitatedNewsvendorProblem {
  std::size_t d = 12;
  double capacity = 1.0;
  void validate() const;
};

// Pinball loss max{(1 - tau)(z - y), tau (y - z)}.
struct NewsvendorSpec {
  double tau = 0.5;
  void validate() const;
};

using Problem = std::variant<PortfolioProblem, ShipmentProblem, CapacitatedNewsvendorProblem, NewsvendorSpec>;

std::string problem_name(const Problem& problem);
// Length of the outcome vector y the problem expects.
std::size_t outcome_dim(const Problem& problem);
std::size_t decision_dim(const Problem& problem);
void validate_problem(const Problem& problem);

struct Decision {
  Vector z;
  double beta = 0.0;  // CVaR auxiliary; unused by other problems
};

double portfolio_cost(const PortfolioProblem& problem, const Decision& d, const Vector& y);
double shipment_cost(const ShipmentProblem& problem, const Vector& z, const Vector& y);
double capacitated_newsvendor_cost(const CapacitatedNewsvendorProblem& problem, const Vector& z, const Vector& y);
double newsvendor_cost(const NewsvendorSpec& spec, double z, double y);

// Largest violation of the problem's feasible set at d (0 when feasible).
double feasibility_violation(const Problem& problem, const Decision& d);

class ShipmentRecourse;

// Evaluates c(d; y) for one problem. Holds solver caches, so use one per thread.
class CostEvaluator {
 public:
  explicit CostEvaluator(Problem problem);
  ~CostEvaluator();
  CostEvaluator(CostEvaluator&&) noexcept;
  CostEvaluator& operator=(CostEvaluator&&) noexcept;

  double operator()(const Decision& d, const Vector& y);
  const Problem& problem() const { return problem_; }

 private:
  Problem problem_;
  std::unique_ptr<ShipmentRecourse> recourse_;
};

struct Scenario {
  double weight;
  Vector y;
};

// LP over (z, beta, epigraph/recourse variables) whose optimum is
// min_z sum_i w_i c(z; y^i). z occupies columns z_cols; beta_col is set for
// the portfolio only.
struct EpigraphLp {
  LinearProgram lp;
  std::vector<std::size_t> z_cols;
  long beta_col = -1;
};

EpigraphLp lp_epigraph(const Problem& problem, const std::vector<Scenario>& scenarios);

// Scenarios with weight below this are dropped before optimization.
inline constexpr double kMinScenarioWeight = 1e-12;

}  // namespace prescriptor
