#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/erm.hpp"
#include "prescriptor/problems.hpp"
#include "prescriptor/trees.hpp"
#include "prescriptor/weights.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace prescriptor {

struct SolveResult {
  Decision decision;
  double objective = 0.0;  // sum_i w_i c(z; y^i), evaluated directly
  std::size_t iterations = 0;
  // Branch and bound only: false when the node limit stopped the search
  // before the incumbent was proven optimal; lower_bound then bounds the
  // optimum from below.
  bool certified = true;
  double lower_bound = -kInf;
};

struct SolveOptions {
  double relative_gap = 1e-9;
  std::size_t max_cut_rounds = 2000;
  std::size_t max_nodes = 500;
};

// argmin_z sum_i w_i c(z; y^i). Negative weights are supported for the
// portfolio (branch and bound); other problems reject them.
SolveResult solve_weighted(const Problem& problem, const WeightVector& weights, const Matrix& Y,
                           const SolveOptions& options = {});
SolveResult solve_saa(const Problem& problem, const Matrix& Y, const SolveOptions& options = {});
Decision solve_point_pred(const Problem& problem, const Vector& y_hat);

// Optimal beta for a fixed allocation: minimizes W beta + sum_i w_i max{L_i - beta, 0} / eps
// over the breakpoints L_i = -z^T y^i. Valid for weights of any sign.
double optimal_cvar_beta(const PortfolioProblem& problem, const Vector& z,
                         const std::vector<double>& w, const std::vector<Vector>& ys);

using ConditionalSampler = std::function<Matrix(const Vector& x, std::size_t m, std::uint64_t seed)>;

struct OracleResult {
  Decision decision;
  double value = 0.0;
  double std_error = 0.0;
};

// Equal-weight solve over m draws of Y | X = x. The standard error comes
// from `refits` half-sample re-solves (0 skips them).
OracleResult full_info_oracle(const Problem& problem, const ConditionalSampler& sampler, const Vector& x,
                              std::size_t m, std::uint64_t seed, std::size_t refits = 5);

struct MethodParams {
  std::optional<std::size_t> k;          // knn, radius-knn, loess
  std::optional<double> bandwidth;       // kr
  KernelKind kernel = KernelKind::gaussian;
  std::optional<BandwidthSchedule> recursive_schedule;
  KernelKind recursive_kernel = KernelKind::naive;
  KernelKind loess_kernel = KernelKind::tricubic;
  DecayFunction decay;                   // radius-knn; defaults to 1 / (1 + d)
  std::optional<TreeConfig> tree;
  std::optional<ForestConfig> forest;    // rf and point-pred
  ErmConfig erm;
  bool standardize = false;
  bool empty_neighborhood_fallback = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct TrainingData {
  Matrix X;
  Matrix Y;  // observed u when censored
  std::optional<std::vector<std::uint8_t>> delta;
};

const std::vector<std::string>& method_names();

class Prescription {
 public:
  const std::string& method() const { return method_; }
  const Problem& problem() const { return problem_; }
  bool uses_weights() const;
  // Weights at x after any censoring correction.
  WeightVector weights(const Vector& x) const;
  Decision prescribe(const Vector& x) const;
  // Queries that fell back to the nearest neighbour because the kernel
  // neighbourhood was empty.
  std::size_t fallback_count() const;
  // Negative-weight solves that hit the branch-and-bound node limit.
  std::size_t uncertified_count() const;

  struct State;

 private:
  friend Prescription make_prescription(const std::string&, const MethodParams&, TrainingData, const Problem&);
  std::string method_;
  Problem problem_;
  std::shared_ptr<State> state_;
};

Prescription make_prescription(const std::string& method, const MethodParams& params, TrainingData data,
                               const Problem& problem);

}  // namespace prescriptor
