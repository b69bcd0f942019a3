#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/problems.hpp"

#include <cstdint>
#include <vector>

namespace prescriptor {

enum class PostTransform { none, positive_part };

// z(x) = W [x; 1], optionally clamped at zero elementwise.
struct LinearPolicy {
  Matrix W;  // dz x (dx + 1); last column is the intercept
  PostTransform post = PostTransform::none;
};

Vector erm_predict(const LinearPolicy& policy, const Vector& x);

struct NormSpec {
  enum class Kind { none, rowwise, schatten, frobenius_penalty };
  Kind kind = Kind::frobenius_penalty;
  double p = 2.0;
  double p_outer = 2.0;  // p' of the row-wise norm
  Vector gamma;          // row weights of the row-wise norm (defaults to ones)
  double radius = kInf;  // R for constrained kinds
  double lambda_reg = -1.0;  // penalty weight; negative selects 1 / sqrt(N)

  static NormSpec unconstrained();
  static NormSpec frobenius(double lambda_reg = -1.0);
  static NormSpec rowwise_ball(double p, double p_outer, Vector gamma, double radius);
  static NormSpec schatten_ball(double p, double radius);
  void validate() const;
};

// Norms of the non-intercept block of W.
double rowwise_norm(const Matrix& W, double p, double p_outer, const Vector& gamma);
double schatten_norm(const Matrix& W, double p);

struct ErmConfig {
  NormSpec norm;
  std::size_t iterations = 5000;
  std::size_t pilot_iterations = 300;
  std::size_t step_grid = 10;
  std::size_t batch_size = 256;  // full batch when N is not larger
  std::size_t eval_every = 50;   // full-objective checkpoints for best-iterate tracking
  std::uint64_t seed = 0;
};

struct ErmFit {
  LinearPolicy policy;
  double training_objective = 0.0;  // empirical cost plus penalty at the returned iterate
  double zero_policy_objective = 0.0;
  double step_scale = 0.0;
  std::vector<double> best_trace;  // nonincreasing best objective at each checkpoint
};

// Supported problems: newsvendor (scalar y, no transform) and shipment
// (positive-part transform, cost p1 sum z+ + Q(z+, y)).
ErmFit erm_fit(const Problem& problem, const Matrix& X, const Matrix& Y, const ErmConfig& config = {});

// 2 M R sqrt((p - 1) / N) sum_k 1 / gamma_k, for p in [2, inf).
double rademacher_bound_rowwise(double M, double R, double p, const Vector& gamma, std::size_t N);
// 2 R dz^r sqrt(1 / N) sqrt(E||X||^2), r = max{1 - 1/p, 1/2}.
double rademacher_bound_schatten(double R, double p, std::size_t dz, std::size_t N, double second_moment);
// empirical + c_bar sqrt(log(1/delta) / 2N) + L complexity.
double generalization_bound(double empirical_risk, double c_bar, double L, std::size_t N, double delta,
                            double complexity);
// empirical + 3 c_bar sqrt(log(2/delta) / 2N) + L complexity (data-dependent complexity).
double generalization_bound_empirical(double empirical_risk, double c_bar, double L, std::size_t N,
                                      double delta, double complexity);

}  // namespace prescriptor
