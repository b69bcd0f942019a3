#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/problems.hpp"
#include "prescriptor/solve.hpp"

#include <vector>

namespace prescriptor {

struct RiskReport {
  double policy_risk = 0.0;
  double saa_risk = 0.0;
  double perfect_foresight_risk = 0.0;
  std::size_t n_validation = 0;
  double P = 0.0;
};

// Pairwise summation; the result depends only on the order of `values`.
double pairwise_sum(const std::vector<double>& values);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n); 0 for n < 2
};
MeanSe mean_se(const std::vector<double>& values);

// Realized cost c(d; y) for each row of Y at a fixed decision. Rows are
// processed in fixed blocks, each with its own evaluator, so the values do
// not depend on the thread count.
std::vector<double> realized_costs(const Problem& problem, const Decision& d, const Matrix& Y,
                                   std::size_t threads = 1);

// (1/N_v) sum_i c(z(x_i); y_i).
double estimate_risk(const Prescription& prescription, const Matrix& X_val, const Matrix& Y_val,
                     std::size_t threads = 1);

// (1/N_v) sum_i min_z c(z; y_i), each inner problem solved as a
// single-scenario instance.
double perfect_foresight_risk(const Problem& problem, const Matrix& Y_val, std::size_t threads = 1);

// 1 - (policy - perfect) / (saa - perfect). Throws std::domain_error when
// saa == perfect and std::invalid_argument when saa < perfect.
double coefficient_of_prescriptiveness(double policy_risk, double saa_risk, double perfect_risk);

RiskReport prescriptiveness_report(const Prescription& policy, const Prescription& saa, const Matrix& X_val,
                                   const Matrix& Y_val, std::size_t threads = 1);

}  // namespace prescriptor
