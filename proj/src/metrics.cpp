#include "prescriptor/metrics.hpp"

#include "prescriptor/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace prescriptor {

namespace {

constexpr std::size_t kBlock = 64;

double pairwise(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise(v, h) + pairwise(v + h, n - h);
}

std::size_t blocks_for(std::size_t n) { return (n + kBlock - 1) / kBlock; }

void require_rows(const Matrix& Y, const char* what) {
  if (Y.rows() == 0) throw std::invalid_argument(std::string(what) + " must be nonempty");
}

}  // namespace

double pairwise_sum(const std::vector<double>& values) { return pairwise(values.data(), values.size()); }

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
  out.se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  return out;
}

std::vector<double> realized_costs(const Problem& problem, const Decision& d, const Matrix& Y,
                                   std::size_t threads) {
  const auto n = static_cast<std::size_t>(Y.rows());
  std::vector<double> out(n);
  parallel_for(blocks_for(n), threads, [&](std::size_t b) {
    CostEvaluator eval(problem);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) out[i] = eval(d, row_vector(Y, static_cast<Eigen::Index>(i)));
  });
  return out;
}

double estimate_risk(const Prescription& prescription, const Matrix& X_val, const Matrix& Y_val,
                     std::size_t threads) {
  require_rows(Y_val, "validation set");
  if (X_val.rows() != Y_val.rows()) throw std::invalid_argument("validation X and Y row counts differ");
  const auto n = static_cast<std::size_t>(Y_val.rows());
  std::vector<double> costs(n);
  parallel_for(blocks_for(n), threads, [&](std::size_t b) {
    CostEvaluator eval(prescription.problem());
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      costs[i] = eval(prescription.prescribe(row_vector(X_val, r)), row_vector(Y_val, r));
    }
  });
  return pairwise_sum(costs) / static_cast<double>(n);
}

double perfect_foresight_risk(const Problem& problem, const Matrix& Y_val, std::size_t threads) {
  require_rows(Y_val, "validation set");
  const auto n = static_cast<std::size_t>(Y_val.rows());
  std::vector<double> costs(n);
  parallel_for(blocks_for(n), threads, [&](std::size_t b) {
    CostEvaluator eval(problem);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const Vector y = row_vector(Y_val, static_cast<Eigen::Index>(i));
      costs[i] = eval(solve_point_pred(problem, y), y);
    }
  });
  return pairwise_sum(costs) / static_cast<double>(n);
}

double coefficient_of_prescriptiveness(double policy_risk, double saa_risk, double perfect_risk) {
  if (!std::isfinite(policy_risk) || !std::isfinite(saa_risk) || !std::isfinite(perfect_risk)) {
    throw std::invalid_argument("risks must be finite");
  }
  const double denom = saa_risk - perfect_risk;
  if (denom == 0.0) throw std::domain_error("SAA already perfect; P undefined");
  if (denom < 0.0) throw std::invalid_argument("SAA risk below perfect-foresight risk");
  return 1.0 - (policy_risk - perfect_risk) / denom;
}

RiskReport prescriptiveness_report(const Prescription& policy, const Prescription& saa, const Matrix& X_val,
                                   const Matrix& Y_val, std::size_t threads) {
  RiskReport r;
  r.n_validation = static_cast<std::size_t>(Y_val.rows());
  r.policy_risk = estimate_risk(policy, X_val, Y_val, threads);
  r.saa_risk = estimate_risk(saa, X_val, Y_val, threads);
  r.perfect_foresight_risk = perfect_foresight_risk(policy.problem(), Y_val, threads);
  r.P = coefficient_of_prescriptiveness(r.policy_risk, r.saa_risk, r.perfect_foresight_risk);
  return r;
}

}  // namespace prescriptor
