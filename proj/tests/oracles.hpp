#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite.

#include "prescriptor/erm.hpp"
#include "prescriptor/lp.hpp"
#include "prescriptor/rng.hpp"

#include <cmath>
#include <functional>
#include <optional>

namespace prescriptor::oracle {

// Brute-force optimum of a small bounded LP: every vertex is the solution of
// n active constraints drawn from the rows and the finite bounds.
inline std::optional<double> lp_by_vertices(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lp.num_rows()), static_cast<Eigen::Index>(n));
  for (const auto& e : lp.entries) A(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += e.value;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    rows.push_back(A.row(static_cast<Eigen::Index>(r)).transpose());
    rhs.push_back(lp.rhs[r]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    ej(static_cast<Eigen::Index>(j)) = 1.0;
    if (std::isfinite(lp.lower[j])) {
      rows.push_back(ej);
      rhs.push_back(lp.lower[j]);
    }
    if (std::isfinite(lp.upper[j])) {
      rows.push_back(ej);
      rhs.push_back(lp.upper[j]);
    }
  }
  const std::size_t m = rows.size();
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == n) {
      Eigen::MatrixXd M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      Eigen::VectorXd b(static_cast<Eigen::Index>(n));
      for (std::size_t a = 0; a < n; ++a) {
        M.row(static_cast<Eigen::Index>(a)) = rows[pick[a]].transpose();
        b(static_cast<Eigen::Index>(a)) = rhs[pick[a]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (lu.rank() < static_cast<Eigen::Index>(n)) return;
      const Vector x = lu.solve(b);
      if (lp_residual(lp, x) > 1e-9) return;
      const double obj = lp_objective(lp, x);
      if (!best || obj < *best) best = obj;
      return;
    }
    for (std::size_t i = start; i < m; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Box-bounded LP with Gaussian data and a random mix of row senses.
inline LinearProgram random_lp(Rng& rng, std::size_t n, std::size_t rows) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> sense(0, 2);
  LinearProgram lp;
  for (std::size_t j = 0; j < n; ++j) lp.add_variable(normal(rng), -2.0 - std::abs(normal(rng)), 2.0 + std::abs(normal(rng)));
  for (std::size_t r = 0; r < rows; ++r) {
    const int s = sense(rng);
    const auto row = lp.add_row(s == 0 ? RowSense::le : s == 1 ? RowSense::ge : RowSense::eq, 0.5 * normal(rng));
    for (std::size_t j = 0; j < n; ++j) lp.set(row, j, normal(rng));
  }
  return lp;
}

// Coverage of the generalization bound on a newsvendor with bounded data:
// x ~ U[0, 1], y = x + U[0, 1], tau = 0.7. Policies are linear with
// slope norm at most 1.5; the fitted intercept must stay within 3, so the
// whole coefficient vector lies in the Euclidean ball of radius sqrt(1.5^2 + 3^2)
// and |z| <= 4.5. Returns the fraction of resamples whose bound exceeds the
// true risk (estimated on 20000 fresh draws).
struct CoverageResult {
  double coverage = 0.0;
  std::size_t intercept_violations = 0;
};

inline CoverageResult bound_coverage(std::size_t resamples, std::size_t n, double delta, std::uint64_t seed) {
  const double tau = 0.7, slope_radius = 1.5, intercept_cap = 3.0;
  const double R = std::sqrt(slope_radius * slope_radius + intercept_cap * intercept_cap);
  const double M = std::sqrt(2.0);  // ||(x, 1)||_2 for x in [0, 1]
  const double L = std::max(tau, 1.0 - tau);
  const double c_bar = L * (slope_radius + intercept_cap + 2.0);
  const NewsvendorSpec spec{tau};
  auto sample = [](std::size_t m, std::uint64_t s) {
    Rng rng(s);
    std::uniform_real_distribution<double> unif;
    Matrix X(static_cast<Eigen::Index>(m), 1), Y(static_cast<Eigen::Index>(m), 1);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      X(i, 0) = unif(rng);
      Y(i, 0) = X(i, 0) + unif(rng);
    }
    return std::pair{X, Y};
  };
  auto risk = [&](const LinearPolicy& pol, const Matrix& X, const Matrix& Y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      s += newsvendor_cost(spec, erm_predict(pol, X.row(i).transpose())(0), Y(i, 0));
    return s / static_cast<double>(X.rows());
  };
  const auto [Xt, Yt] = sample(20000, derive_seed(seed, 0));
  CoverageResult out;
  std::size_t covered = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    const auto [X, Y] = sample(n, derive_seed(seed, 1, r));
    ErmConfig cfg;
    cfg.norm = NormSpec::rowwise_ball(2.0, 2.0, Vector::Ones(1), slope_radius);
    cfg.iterations = 1000;
    cfg.pilot_iterations = 100;
    cfg.step_grid = 5;
    cfg.seed = derive_seed(seed, 2, r);
    const ErmFit fit = erm_fit(spec, X, Y, cfg);
    if (std::abs(fit.policy.W(0, 1)) > intercept_cap) ++out.intercept_violations;
    const double complexity = rademacher_bound_rowwise(M, R, 2.0, Vector::Ones(1), n);
    const double bound = generalization_bound(risk(fit.policy, X, Y), c_bar, L, n, delta, complexity);
    if (bound >= risk(fit.policy, Xt, Yt)) ++covered;
  }
  out.coverage = static_cast<double>(covered) / static_cast<double>(resamples);
  return out;
}

}  // namespace prescriptor::oracle
