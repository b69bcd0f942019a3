#include "prescriptor/censoring.hpp"
#include "prescriptor/datagen.hpp"
#include "prescriptor/lp.hpp"
#include "prescriptor/rng.hpp"
#include "prescriptor/solve.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace prescriptor;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0, bool positive = false) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const double v = scale * normal(rng);
      M(i, j) = positive ? std::abs(v) : v;
    }
  return M;
}

WeightVector dense_weights(const std::vector<double>& w) {
  WeightVector out;
  out.n_train = w.size();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) out.entries.push_back({i, w[i]});
  return out;
}

double weighted_cost(const Problem& problem, const Decision& d, const WeightVector& w, const Matrix& Y) {
  CostEvaluator eval(problem);
  double s = 0.0;
  for (const auto& e : w.entries) s += e.weight * eval(d, Y.row(static_cast<Eigen::Index>(e.index)).transpose());
  return s;
}

double epigraph_optimum(const Problem& problem, const WeightVector& w, const Matrix& Y) {
  std::vector<Scenario> sc;
  for (const auto& e : w.entries) sc.push_back({e.weight, Y.row(static_cast<Eigen::Index>(e.index)).transpose()});
  const LpSolution s = solve_lp(lp_epigraph(problem, sc).lp);
  EXPECT_EQ(s.status, LpStatus::optimal);
  return s.objective;
}

// Global optimum of the signed-weight CVaR objective by enumerating which
// scenarios sit above beta. Each pattern is an LP over (z, beta) and the
// objective is continuous, so the best pattern LP is the global optimum.
double cvar_pattern_oracle(const PortfolioProblem& p, const std::vector<double>& w, const Matrix& Y) {
  const std::size_t n = w.size();
  const std::size_t d = p.dy;
  double best = kInf;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    LinearProgram lp;
    std::vector<std::size_t> z(d);
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(d));
    double total = 0.0, above = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += w[i] * Y.row(static_cast<Eigen::Index>(i)).transpose();
      total += w[i];
    }
    // Objective: sum_i w_i (beta - lambda z'y_i) + sum_{i in A} w_i (-z'y_i - beta) / eps.
    Vector zc = -p.lambda * mean;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        zc -= w[i] / p.epsilon * Y.row(static_cast<Eigen::Index>(i)).transpose();
        above += w[i];
      }
    }
    for (std::size_t j = 0; j < d; ++j) z[j] = lp.add_variable(zc(static_cast<Eigen::Index>(j)), 0.0, 1.0);
    const auto beta = lp.add_variable(total - above / p.epsilon, -kInf, kInf);
    const auto simplex = lp.add_row(RowSense::eq, 1.0);
    for (std::size_t j = 0; j < d; ++j) lp.set(simplex, z[j], 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      // loss_i - beta = -z'y_i - beta, >= 0 inside A and <= 0 outside.
      const auto r = lp.add_row((mask >> i & 1) ? RowSense::ge : RowSense::le, 0.0);
      for (std::size_t j = 0; j < d; ++j) lp.set(r, z[j], -Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      lp.set(r, beta, -1.0);
    }
    const LpSolution s = solve_lp(lp);
    if (s.status == LpStatus::optimal) best = std::min(best, s.objective);
  }
  return best;
}

}  // namespace

TEST(Newsvendor, WeightedQuantileMatchesGridSearch) {
  Rng rng(51);
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 15;
    const Matrix Y = random_matrix(n, 1, 100 + static_cast<std::uint64_t>(rep), 3.0);
    std::vector<double> w(n);
    for (auto& v : w) v = unif(rng) < 0.3 ? 0.0 : unif(rng);
    w[0] += 0.1;
    const WeightVector wv = dense_weights(w);
    const NewsvendorSpec spec{0.1 + 0.8 * unif(rng)};
    const SolveResult r = solve_weighted(spec, wv, Y);
    double best = kInf;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      Decision d{Vector::Constant(1, Y(i, 0)), 0.0};
      best = std::min(best, weighted_cost(spec, d, wv, Y));
    }
    EXPECT_NEAR(r.objective, best, 1e-12);
    EXPECT_NEAR(weighted_cost(spec, r.decision, wv, Y), r.objective, 1e-12);
  }
}

TEST(CapNewsvendor, GreedyMatchesLp) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Matrix Y = random_matrix(20, 12, 200 + seed, 0.2, true);
    std::vector<double> w(20);
    Rng rng(seed);
    std::uniform_real_distribution<double> unif;
    for (auto& v : w) v = unif(rng);
    const WeightVector wv = dense_weights(w);
    CapacitatedNewsvendorProblem p;
    const SolveResult r = solve_weighted(p, wv, Y);
    EXPECT_NEAR(r.objective, epigraph_optimum(p, wv, Y), 1e-9);
    EXPECT_LE(feasibility_violation(p, r.decision), 1e-12);
  }
}

TEST(CapNewsvendor, TwoItemGridSearch) {
  const Matrix Y = random_matrix(10, 2, 300, 0.6, true);
  CapacitatedNewsvendorProblem p;
  p.d = 2;
  const WeightVector wv = WeightVector::uniform(10);
  const SolveResult r = solve_weighted(p, wv, Y);
  double best = kInf;
  for (int a = 0; a <= 1000; ++a) {
    for (int b = 0; a + b <= 1000; b += 1) {
      Decision d{Vector(2), 0.0};
      d.z << a / 1000.0, b / 1000.0;
      best = std::min(best, weighted_cost(p, d, wv, Y));
    }
  }
  EXPECT_LE(r.objective, best + 1e-12);
  EXPECT_NEAR(r.objective, best, 2e-3);
}

TEST(Portfolio, ConvexSolveMatchesEpigraphLp) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Matrix Y = random_matrix(40, 12, 400 + seed, 0.05);
    PortfolioProblem p;
    p.lambda = seed % 2 ? 0.5 : 0.0;
    const WeightVector wv = WeightVector::uniform(40);
    const SolveResult r = solve_weighted(p, wv, Y);
    EXPECT_NEAR(r.objective, epigraph_optimum(p, wv, Y), 1e-9);
    EXPECT_LE(feasibility_violation(p, r.decision), 1e-9);
    EXPECT_NEAR(weighted_cost(p, r.decision, wv, Y), r.objective, 1e-12);
  }
}

TEST(Portfolio, OptimalBetaMatchesBreakpointScan) {
  Rng rng(52);
  std::normal_distribution<double> normal;
  PortfolioProblem p;
  p.dy = 3;
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<double> w;
    std::vector<Vector> ys;
    for (int i = 0; i < 9; ++i) {
      w.push_back(normal(rng) + 0.4);
      ys.push_back(Vector::Random(3));
    }
    double total = 0.0;
    for (double v : w) total += v;
    if (total <= 0.0) continue;
    const Vector z = Vector::Constant(3, 1.0 / 3.0);
    auto value = [&](double beta) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * (beta + std::max(-z.dot(ys[i]) - beta, 0.0) / p.epsilon);
      return s;
    };
    double best = kInf;
    for (const auto& y : ys) best = std::min(best, value(-z.dot(y)));
    EXPECT_NEAR(value(optimal_cvar_beta(p, z, w, ys)), best, 1e-12);
  }
}

TEST(Portfolio, NegativeWeightsMatchPatternEnumeration) {
  Rng rng(53);
  std::uniform_real_distribution<double> unif;
  int certified = 0;
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 8 + static_cast<std::size_t>(rep % 3);
    PortfolioProblem p;
    p.dy = 4;
    p.lambda = rep % 2 ? 0.3 : 0.0;
    p.epsilon = 0.3;
    const Matrix Y = random_matrix(n, 4, 500 + static_cast<std::uint64_t>(rep), 0.05);
    std::vector<double> w(n);
    for (auto& v : w) v = unif(rng) - 0.2;
    double total = 0.0;
    for (double v : w) total += v;
    if (total <= 0.05) continue;
    const SolveResult r = solve_weighted(p, dense_weights(w), Y);
    ASSERT_TRUE(r.certified);
    ++certified;
    const double oracle = cvar_pattern_oracle(p, w, Y);
    EXPECT_NEAR(r.objective, oracle, 1e-8);
    EXPECT_LE(r.lower_bound, r.objective + 1e-12);
    EXPECT_NEAR(weighted_cost(p, r.decision, dense_weights(w), Y), r.objective, 1e-12);
    EXPECT_LE(feasibility_violation(p, r.decision), 1e-9);
  }
  EXPECT_GE(certified, 8);
}

TEST(Portfolio, NodeLimitReportsUncertifiedBound) {
  Rng rng(54);
  std::uniform_real_distribution<double> unif;
  const std::size_t n = 60;
  const Matrix Y = random_matrix(n, 12, 600, 0.05);
  std::vector<double> w(n);
  for (auto& v : w) v = unif(rng) - 0.35;
  SolveOptions opt;
  opt.max_nodes = 1;
  const SolveResult r = solve_weighted(PortfolioProblem{}, dense_weights(w), Y, opt);
  EXPECT_LE(r.lower_bound, r.objective + 1e-12);
  if (!r.certified) EXPECT_TRUE(std::isfinite(r.lower_bound));
  EXPECT_LE(feasibility_violation(PortfolioProblem{}, r.decision), 1e-9);
}

TEST(Shipment, DecompositionMatchesMonolithicLp) {
  const ShipmentProblem p = ShipmentProblem::benchmark();
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix Y = random_matrix(12, 12, 700 + seed, 2.0, true);
    std::vector<double> w(12);
    Rng rng(seed);
    std::uniform_real_distribution<double> unif;
    for (auto& v : w) v = unif(rng);
    const WeightVector wv = dense_weights(w);
    const SolveResult r = solve_weighted(p, wv, Y);
    const double oracle = epigraph_optimum(p, wv, Y);
    EXPECT_NEAR(r.objective, oracle, 1e-6 * std::abs(oracle));
    EXPECT_GE(r.objective, oracle - 1e-9 * std::abs(oracle));
    EXPECT_LE(feasibility_violation(p, r.decision), 1e-12);
  }
}

TEST(Solve, ScalingWeightsKeepsDecision) {
  const Matrix Y = random_matrix(30, 1, 800, 2.0);
  std::vector<double> w(30, 0.0);
  for (std::size_t i = 0; i < 30; ++i) w[i] = 1.0 + static_cast<double>(i % 4);
  std::vector<double> w2(w);
  for (auto& v : w2) v *= 7.0;
  const NewsvendorSpec spec{0.7};
  EXPECT_EQ(solve_weighted(spec, dense_weights(w), Y).decision.z(0),
            solve_weighted(spec, dense_weights(w2), Y).decision.z(0));
}

TEST(Solve, SaaIsUniformWeights) {
  const Matrix Y = random_matrix(25, 12, 801, 0.2, true);
  const CapacitatedNewsvendorProblem p;
  EXPECT_NEAR(solve_saa(p, Y).objective, solve_weighted(p, WeightVector::uniform(25), Y).objective, 1e-15);
}

TEST(Solve, PointPredictionOfNewsvendorIsThePrediction) {
  EXPECT_NEAR(solve_point_pred(NewsvendorSpec{0.9}, Vector::Constant(1, 4.2)).z(0), 4.2, 1e-15);
  EXPECT_THROW(solve_point_pred(NewsvendorSpec{}, Vector::Constant(1, NAN)), std::invalid_argument);
}

TEST(Solve, Errors) {
  const Matrix Y = random_matrix(5, 2, 802);
  try {
    solve_weighted(NewsvendorSpec{}, WeightVector::uniform(5), Y);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "dimension mismatch: outcomes have 2 columns, problem expects 1");
  }
  const Matrix Y1 = random_matrix(2, 1, 803);
  EXPECT_THROW(solve_weighted(NewsvendorSpec{}, dense_weights({0.7, -0.2}), Y1), std::invalid_argument);
  EXPECT_THROW(solve_weighted(NewsvendorSpec{}, WeightVector::uniform(3), Y1), std::invalid_argument);
}

TEST(Oracle, DeterministicWithStandardError) {
  ConditionalSampler sampler = [](const Vector& x, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(x(0), 1.0);
    Matrix Y(static_cast<Eigen::Index>(m), 1);
    for (Eigen::Index i = 0; i < Y.rows(); ++i) Y(i, 0) = normal(rng);
    return Y;
  };
  const NewsvendorSpec spec{0.5};
  const OracleResult a = full_info_oracle(spec, sampler, Vector::Constant(1, 2.0), 4000, 9);
  const OracleResult b = full_info_oracle(spec, sampler, Vector::Constant(1, 2.0), 4000, 9);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_GT(a.std_error, 0.0);
  // Median of N(2, 1); expected pinball loss there is E|Y - 2| / 2 = phi(0).
  EXPECT_NEAR(a.decision.z(0), 2.0, 0.1);
  EXPECT_NEAR(a.value, 0.3989422804014327, 0.02);
}

TEST(Prescription, KnnPrescribesTheWeightedSolve) {
  const Matrix X = random_matrix(60, 2, 900);
  const Matrix Y = random_matrix(60, 1, 901, 2.0);
  MethodParams params;
  params.k = 7;
  const Prescription pr = make_prescription("knn", params, {X, Y, std::nullopt}, NewsvendorSpec{0.6});
  const Vector x = Vector::Constant(2, 0.3);
  const WeightVector w = knn_weights(X, x, 7);
  EXPECT_EQ(pr.prescribe(x).z(0), solve_weighted(NewsvendorSpec{0.6}, w, Y).decision.z(0));
}

TEST(Prescription, EmptyNeighbourhoodFallsBackToNearestPoint) {
  const Matrix X = random_matrix(30, 1, 902);
  const Matrix Y = random_matrix(30, 1, 903);
  MethodParams params;
  params.kernel = KernelKind::naive;
  params.bandwidth = 0.01;
  const Prescription pr = make_prescription("kr", params, {X, Y, std::nullopt}, NewsvendorSpec{});
  const WeightVector w = pr.weights(Vector::Constant(1, 100.0));
  ASSERT_EQ(w.entries.size(), 1u);
  Eigen::Index argmax;
  X.col(0).maxCoeff(&argmax);
  EXPECT_EQ(w.entries[0].index, static_cast<std::size_t>(argmax));
  EXPECT_EQ(pr.fallback_count(), 1u);
  params.empty_neighborhood_fallback = false;
  const Prescription strict = make_prescription("kr", params, {X, Y, std::nullopt}, NewsvendorSpec{});
  EXPECT_THROW(strict.weights(Vector::Constant(1, 100.0)), EmptyNeighborhoodError);
}

TEST(Prescription, SaaIgnoresCovariates) {
  const Matrix X = random_matrix(40, 3, 904);
  const Matrix Y = random_matrix(40, 1, 905);
  const Prescription pr = make_prescription("saa", {}, {X, Y, std::nullopt}, NewsvendorSpec{});
  EXPECT_EQ(pr.prescribe(Vector::Zero(3)).z(0), pr.prescribe(Vector::Constant(3, 5.0)).z(0));
  EXPECT_EQ(pr.prescribe(Vector::Zero(3)).z(0), solve_saa(NewsvendorSpec{}, Y).decision.z(0));
}

TEST(Prescription, WeightsSumToOneForEveryMethod) {
  const Matrix X = random_matrix(80, 2, 906);
  const Matrix Y = random_matrix(80, 1, 907);
  for (const std::string m : {"knn", "radius-knn", "kr", "recursive-kr", "loess", "cart", "rf", "saa"}) {
    const Prescription pr = make_prescription(m, {}, {X, Y, std::nullopt}, NewsvendorSpec{});
    EXPECT_NEAR(pr.weights(Vector::Constant(2, 0.1)).total(), 1.0, 1e-9) << m;
  }
}

TEST(Prescription, CensoredWeightsAreKaplanMeier) {
  const Matrix X = random_matrix(50, 1, 908);
  const Matrix U = random_matrix(50, 1, 909, 1.0, true);
  std::vector<std::uint8_t> delta(50);
  for (std::size_t i = 0; i < 50; ++i) delta[i] = i % 3 ? 1 : 0;
  MethodParams params;
  params.k = 10;
  const Prescription pr = make_prescription("knn", params, {X, U, delta}, NewsvendorSpec{});
  const Vector x = Vector::Constant(1, 0.2);
  const WeightVector want = km_transform({knn_weights(X, x, 10), U.col(0), delta});
  EXPECT_LT((pr.weights(x).dense() - want.dense()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(make_prescription("erm", {}, {X, U, delta}, NewsvendorSpec{}), std::invalid_argument);
}

TEST(Prescription, Errors) {
  const Matrix X = random_matrix(10, 2, 910);
  const Matrix Y = random_matrix(10, 2, 911);
  EXPECT_THROW(make_prescription("nope", {}, {X, Y.col(0), std::nullopt}, NewsvendorSpec{}), std::invalid_argument);
  try {
    make_prescription("knn", {}, {X, Y, std::vector<std::uint8_t>(10, 1)}, CapacitatedNewsvendorProblem{2, 1.0});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "censoring supports univariate outcomes only");
  }
}
