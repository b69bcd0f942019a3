#include "prescriptor/solve.hpp"

#include "prescriptor/censoring.hpp"
#include "prescriptor/recourse.hpp"
#include "prescriptor/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <queue>

namespace prescriptor {

namespace {

struct Active {
  std::vector<double> w;
  std::vector<Vector> y;
  double total = 0.0;
  bool negative = false;
};

Active collect(const Problem& problem, const WeightVector& weights, const Matrix& Y) {
  if (weights.n_train != static_cast<std::size_t>(Y.rows())) {
    throw std::invalid_argument("weight vector does not match the number of scenarios");
  }
  if (static_cast<std::size_t>(Y.cols()) != outcome_dim(problem)) {
    throw std::invalid_argument("dimension mismatch: outcomes have " + std::to_string(Y.cols()) +
                                " columns, problem expects " + std::to_string(outcome_dim(problem)));
  }
  Active a;
  for (const auto& e : weights.entries) {
    if (e.index >= weights.n_train) throw std::invalid_argument("weight index out of range");
    if (std::abs(e.weight) < kMinScenarioWeight) continue;
    a.w.push_back(e.weight);
    a.y.push_back(Y.row(static_cast<Eigen::Index>(e.index)).transpose());
    a.total += e.weight;
    a.negative = a.negative || e.weight < 0.0;
  }
  if (a.w.empty() || !(a.total > 0.0)) throw std::invalid_argument("weights have no positive mass");
  return a;
}

void reject_negative(const Active& a) {
  if (a.negative) throw std::invalid_argument("negative weights unsupported for this problem");
}

SolveResult solve_newsvendor(const NewsvendorSpec& spec, const Active& a) {
  reject_negative(a);
  std::vector<std::size_t> order(a.w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a.y[i](0) < a.y[j](0) || (a.y[i](0) == a.y[j](0) && i < j);
  });
  const double target = spec.tau * a.total * (1.0 - 1e-12);
  double cum = 0.0;
  double z = a.y[order.back()](0);
  for (std::size_t i : order) {
    cum += a.w[i];
    if (cum >= target) {
      z = a.y[i](0);
      break;
    }
  }
  SolveResult r;
  r.decision.z = Vector::Constant(1, z);
  for (std::size_t i = 0; i < a.w.size(); ++i) r.objective += a.w[i] * newsvendor_cost(spec, z, a.y[i](0));
  return r;
}

// The weighted sales of item j are concave piecewise linear in z_j with slope
// equal to the weight of scenarios whose demand exceeds z_j, so filling the
// budget greedily by slope is exact.
SolveResult solve_cap_newsvendor(const CapacitatedNewsvendorProblem& p, const Active& a) {
  reject_negative(a);
  struct Segment {
    double slope;
    double length;
    std::size_t item;
    std::size_t order;
  };
  std::vector<Segment> segments;
  for (std::size_t j = 0; j < p.d; ++j) {
    std::vector<std::pair<double, double>> vals;
    for (std::size_t s = 0; s < a.w.size(); ++s) vals.emplace_back(a.y[s](static_cast<Eigen::Index>(j)), a.w[s]);
    std::sort(vals.begin(), vals.end());
    double survival = a.total;
    double prev = 0.0;
    std::size_t k = 0;
    std::size_t idx = 0;
    while (idx < vals.size()) {
      const double v = vals[idx].first;
      if (v > prev) segments.push_back({survival, v - prev, j, k++});
      prev = std::max(prev, v);
      while (idx < vals.size() && vals[idx].first == v) survival -= vals[idx++].second;
    }
  }
  std::sort(segments.begin(), segments.end(), [](const Segment& x, const Segment& y) {
    if (x.slope != y.slope) return x.slope > y.slope;
    if (x.item != y.item) return x.item < y.item;
    return x.order < y.order;
  });
  Vector z = Vector::Zero(static_cast<Eigen::Index>(p.d));
  double left = p.capacity;
  for (const auto& s : segments) {
    if (left <= 0.0 || s.slope <= 0.0) break;
    const double take = std::min(left, s.length);
    z(static_cast<Eigen::Index>(s.item)) += take;
    left -= take;
  }
  SolveResult r;
  r.decision.z = z;
  for (std::size_t s = 0; s < a.w.size(); ++s) r.objective += a.w[s] * capacitated_newsvendor_cost(p, z, a.y[s]);
  return r;
}

Vector clean_simplex(Vector z) {
  z = z.cwiseMax(0.0);
  const double s = z.sum();
  if (!(s > 0.0)) throw NumericalError("portfolio solve returned a degenerate allocation");
  return z / s;
}

double cvar_objective(const PortfolioProblem& p, const Decision& d, const Active& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.w.size(); ++i) s += a.w[i] * portfolio_cost(p, d, a.y[i]);
  return s;
}

// Dual of the epigraph LP: one column per scenario, dy + 1 rows.
//   min -nu  s.t.  sum_s pi_s = W,  nu + sum_s y_sj pi_s <= -lambda sum_s w_s y_sj,
//   0 <= pi_s <= w_s / eps.
// Allocation and VaR are read off the row duals.
SolveResult solve_portfolio_convex(const PortfolioProblem& p, const Active& a) {
  const std::size_t dy = p.dy;
  LinearProgram lp;
  const std::size_t total_row = lp.add_row(RowSense::eq, a.total);
  Vector mean_term = Vector::Zero(static_cast<Eigen::Index>(dy));
  for (std::size_t s = 0; s < a.w.size(); ++s) mean_term += a.w[s] * a.y[s];
  for (std::size_t j = 0; j < dy; ++j) lp.add_row(RowSense::le, -p.lambda * mean_term(static_cast<Eigen::Index>(j)));
  for (std::size_t s = 0; s < a.w.size(); ++s) {
    const std::size_t col = lp.add_variable(0.0, 0.0, a.w[s] / p.epsilon);
    lp.set(total_row, col, 1.0);
    for (std::size_t j = 0; j < dy; ++j) {
      const double v = a.y[s](static_cast<Eigen::Index>(j));
      if (v != 0.0) lp.set(1 + j, col, v);
    }
  }
  const std::size_t nu = lp.add_variable(-1.0, -kInf, kInf);
  for (std::size_t j = 0; j < dy; ++j) lp.set(1 + j, nu, 1.0);

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) {
    throw NumericalError("portfolio LP failed: " + to_string(sol.status) + " " + sol.message);
  }
  SolveResult r;
  r.iterations = sol.iterations;
  r.decision.z = clean_simplex(-sol.duals.tail(static_cast<Eigen::Index>(dy)));
  r.decision.beta = optimal_cvar_beta(p, r.decision.z, a.w, a.y);
  r.objective = cvar_objective(p, r.decision, a);
  const double lp_value = -sol.objective;
  if (std::abs(r.objective - lp_value) > 1e-7 * (1.0 + std::abs(lp_value))) {
    throw NumericalError("portfolio allocation does not reproduce the LP optimum");
  }
  return r;
}

// Big-M branch and bound; binaries only on negative-weight scenarios, where
// m_s must equal max{L_s - beta, 0} exactly. The optimal beta is a breakpoint
// L_s, so beta and every L_s - beta have exact bounds, which give the
// per-scenario big-M values. Scenarios whose hinge can never be positive are
// dropped and those that always are become linear.
SolveResult solve_portfolio_negative(const PortfolioProblem& p, const Active& a, const SolveOptions& opt) {
  const std::size_t dy = p.dy;
  std::vector<double> loss_lo(a.w.size()), loss_hi(a.w.size());
  double beta_lo = kInf, beta_hi = -kInf;
  for (std::size_t s = 0; s < a.w.size(); ++s) {
    loss_lo[s] = -a.y[s].maxCoeff();
    loss_hi[s] = -a.y[s].minCoeff();
    beta_lo = std::min(beta_lo, loss_lo[s]);
    beta_hi = std::max(beta_hi, loss_hi[s]);
  }

  LinearProgram lp;
  Vector mean_term = Vector::Zero(static_cast<Eigen::Index>(dy));
  for (std::size_t s = 0; s < a.w.size(); ++s) mean_term += a.w[s] * a.y[s];
  std::vector<std::size_t> zc(dy);
  for (std::size_t j = 0; j < dy; ++j) zc[j] = lp.add_variable(-p.lambda * mean_term(static_cast<Eigen::Index>(j)));
  const std::size_t beta = lp.add_variable(a.total, beta_lo, beta_hi);
  const std::size_t simplex = lp.add_row(RowSense::eq, 1.0);
  for (std::size_t c : zc) lp.set(simplex, c, 1.0);
  // Row holding m + beta + y^T z (= m - (L_s - beta)).
  auto put_loss = [&](std::size_t row, std::size_t m, std::size_t s) {
    lp.set(row, m, 1.0);
    lp.set(row, beta, 1.0);
    for (std::size_t j = 0; j < dy; ++j) {
      const double v = a.y[s](static_cast<Eigen::Index>(j));
      if (v != 0.0) lp.set(row, zc[j], v);
    }
  };
  std::vector<std::size_t> binaries;
  std::vector<std::size_t> binary_scenario;
  for (std::size_t s = 0; s < a.w.size(); ++s) {
    const double lo = loss_lo[s] - beta_hi;
    const double hi = loss_hi[s] - beta_lo;
    if (a.w[s] < 0.0 && hi <= 0.0) continue;
    if (a.w[s] < 0.0 && lo >= 0.0) {
      // Always active: w_s (L_s - beta) / eps, linear in (z, beta).
      lp.cost[beta] -= a.w[s] / p.epsilon;
      for (std::size_t j = 0; j < dy; ++j) {
        lp.cost[zc[j]] -= a.w[s] / p.epsilon * a.y[s](static_cast<Eigen::Index>(j));
      }
      continue;
    }
    const std::size_t m = lp.add_variable(a.w[s] / p.epsilon, 0.0, kInf);
    put_loss(lp.add_row(RowSense::ge, 0.0), m, s);
    if (a.w[s] >= 0.0) continue;
    const std::size_t b = lp.add_variable(0.0, 0.0, 1.0);
    binaries.push_back(b);
    binary_scenario.push_back(s);
    // m <= (L_s - beta) - lo (1 - b)  and  m <= hi b.
    const std::size_t upper = lp.add_row(RowSense::le, -lo);
    put_loss(upper, m, s);
    lp.set(upper, b, -lo);
    const std::size_t cap = lp.add_row(RowSense::le, 0.0);
    lp.set(cap, m, 1.0);
    lp.set(cap, b, -hi);
  }

  using Fixing = std::vector<std::pair<std::size_t, double>>;
  double incumbent = kInf;
  Decision best;
  auto solve_node = [&](const Fixing& fixed) {
    LinearProgram sub = lp;
    for (const auto& [col, v] : fixed) sub.lower[col] = sub.upper[col] = v;
    const LpSolution sol = solve_lp(sub);
    if (sol.status != LpStatus::optimal && sol.status != LpStatus::infeasible) {
      throw NumericalError("branch and bound relaxation failed: " + to_string(sol.status));
    }
    return sol;
  };
  auto consider = [&](const LpSolution& sol) {
    Decision cand;
    Vector z(static_cast<Eigen::Index>(dy));
    for (std::size_t j = 0; j < dy; ++j) z(static_cast<Eigen::Index>(j)) = sol.x(static_cast<Eigen::Index>(zc[j]));
    cand.z = clean_simplex(z);
    cand.beta = optimal_cvar_beta(p, cand.z, a.w, a.y);
    const double value = cvar_objective(p, cand, a);
    if (value < incumbent) {
      incumbent = value;
      best = cand;
    }
    return cand;
  };
  // Local search: fix every indicator to the sign of its hinge at the
  // current point and re-solve until the pattern repeats. The current point
  // stays feasible, so the true objective never increases.
  auto dive = [&](Decision d) {
    Fixing last;
    for (int round = 0; round < 50; ++round) {
      Fixing fixed;
      for (std::size_t k = 0; k < binaries.size(); ++k) {
        const double t = -a.y[binary_scenario[k]].dot(d.z) - d.beta;
        fixed.emplace_back(binaries[k], t > 0.0 ? 1.0 : 0.0);
      }
      if (fixed == last) return;
      const LpSolution sol = solve_node(fixed);
      if (sol.status != LpStatus::optimal) return;
      d = consider(sol);
      last = std::move(fixed);
    }
  };

  struct Node {
    double bound;
    std::size_t id;
    Fixing fixed;
  };
  auto worse = [](const Node& x, const Node& y) { return x.bound > y.bound || (x.bound == y.bound && x.id > y.id); };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  open.push({-kInf, 0, {}});
  std::size_t next_id = 1;
  std::size_t nodes = 0;
  double lower_bound = kInf;
  auto closed = [&](double bound) { return bound >= incumbent - opt.relative_gap * (1.0 + std::abs(incumbent)); };
  while (!open.empty()) {
    if (closed(open.top().bound)) break;
    if (nodes >= opt.max_nodes) break;
    Node node = open.top();
    open.pop();
    ++nodes;
    const LpSolution sol = solve_node(node.fixed);
    if (sol.status == LpStatus::infeasible) continue;
    const Decision cand = consider(sol);
    if (nodes == 1) dive(cand);
    if (closed(sol.objective)) continue;
    std::size_t branch = binaries.size();
    double most = 1e-7;
    for (std::size_t k = 0; k < binaries.size(); ++k) {
      const double v = sol.x(static_cast<Eigen::Index>(binaries[k]));
      const double frac = std::min(v, 1.0 - v);
      if (frac > most) {
        most = frac;
        branch = k;
      }
    }
    if (branch == binaries.size()) {
      // Integral relaxation: its value is attained, so the node is solved.
      lower_bound = std::min(lower_bound, sol.objective);
      continue;
    }
    for (double v : {0.0, 1.0}) {
      Node child{sol.objective, next_id++, node.fixed};
      child.fixed.emplace_back(binaries[branch], v);
      open.push(std::move(child));
    }
  }
  if (!std::isfinite(incumbent)) throw NumericalError("branch and bound found no feasible allocation");
  SolveResult r;
  r.decision = best;
  r.objective = incumbent;
  r.iterations = nodes;
  if (!open.empty() && !closed(open.top().bound)) {
    r.certified = false;
    r.lower_bound = std::min(lower_bound, open.top().bound);
  } else {
    r.lower_bound = incumbent;
  }
  return r;
}

// L-shaped method with an l-infinity trust region around the incumbent:
// master min W p1 sum z + theta over aggregated optimality cuts, recourse
// values and duals from the warm-started dual simplex. The cut model never
// exceeds the true convex objective, so a model minimum over the box that
// matches the incumbent certifies global optimality.
SolveResult solve_shipment(const ShipmentProblem& p, const Active& a, const SolveOptions& opt) {
  reject_negative(a);
  const auto dz = static_cast<Eigen::Index>(p.dz());
  double ubound = 0.0;
  for (const auto& y : a.y) ubound = std::max(ubound, y.sum());
  SolveResult r;
  ShipmentRecourse recourse(p);
  if (!(ubound > 0.0)) {
    r.decision.z = Vector::Zero(dz);
    r.objective = 0.0;
    return r;
  }

  LinearProgram master;
  for (Eigen::Index i = 0; i < dz; ++i) master.add_variable(a.total * p.p1, 0.0, ubound);
  const std::size_t theta = master.add_variable(1.0, 0.0, kInf);

  auto evaluate = [&](const Vector& z) {
    double qbar = 0.0;
    Vector g = Vector::Zero(dz);
    for (std::size_t s = 0; s < a.w.size(); ++s) {
      const auto v = recourse.second_stage(z, a.y[s]);
      qbar += a.w[s] * v.cost;
      g += a.w[s] * v.grad_z;
    }
    const std::size_t row = master.add_row(RowSense::ge, qbar - g.dot(z));
    master.set(row, theta, 1.0);
    for (Eigen::Index i = 0; i < dz; ++i) {
      if (g(i) != 0.0) master.set(row, static_cast<std::size_t>(i), -g(i));
    }
    return a.total * p.p1 * z.sum() + qbar;
  };

  // Start from the mean total demand split evenly over the warehouses.
  double mean_total = 0.0;
  for (std::size_t s = 0; s < a.w.size(); ++s) mean_total += a.w[s] * a.y[s].sum();
  Vector center = Vector::Constant(dz, mean_total / a.total / static_cast<double>(dz));
  double f_center = evaluate(center);
  double radius = ubound / 10.0;
  std::size_t round = 0;
  for (; round < opt.max_cut_rounds; ++round) {
    LinearProgram boxed = master;
    for (Eigen::Index i = 0; i < dz; ++i) {
      boxed.lower[static_cast<std::size_t>(i)] = std::max(0.0, center(i) - radius);
      boxed.upper[static_cast<std::size_t>(i)] = std::min(ubound, center(i) + radius);
    }
    const LpSolution sol = solve_lp(boxed);
    if (sol.status != LpStatus::optimal) throw NumericalError("shipment master problem failed: " + to_string(sol.status));
    const double predicted = f_center - sol.objective;
    if (predicted <= opt.relative_gap * std::max(1.0, std::abs(f_center))) break;
    const Vector z = sol.x.head(dz).cwiseMax(0.0).cwiseMin(ubound);
    const double f = evaluate(z);
    const double ratio = (f_center - f) / predicted;
    if (ratio >= 0.1) {
      const bool on_edge = (z - center).cwiseAbs().maxCoeff() >= radius * (1.0 - 1e-9);
      center = z;
      f_center = f;
      if (ratio >= 0.5 && on_edge) radius = std::min(2.0 * radius, ubound);
    } else if (ratio < 0.0) {
      radius = std::max(radius / 2.0, 1e-9 * ubound);
    }
  }
  if (round == opt.max_cut_rounds) throw NumericalError("shipment decomposition did not converge");
  r.decision.z = center;
  r.objective = f_center;
  r.iterations = round + 1;
  return r;
}

}  // namespace

double optimal_cvar_beta(const PortfolioProblem& problem, const Vector& z, const std::vector<double>& w,
                         const std::vector<Vector>& ys) {
  const std::size_t n = w.size();
  if (n == 0) throw std::invalid_argument("no scenarios");
  std::vector<std::pair<double, double>> loss(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    loss[i] = {-z.dot(ys[i]), w[i]};
    total += w[i];
  }
  std::sort(loss.begin(), loss.end());
  // Walk breakpoints from the top, keeping sums over strictly larger losses.
  double above_w = 0.0, above_wl = 0.0;
  double best_beta = loss.back().first;
  double best_val = kInf;
  std::size_t i = n;
  while (i > 0) {
    const double beta = loss[i - 1].first;
    const double val = total * beta + (above_wl - beta * above_w) / problem.epsilon;
    if (val < best_val) {
      best_val = val;
      best_beta = beta;
    }
    while (i > 0 && loss[i - 1].first == beta) {
      above_w += loss[i - 1].second;
      above_wl += loss[i - 1].second * loss[i - 1].first;
      --i;
    }
  }
  return best_beta;
}

SolveResult solve_weighted(const Problem& problem, const WeightVector& weights, const Matrix& Y,
                           const SolveOptions& options) {
  validate_problem(problem);
  const Active a = collect(problem, weights, Y);
  if (const auto* p = std::get_if<PortfolioProblem>(&problem)) {
    return a.negative ? solve_portfolio_negative(*p, a, options) : solve_portfolio_convex(*p, a);
  }
  if (const auto* p = std::get_if<ShipmentProblem>(&problem)) return solve_shipment(*p, a, options);
  if (const auto* p = std::get_if<CapacitatedNewsvendorProblem>(&problem)) return solve_cap_newsvendor(*p, a);
  return solve_newsvendor(std::get<NewsvendorSpec>(problem), a);
}

SolveResult solve_saa(const Problem& problem, const Matrix& Y, const SolveOptions& options) {
  if (Y.rows() == 0) throw std::invalid_argument("SAA needs at least one scenario");
  return solve_weighted(problem, WeightVector::uniform(static_cast<std::size_t>(Y.rows())), Y, options);
}

Decision solve_point_pred(const Problem& problem, const Vector& y_hat) {
  if (!y_hat.allFinite()) throw std::invalid_argument("point prediction must be finite");
  Matrix Y(1, y_hat.size());
  Y.row(0) = y_hat.transpose();
  return solve_weighted(problem, WeightVector::uniform(1), Y).decision;
}

OracleResult full_info_oracle(const Problem& problem, const ConditionalSampler& sampler, const Vector& x,
                              std::size_t m, std::uint64_t seed, std::size_t refits) {
  if (m < 1) throw std::invalid_argument("oracle needs at least one draw");
  const Matrix draws = sampler(x, m, seed);
  const SolveResult full = solve_saa(problem, draws);
  OracleResult out{full.decision, full.objective, 0.0};
  if (refits == 0 || m < 4) return out;
  const std::size_t half = m / 2;
  std::vector<double> values;
  for (std::size_t r = 0; r < refits; ++r) {
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 1000 + r));
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix sub(static_cast<Eigen::Index>(half), draws.cols());
    for (std::size_t i = 0; i < half; ++i) sub.row(static_cast<Eigen::Index>(i)) = draws.row(static_cast<Eigen::Index>(perm[i]));
    values.push_back(solve_saa(problem, sub).objective);
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size() - 1);
  // A half sample has twice the variance of the full one.
  out.std_error = std::sqrt(var / 2.0);
  return out;
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"knn", "radius-knn", "kr", "recursive-kr", "loess",
                                                 "cart", "rf", "saa", "point-pred", "erm"};
  return names;
}

struct Prescription::State {
  TrainingData data;
  MethodParams params;
  Matrix X;  // possibly standardized
  std::optional<Standardizer> scaler;
  std::size_t k = 0;
  double bandwidth = 0.0;
  BandwidthSchedule schedule;
  std::optional<RegressionTree> tree;
  std::optional<Forest> forest;
  std::optional<LinearPolicy> policy;
  std::optional<Decision> fixed;
  mutable std::atomic<std::size_t> fallbacks{0};
  mutable std::atomic<std::size_t> uncertified{0};
};

bool Prescription::uses_weights() const {
  return method_ != "point-pred" && method_ != "erm";
}

std::size_t Prescription::fallback_count() const { return state_->fallbacks.load(); }
std::size_t Prescription::uncertified_count() const { return state_->uncertified.load(); }

WeightVector Prescription::weights(const Vector& x_raw) const {
  const State& s = *state_;
  if (!uses_weights()) throw std::invalid_argument("method " + method_ + " does not produce weights");
  if (x_raw.size() != s.data.X.cols()) throw std::invalid_argument("dimension mismatch in query point");
  const Vector x = s.scaler ? s.scaler->transform(x_raw) : x_raw;
  const std::size_t n = static_cast<std::size_t>(s.X.rows());
  WeightVector w;
  try {
    if (method_ == "knn") w = knn_weights(s.X, x, s.k);
    else if (method_ == "radius-knn") w = radius_knn_weights(s.X, x, s.k, s.params.decay);
    else if (method_ == "kr") w = kr_weights(s.X, x, s.params.kernel, s.bandwidth);
    else if (method_ == "recursive-kr") w = recursive_kr_weights(s.X, x, s.schedule, s.params.recursive_kernel);
    else if (method_ == "loess") w = loess_weights(s.X, x, s.k, s.params.loess_kernel);
    else if (method_ == "cart") w = s.tree->weights(x);
    else if (method_ == "rf") w = s.forest->weights(x);
    else w = WeightVector::uniform(n);
  } catch (const EmptyNeighborhoodError&) {
    if (!s.params.empty_neighborhood_fallback) throw;
    ++s.fallbacks;
    w = knn_weights(s.X, x, 1);
  }
  if (s.data.delta) {
    w = km_transform({std::move(w), s.data.Y.col(0), *s.data.delta});
  }
  return w;
}

Decision Prescription::prescribe(const Vector& x) const {
  const State& s = *state_;
  if (s.fixed) return *s.fixed;
  if (method_ == "point-pred") {
    const Vector xs = s.scaler ? s.scaler->transform(x) : x;
    return solve_point_pred(problem_, s.forest->predict(xs));
  }
  if (method_ == "erm") {
    Decision d;
    d.z = erm_predict(*s.policy, x);
    return d;
  }
  const SolveResult r = solve_weighted(problem_, weights(x), s.data.Y);
  if (!r.certified) ++s.uncertified;
  return r.decision;
}

Prescription make_prescription(const std::string& method, const MethodParams& params, TrainingData data,
                               const Problem& problem) {
  const auto& names = method_names();
  if (std::find(names.begin(), names.end(), method) == names.end()) {
    throw std::invalid_argument("unknown method: " + method);
  }
  validate_problem(problem);
  const auto n = static_cast<std::size_t>(data.X.rows());
  const auto dx = static_cast<std::size_t>(data.X.cols());
  if (n == 0) throw std::invalid_argument("training set is empty");
  if (data.Y.rows() != data.X.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (static_cast<std::size_t>(data.Y.cols()) != outcome_dim(problem)) {
    throw std::invalid_argument("dimension mismatch: outcomes have " + std::to_string(data.Y.cols()) +
                                " columns, problem expects " + std::to_string(outcome_dim(problem)));
  }
  if (data.delta) {
    if (data.Y.cols() != 1) throw std::invalid_argument("censoring supports univariate outcomes only");
    if (data.delta->size() != n) throw std::invalid_argument("censoring indicators do not match sample size");
    if (method == "erm" || method == "point-pred" || method == "loess") {
      throw std::invalid_argument("method " + method + " does not support censored data");
    }
  }

  Prescription out;
  out.method_ = method;
  out.problem_ = problem;
  auto state = std::make_shared<Prescription::State>();
  state->params = params;
  if (!state->params.decay) state->params.decay = [](double d) { return 1.0 / (1.0 + d); };
  if (params.standardize && method != "erm") {
    state->scaler = Standardizer(data.X);
    state->X = state->scaler->transform(data.X);
  } else {
    state->X = data.X;
  }

  if (method == "knn" || method == "radius-knn") {
    state->k = params.k.value_or(DefaultSchedules::knn_k(n));
  } else if (method == "loess") {
    state->k = params.k.value_or(DefaultSchedules::loess_k(n, dx));
  } else if (method == "kr") {
    state->bandwidth = params.bandwidth.value_or(DefaultSchedules::kr_bandwidth(n, dx));
  } else if (method == "recursive-kr") {
    state->schedule = params.recursive_schedule.value_or(DefaultSchedules::recursive(dx));
  } else if (method == "cart") {
    TreeConfig tc = params.tree.value_or(TreeConfig{});
    if (!params.tree) tc.seed = derive_seed(params.seed, stream::model);
    state->tree = fit_tree(state->X, data.Y, tc);
  } else if (method == "rf" || method == "point-pred") {
    ForestConfig fc = params.forest.value_or(ForestConfig::defaults(dx));
    if (!params.forest) fc.seed = derive_seed(params.seed, stream::model);
    state->forest = fit_forest(state->X, data.Y, fc, params.threads);
  } else if (method == "erm") {
    ErmConfig ec = params.erm;
    state->policy = erm_fit(problem, data.X, data.Y, ec).policy;
  }
  state->data = std::move(data);
  out.state_ = state;
  if (method == "saa") {
    state->fixed = solve_weighted(problem, out.weights(Vector::Zero(static_cast<Eigen::Index>(dx))),
                                  state->data.Y).decision;
  }
  return out;
}

}  // namespace prescriptor
