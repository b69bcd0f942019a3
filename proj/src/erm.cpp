#include "prescriptor/erm.hpp"

#include "prescriptor/recourse.hpp"
#include "prescriptor/rng.hpp"
#include "prescriptor/solve.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace prescriptor {

Vector erm_predict(const LinearPolicy& policy, const Vector& x) {
  const Eigen::Index dx = policy.W.cols() - 1;
  if (x.size() != dx) throw std::invalid_argument("dimension mismatch in policy evaluation");
  Vector z = policy.W.leftCols(dx) * x + policy.W.col(dx);
  if (policy.post == PostTransform::positive_part) z = z.cwiseMax(0.0);
  return z;
}

NormSpec NormSpec::unconstrained() {
  NormSpec n;
  n.kind = Kind::none;
  return n;
}

NormSpec NormSpec::frobenius(double lambda_reg) {
  NormSpec n;
  n.kind = Kind::frobenius_penalty;
  n.lambda_reg = lambda_reg;
  return n;
}

NormSpec NormSpec::rowwise_ball(double p, double p_outer, Vector gamma, double radius) {
  NormSpec n;
  n.kind = Kind::rowwise;
  n.p = p;
  n.p_outer = p_outer;
  n.gamma = std::move(gamma);
  n.radius = radius;
  return n;
}

NormSpec NormSpec::schatten_ball(double p, double radius) {
  NormSpec n;
  n.kind = Kind::schatten;
  n.p = p;
  n.radius = radius;
  return n;
}

void NormSpec::validate() const {
  if (kind == Kind::rowwise || kind == Kind::schatten) {
    if (!(p >= 1.0)) throw std::invalid_argument("norm exponent p must lie in [1, inf]");
    if (kind == Kind::rowwise && !(p_outer >= 1.0)) throw std::invalid_argument("norm exponent p' must lie in [1, inf]");
    if (!(radius > 0.0)) throw std::invalid_argument("norm radius must be positive");
    if (gamma.size() > 0 && !(gamma.minCoeff() > 0.0)) throw std::invalid_argument("row weights must be positive");
  }
}

namespace {

double vector_pnorm(const Vector& v, double p) {
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

double rowwise_norm(const Matrix& W, double p, double p_outer, const Vector& gamma) {
  const Eigen::Index dx = W.cols() - 1;
  Vector rows(W.rows());
  for (Eigen::Index k = 0; k < W.rows(); ++k) {
    const double g = gamma.size() > 0 ? gamma(k) : 1.0;
    rows(k) = g * vector_pnorm(W.row(k).head(dx).transpose(), p);
  }
  return vector_pnorm(rows, p_outer);
}

double schatten_norm(const Matrix& W, double p) {
  const Eigen::MatrixXd block = W.leftCols(W.cols() - 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
  return vector_pnorm(svd.singularValues(), p);
}

namespace {

// Per-sample cost and its subgradient in z for the supported problems.
class ErmLoss {
 public:
  explicit ErmLoss(const Problem& problem) : problem_(problem) {
    if (const auto* p = std::get_if<ShipmentProblem>(&problem_)) {
      recourse_ = std::make_unique<ShipmentRecourse>(*p);
    } else if (!std::holds_alternative<NewsvendorSpec>(problem_)) {
      throw std::invalid_argument("ERM supports unconstrained decision spaces only");
    }
  }

  std::size_t dz() const { return decision_dim(problem_); }
  PostTransform post() const {
    return recourse_ ? PostTransform::positive_part : PostTransform::none;
  }

  double eval(const Vector& z, const Vector& y, Vector* grad) {
    if (const auto* nv = std::get_if<NewsvendorSpec>(&problem_)) {
      const double zz = z(0), yy = y(0);
      if (grad) (*grad)(0) = zz > yy ? 1.0 - nv->tau : (zz < yy ? -nv->tau : 0.0);
      return newsvendor_cost(*nv, zz, yy);
    }
    const auto& p = std::get<ShipmentProblem>(problem_);
    const Vector zp = z.cwiseMax(0.0);
    const auto q = recourse_->second_stage(zp, y);
    if (grad) {
      for (Eigen::Index i = 0; i < z.size(); ++i) (*grad)(i) = z(i) >= 0.0 ? p.p1 + q.grad_z(i) : 0.0;
    }
    return p.p1 * zp.sum() + q.cost;
  }

 private:
  Problem problem_;
  std::unique_ptr<ShipmentRecourse> recourse_;
};

struct Design {
  Matrix Xt;  // standardized features with a trailing column of ones
  Vector mean;
  Vector scale;
};

Design standardize(const Matrix& X) {
  Design d;
  const Eigen::Index n = X.rows(), dx = X.cols();
  d.mean = X.colwise().mean().transpose();
  d.scale = Vector::Ones(dx);
  for (Eigen::Index c = 0; c < dx; ++c) {
    const double var = (X.col(c).array() - d.mean(c)).square().sum() / static_cast<double>(n);
    if (var > 0.0) d.scale(c) = std::sqrt(var);
  }
  d.Xt.resize(n, dx + 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < dx; ++c) d.Xt(r, c) = (X(r, c) - d.mean(c)) / d.scale(c);
    d.Xt(r, dx) = 1.0;
  }
  return d;
}

// Maps coefficients on standardized features back to raw features.
Matrix to_raw(const Matrix& V, const Design& d) {
  const Eigen::Index dx = V.cols() - 1;
  Matrix W(V.rows(), V.cols());
  for (Eigen::Index c = 0; c < dx; ++c) W.col(c) = V.col(c) / d.scale(c);
  W.col(dx) = V.col(dx);
  for (Eigen::Index c = 0; c < dx; ++c) W.col(dx) -= V.col(c) * (d.mean(c) / d.scale(c));
  return W;
}

class ErmProblem {
 public:
  ErmProblem(const Problem& problem, const Matrix& X, const Matrix& Y, const NormSpec& norm)
      : loss_(problem), design_(standardize(X)), Y_(Y), norm_(norm) {
    if (norm_.kind == NormSpec::Kind::frobenius_penalty && norm_.lambda_reg < 0.0) {
      norm_.lambda_reg = 1.0 / std::sqrt(static_cast<double>(X.rows()));
    }
  }

  std::size_t n() const { return static_cast<std::size_t>(Y_.rows()); }
  std::size_t dz() const { return loss_.dz(); }
  Eigen::Index cols() const { return design_.Xt.cols(); }
  const Design& design() const { return design_; }
  PostTransform post() const { return loss_.post(); }

  double penalty(const Matrix& V) const {
    if (norm_.kind != NormSpec::Kind::frobenius_penalty) return 0.0;
    double s = 0.0;
    for (Eigen::Index c = 0; c + 1 < V.cols(); ++c) s += V.col(c).squaredNorm() / (design_.scale(c) * design_.scale(c));
    return norm_.lambda_reg * s;
  }

  // Average cost (plus penalty) over `rows`; accumulates the subgradient in V if requested.
  double evaluate(const Matrix& V, const std::vector<std::size_t>* rows, Matrix* grad) {
    const std::size_t count = rows ? rows->size() : n();
    Vector g(static_cast<Eigen::Index>(dz()));
    if (grad) grad->setZero(V.rows(), V.cols());
    double total = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
      const auto r = static_cast<Eigen::Index>(rows ? (*rows)[a] : a);
      const Vector xt = design_.Xt.row(r).transpose();
      const Vector z = V * xt;
      total += loss_.eval(z, Y_.row(r).transpose(), grad ? &g : nullptr);
      if (grad) grad->noalias() += g * xt.transpose();
    }
    const double inv = 1.0 / static_cast<double>(count);
    if (grad) {
      *grad *= inv;
      if (norm_.kind == NormSpec::Kind::frobenius_penalty) {
        for (Eigen::Index c = 0; c + 1 < V.cols(); ++c) {
          grad->col(c) += 2.0 * norm_.lambda_reg * V.col(c) / (design_.scale(c) * design_.scale(c));
        }
      }
    }
    return total * inv + penalty(V);
  }

  void project(Matrix& V) const {
    if (norm_.kind != NormSpec::Kind::rowwise && norm_.kind != NormSpec::Kind::schatten) return;
    const Matrix W = to_raw(V, design_);
    const double nv = norm_.kind == NormSpec::Kind::rowwise ? rowwise_norm(W, norm_.p, norm_.p_outer, norm_.gamma)
                                                            : schatten_norm(W, norm_.p);
    if (nv > norm_.radius) V.leftCols(V.cols() - 1) *= norm_.radius / nv;
  }

 private:
  ErmLoss loss_;
  Design design_;
  const Matrix& Y_;
  NormSpec norm_;
};

struct RunResult {
  Matrix best;
  double best_value;
  std::vector<double> trace;
};

RunResult run_subgradient(ErmProblem& prob, const Matrix& V0, double step, std::size_t iterations,
                          const ErmConfig& cfg, std::uint64_t seed) {
  const bool full = prob.n() <= cfg.batch_size;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, prob.n() - 1);
  std::vector<std::size_t> batch(full ? 0 : cfg.batch_size);
  Matrix V = V0, G;
  RunResult out{V0, prob.evaluate(V0, nullptr, nullptr), {}};
  out.trace.push_back(out.best_value);
  const std::size_t every = std::max<std::size_t>(1, cfg.eval_every);
  for (std::size_t t = 1; t <= iterations; ++t) {
    double value;
    if (full) {
      value = prob.evaluate(V, nullptr, &G);
      if (value < out.best_value) {
        out.best_value = value;
        out.best = V;
      }
    } else {
      for (auto& b : batch) b = pick(rng);
      prob.evaluate(V, &batch, &G);
    }
    const double gn = G.norm();
    if (!(gn > 0.0)) break;
    V -= (step / std::sqrt(static_cast<double>(t))) * G / gn;
    prob.project(V);
    if (t % every == 0 || t == iterations) {
      if (!full) {
        value = prob.evaluate(V, nullptr, nullptr);
        if (value < out.best_value) {
          out.best_value = value;
          out.best = V;
        }
      }
      out.trace.push_back(out.best_value);
    }
  }
  if (full) {
    const double value = prob.evaluate(V, nullptr, nullptr);
    if (value < out.best_value) {
      out.best_value = value;
      out.best = V;
    }
    out.trace.push_back(out.best_value);
  }
  return out;
}

}  // namespace

ErmFit erm_fit(const Problem& problem, const Matrix& X, const Matrix& Y, const ErmConfig& config) {
  validate_problem(problem);
  config.norm.validate();
  if (X.rows() == 0 || X.rows() != Y.rows()) throw std::invalid_argument("ERM needs matching, nonempty X and Y");
  if (static_cast<std::size_t>(Y.cols()) != outcome_dim(problem)) {
    throw std::invalid_argument("dimension mismatch: outcomes do not match the problem");
  }
  ErmProblem prob(problem, X, Y, config.norm);
  const auto dz = static_cast<Eigen::Index>(prob.dz());

  const Matrix zero = Matrix::Zero(dz, prob.cols());
  // Start from the best constant decision: the intercept-only SAA solution.
  Matrix V0 = zero;
  V0.col(prob.cols() - 1) = solve_saa(problem, Y).decision.z;
  prob.project(V0);

  double scale = V0.norm();
  if (!(scale > 0.0)) scale = std::max(1e-8, std::sqrt(Y.squaredNorm() / static_cast<double>(Y.size())));
  double best_step = scale;
  double best_pilot = kInf;
  const std::size_t grid = std::max<std::size_t>(1, config.step_grid);
  for (std::size_t g = 0; g < grid; ++g) {
    const double expo = grid == 1 ? 0.0 : -3.0 + 3.5 * static_cast<double>(g) / static_cast<double>(grid - 1);
    const double step = scale * std::pow(10.0, expo);
    const auto run = run_subgradient(prob, V0, step, config.pilot_iterations, config,
                                     derive_seed(config.seed, stream::pilot, g));
    if (run.best_value < best_pilot) {
      best_pilot = run.best_value;
      best_step = step;
    }
  }
  const auto run = run_subgradient(prob, V0, best_step, config.iterations, config, derive_seed(config.seed, stream::model));

  ErmFit fit;
  fit.policy.W = to_raw(run.best, prob.design());
  fit.policy.post = prob.post();
  fit.training_objective = run.best_value;
  fit.zero_policy_objective = prob.evaluate(zero, nullptr, nullptr);
  fit.step_scale = best_step;
  fit.best_trace = run.trace;
  return fit;
}

double rademacher_bound_rowwise(double M, double R, double p, const Vector& gamma, std::size_t N) {
  if (!(p >= 2.0) || std::isinf(p)) throw std::domain_error("row-wise bound requires p in [2, inf)");
  if (N == 0) throw std::domain_error("sample size must be positive");
  if (gamma.size() == 0 || !(gamma.minCoeff() > 0.0)) throw std::domain_error("row weights must be positive");
  return 2.0 * M * R * std::sqrt((p - 1.0) / static_cast<double>(N)) * gamma.cwiseInverse().sum();
}

double rademacher_bound_schatten(double R, double p, std::size_t dz, std::size_t N, double second_moment) {
  if (N == 0) throw std::domain_error("sample size must be positive");
  if (!(second_moment >= 0.0)) throw std::domain_error("second moment must be nonnegative");
  if (!(p >= 1.0)) throw std::domain_error("Schatten exponent must be at least 1");
  const double r = std::max(1.0 - 1.0 / p, 0.5);
  return 2.0 * R * std::pow(static_cast<double>(dz), r) * std::sqrt(1.0 / static_cast<double>(N)) *
         std::sqrt(second_moment);
}

double generalization_bound(double empirical_risk, double c_bar, double L, std::size_t N, double delta,
                            double complexity) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::domain_error("delta must lie in (0, 1]");
  if (N == 0) throw std::domain_error("sample size must be positive");
  return empirical_risk + c_bar * std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(N))) + L * complexity;
}

double generalization_bound_empirical(double empirical_risk, double c_bar, double L, std::size_t N,
                                      double delta, double complexity) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::domain_error("delta must lie in (0, 1]");
  if (N == 0) throw std::domain_error("sample size must be positive");
  return empirical_risk + 3.0 * c_bar * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(N))) +
         L * complexity;
}

}  // namespace prescriptor
