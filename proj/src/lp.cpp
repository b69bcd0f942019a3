#include "prescriptor/lp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace prescriptor {

std::size_t LinearProgram::add_variable(double c, double lo, double hi) {
  cost.push_back(c);
  lower.push_back(lo);
  upper.push_back(hi);
  return cost.size() - 1;
}

std::size_t LinearProgram::add_row(RowSense s, double b) {
  sense.push_back(s);
  rhs.push_back(b);
  return rhs.size() - 1;
}

void LinearProgram::set(std::size_t row, std::size_t col, double value) {
  entries.push_back({row, col, value});
}

void LinearProgram::validate() const {
  if (lower.size() != cost.size() || upper.size() != cost.size()) {
    throw std::invalid_argument("LP bound vectors do not match variable count");
  }
  if (sense.size() != rhs.size()) throw std::invalid_argument("LP row senses do not match row count");
  for (std::size_t j = 0; j < cost.size(); ++j) {
    if (!std::isfinite(cost[j])) throw std::invalid_argument("LP objective must be finite");
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInf || upper[j] == -kInf) {
      throw std::invalid_argument("LP variable bounds are invalid");
    }
  }
  for (double b : rhs) {
    if (!std::isfinite(b)) throw std::invalid_argument("LP right-hand side must be finite");
  }
  for (const auto& e : entries) {
    if (e.row >= rhs.size() || e.col >= cost.size()) throw std::invalid_argument("LP entry out of range");
    if (!std::isfinite(e.value)) throw std::invalid_argument("LP coefficients must be finite");
  }
}

std::string LinearProgram::dump() const {
  std::ostringstream out;
  out.precision(17);
  out << "min";
  for (std::size_t j = 0; j < cost.size(); ++j) {
    if (cost[j] != 0.0) out << ' ' << cost[j] << "*x" << j;
  }
  out << '\n';
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(rhs.size());
  for (const auto& e : entries) rows[e.row].emplace_back(e.col, e.value);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    out << "r" << i << ':';
    for (const auto& [c, v] : rows[i]) out << ' ' << v << "*x" << c;
    out << (sense[i] == RowSense::le ? " <= " : sense[i] == RowSense::ge ? " >= " : " = ") << rhs[i] << '\n';
  }
  for (std::size_t j = 0; j < cost.size(); ++j) {
    out << "bound x" << j << ' ' << lower[j] << ' ' << upper[j] << '\n';
  }
  return out.str();
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

double lp_objective(const LinearProgram& lp, const Vector& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) s += lp.cost[j] * x(static_cast<Eigen::Index>(j));
  return s;
}

double lp_residual(const LinearProgram& lp, const Vector& x) {
  if (!x.allFinite()) return kInf;
  std::vector<double> act(lp.num_rows(), 0.0);
  for (const auto& e : lp.entries) act[e.row] += e.value * x(static_cast<Eigen::Index>(e.col));
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const double scale = std::max(1.0, std::abs(lp.rhs[i]));
    double v = 0.0;
    switch (lp.sense[i]) {
      case RowSense::le: v = act[i] - lp.rhs[i]; break;
      case RowSense::ge: v = lp.rhs[i] - act[i]; break;
      case RowSense::eq: v = std::abs(act[i] - lp.rhs[i]); break;
    }
    worst = std::max(worst, v / scale);
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double xj = x(static_cast<Eigen::Index>(j));
    worst = std::max(worst, (lp.lower[j] - xj) / std::max(1.0, std::abs(lp.lower[j])));
    worst = std::max(worst, (xj - lp.upper[j]) / std::max(1.0, std::abs(lp.upper[j])));
  }
  return worst;
}

namespace {

enum class Place { basic, lower, upper, zero };

// Columns: structurals [0, n), slacks [n, n+m) with coefficient -1 in their
// row, artificials [n+m, n+2m) with coefficient sigma_i in their row. Every
// row reads A x - s + sigma a = 0, so all right-hand sides live in bounds.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    total_ = n_ + 2 * m_;
    build_columns();
    lo_.assign(total_, 0.0);
    hi_.assign(total_, 0.0);
    x_.assign(total_, 0.0);
    place_.assign(total_, Place::lower);
    cost_.assign(total_, 0.0);
    sigma_.assign(m_, 1.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      hi_[j] = lp.upper[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t s = n_ + i;
      switch (lp.sense[i]) {
        case RowSense::le: lo_[s] = -kInf; hi_[s] = lp.rhs[i]; break;
        case RowSense::ge: lo_[s] = lp.rhs[i]; hi_[s] = kInf; break;
        case RowSense::eq: lo_[s] = hi_[s] = lp.rhs[i]; break;
      }
    }
    max_iter_ = opt.max_iterations ? opt.max_iterations : 100 * (n_ + m_) + 10000;
  }

  LpSolution run() {
    LpSolution sol;
    crash();
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t a = n_ + m_ + i;
      cost_[a] = place_[a] == Place::basic ? 1.0 : 0.0;
    }
    LpStatus st = iterate();
    if (st != LpStatus::optimal) return finish(sol, st == LpStatus::unbounded ? LpStatus::numerical_failure : st);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i) infeas += std::max(0.0, x_[n_ + m_ + i]);
    double scale = 1.0;
    for (double b : lp_.rhs) scale = std::max(scale, std::abs(b));
    if (infeas > 1e-8 * scale) return finish(sol, LpStatus::infeasible);

    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t a = n_ + m_ + i;
      lo_[a] = hi_[a] = 0.0;
      if (place_[a] != Place::basic) {
        place_[a] = Place::lower;
        x_[a] = 0.0;
      }
      cost_[a] = 0.0;
    }
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.cost[j];
    bland_ = false;
    degenerate_run_ = 0;

    for (int attempt = 0; attempt < 2; ++attempt) {
      st = iterate();
      if (st != LpStatus::optimal) return finish(sol, st);
      Vector xs(static_cast<Eigen::Index>(n_));
      for (std::size_t j = 0; j < n_; ++j) xs(static_cast<Eigen::Index>(j)) = x_[j];
      if (lp_residual(lp_, xs) <= opt_.verify_tol) return finish(sol, LpStatus::optimal);
      if (!refactor()) break;
    }
    sol.message = "solution failed feasibility verification";
    return finish(sol, LpStatus::numerical_failure);
  }

 private:
  void build_columns() {
    col_start_.assign(n_ + 1, 0);
    for (const auto& e : lp_.entries) ++col_start_[e.col + 1];
    for (std::size_t j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
    col_row_.assign(lp_.entries.size(), 0);
    col_val_.assign(lp_.entries.size(), 0.0);
    std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
    for (const auto& e : lp_.entries) {
      col_row_[fill[e.col]] = e.row;
      col_val_[fill[e.col]] = e.value;
      ++fill[e.col];
    }
  }

  template <typename F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) f(col_row_[k], col_val_[k]);
    } else if (j < n_ + m_) {
      f(j - n_, -1.0);
    } else {
      f(j - n_ - m_, sigma_[j - n_ - m_]);
    }
  }

  double column_dot(std::size_t j, const Vector& y) const {
    double s = 0.0;
    for_column(j, [&](std::size_t r, double v) { s += v * y(static_cast<Eigen::Index>(r)); });
    return s;
  }

  void crash() {
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        place_[j] = Place::lower;
        x_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        place_[j] = Place::upper;
        x_[j] = hi_[j];
      } else {
        place_[j] = Place::zero;
        x_[j] = 0.0;
      }
    }
    std::vector<double> act(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (x_[j] != 0.0) for_column(j, [&](std::size_t r, double v) { act[r] += v * x_[j]; });
    }
    head_.assign(m_, 0);
    binv_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t s = n_ + i;
      const std::size_t a = n_ + m_ + i;
      const double tol = opt_.feasibility_tol * std::max(1.0, std::abs(act[i]));
      if (act[i] >= lo_[s] - tol && act[i] <= hi_[s] + tol) {
        head_[i] = s;
        place_[s] = Place::basic;
        x_[s] = act[i];
        binv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -1.0;
        lo_[a] = hi_[a] = 0.0;
        place_[a] = Place::lower;
        x_[a] = 0.0;
      } else {
        const bool below = act[i] < lo_[s];
        const double target = below ? lo_[s] : hi_[s];
        place_[s] = below ? Place::lower : Place::upper;
        x_[s] = target;
        sigma_[i] = target - act[i] > 0.0 ? 1.0 : -1.0;
        head_[i] = a;
        place_[a] = Place::basic;
        x_[a] = std::abs(target - act[i]);
        lo_[a] = 0.0;
        hi_[a] = kInf;
        binv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = sigma_[i];
      }
    }
  }

  void compute_basics() {
    Vector r = Vector::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t j = 0; j < total_; ++j) {
      if (place_[j] == Place::basic || x_[j] == 0.0) continue;
      const double xj = x_[j];
      for_column(j, [&](std::size_t row, double v) { r(static_cast<Eigen::Index>(row)) -= v * xj; });
    }
    const Vector xb = binv_ * r;
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] = xb(static_cast<Eigen::Index>(i));
  }

  bool refactor() {
    if (m_ == 0) return true;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      for_column(head_[i], [&](std::size_t r, double v) {
        B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) += v;
      });
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    if (!(lu.rcond() > 1e-14)) return false;
    binv_ = lu.inverse();
    pivots_since_refactor_ = 0;
    return true;
  }

  LpStatus iterate() {
    basics_stale_ = true;
    // Entries below zero_tol are treated as zero; a blocking pivot below
    // accept_tol is refused and its entering column set aside until the next
    // basis change.
    const double zero_tol = 1e-9;
    const double accept_tol = 1e-7;
    std::vector<char> rejected(total_, 0);
    bool any_rejected = false;
    bool refreshed = false;
    struct Candidate {
      std::size_t j;
      double d;
      double dir;
    };
    std::vector<Candidate> cands;
    while (true) {
      if (iterations_ >= max_iter_) {
        message_ = "iteration limit reached";
        return LpStatus::numerical_failure;
      }
      if (basics_stale_) {
        compute_basics();
        basics_stale_ = false;
      }
      Vector cb(static_cast<Eigen::Index>(m_));
      for (std::size_t i = 0; i < m_; ++i) cb(static_cast<Eigen::Index>(i)) = cost_[head_[i]];
      const Vector y = binv_.transpose() * cb;

      // Partial pricing: scan sections cyclically and stop at the first one
      // holding an improving column. Bland's rule needs a full scan from 0.
      cands.clear();
      const std::size_t section = bland_ ? total_ : std::size_t{128};
      std::size_t start = bland_ ? 0 : price_start_ % std::max<std::size_t>(total_, 1);
      for (std::size_t scanned = 0; scanned < total_ && cands.empty();) {
        const std::size_t len = std::min(section, total_ - scanned);
        for (std::size_t k = 0; k < len; ++k) {
          const std::size_t j = (start + k) % total_;
          const Place p = place_[j];
          if (p == Place::basic || lo_[j] == hi_[j] || rejected[j]) continue;
          const double d = cost_[j] - column_dot(j, y);
          double dir = 0.0;
          if (p == Place::lower && d < -opt_.optimality_tol) dir = 1.0;
          else if (p == Place::upper && d > opt_.optimality_tol) dir = -1.0;
          else if (p == Place::zero && std::abs(d) > opt_.optimality_tol) dir = d < 0.0 ? 1.0 : -1.0;
          if (dir == 0.0) continue;
          cands.push_back({j, d, dir});
          if (bland_) break;
        }
        scanned += len;
        start = (start + len) % total_;
      }
      price_start_ = start;
      if (cands.empty()) {
        if (!any_rejected) {
          duals_ = y;
          return LpStatus::optimal;
        }
        if (refreshed || !refactor()) {
          message_ = "no acceptable pivot";
          return LpStatus::numerical_failure;
        }
        refreshed = true;
        basics_stale_ = true;
        std::fill(rejected.begin(), rejected.end(), 0);
        any_rejected = false;
        continue;
      }
      if (!bland_) {
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& a, const Candidate& b) { return std::abs(a.d) > std::abs(b.d); });
      }

      // Bound flips leave the basis, and hence every reduced cost, unchanged,
      // so candidates are tried in order until one forces a basis change.
      for (const Candidate& cand : cands) {
        const std::size_t enter = cand.j;
        const double enter_dir = cand.dir;
        ++iterations_;

        Vector col = Vector::Zero(static_cast<Eigen::Index>(m_));
        for_column(enter, [&](std::size_t r, double v) { col(static_cast<Eigen::Index>(r)) += v; });
        const Vector alpha = binv_ * col;

        // Harris two-pass ratio test: find the largest step that keeps every
        // basic variable within tolerance, then take the biggest pivot that
        // blocks no later than that.
        const double ftol = opt_.feasibility_tol;
        const double amax = std::max(1.0, alpha.cwiseAbs().maxCoeff());
        const double rel_piv = zero_tol * amax;
        auto ratio = [&](std::size_t i, double slack_tol, double& delta, bool& to_lower) {
          delta = -enter_dir * alpha(static_cast<Eigen::Index>(i));
          if (std::abs(delta) <= rel_piv) return kInf;
          const std::size_t b = head_[i];
          // A basic already past its bound counts as sitting on it, so the
          // step never goes negative.
          if (delta < 0.0) {
            if (!std::isfinite(lo_[b])) return kInf;
            to_lower = true;
            return (std::max(x_[b] - lo_[b], 0.0) + slack_tol * (1.0 + std::abs(lo_[b]))) / -delta;
          }
          if (!std::isfinite(hi_[b])) return kInf;
          to_lower = false;
          return (std::max(hi_[b] - x_[b], 0.0) + slack_tol * (1.0 + std::abs(hi_[b]))) / delta;
        };
        double t_max = kInf;
        for (std::size_t i = 0; i < m_; ++i) {
          double delta;
          bool to_lower;
          t_max = std::min(t_max, ratio(i, bland_ ? 0.0 : ftol, delta, to_lower));
        }
        double t_best = kInf;
        std::size_t leave_row = m_;
        double leave_mag = 0.0;
        bool leave_to_lower = true;
        if (std::isfinite(t_max)) {
          // Bland picks the lowest index among ties, but never a pivot that is
          // tiny next to the best available one.
          double tied_mag = 0.0;
          if (bland_) {
            for (std::size_t i = 0; i < m_; ++i) {
              double delta;
              bool to_lower;
              if (ratio(i, 0.0, delta, to_lower) <= t_max + 1e-12) tied_mag = std::max(tied_mag, std::abs(delta));
            }
          }
          for (std::size_t i = 0; i < m_; ++i) {
            double delta;
            bool to_lower = true;
            const double t = ratio(i, 0.0, delta, to_lower);
            if (!std::isfinite(t) || t > t_max + (bland_ ? 1e-12 : 0.0)) continue;
            bool take;
            if (bland_) {
              take = std::abs(delta) >= 1e-3 * tied_mag && (leave_row == m_ || head_[i] < head_[leave_row]);
            } else {
              take = std::abs(delta) > leave_mag;
            }
            if (take) {
              t_best = t;
              leave_row = i;
              leave_mag = std::abs(delta);
              leave_to_lower = to_lower;
            }
          }
          t_best = std::max(t_best, 0.0);
        }
        const double flip = hi_[enter] - lo_[enter];
        if (std::isfinite(flip) && flip <= t_best) {
          const double step = enter_dir * flip;
          place_[enter] = place_[enter] == Place::lower ? Place::upper : Place::lower;
          x_[enter] = place_[enter] == Place::lower ? lo_[enter] : hi_[enter];
          for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= step * alpha(static_cast<Eigen::Index>(i));
          degenerate_run_ = 0;
          if (bland_) break;
          continue;
        }
        if (leave_row == m_) {
          message_ = "objective unbounded below";
          return LpStatus::unbounded;
        }
        if (leave_mag < accept_tol * amax) {
          rejected[enter] = 1;
          any_rejected = true;
          continue;
        }
        const std::size_t leaving = head_[leave_row];
        if (t_best <= 1e-12 && leaving < n_ + m_) {
          if (++degenerate_run_ > opt_.degenerate_switch) bland_ = true;
        } else {
          degenerate_run_ = 0;
        }

        const double step = enter_dir * t_best;
        x_[enter] += step;
        for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= step * alpha(static_cast<Eigen::Index>(i));
        place_[leaving] = leave_to_lower ? Place::lower : Place::upper;
        x_[leaving] = leave_to_lower ? lo_[leaving] : hi_[leaving];
        if (leaving >= n_ + m_) {
          // Artificials never re-enter once they leave.
          lo_[leaving] = hi_[leaving] = 0.0;
          x_[leaving] = 0.0;
        }
        place_[enter] = Place::basic;
        head_[leave_row] = enter;

        const auto r = static_cast<Eigen::Index>(leave_row);
        const double pivot = alpha(r);
        binv_.row(r) /= pivot;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m_); ++i) {
          if (i != r && alpha(i) != 0.0) binv_.row(i) -= alpha(i) * binv_.row(r);
        }
        if (++pivots_since_refactor_ >= opt_.refactor_interval) {
          if (!refactor()) {
            message_ = "basis became singular";
            return LpStatus::numerical_failure;
          }
          basics_stale_ = true;
        }
        if (any_rejected) {
          std::fill(rejected.begin(), rejected.end(), 0);
          any_rejected = false;
        }
        refreshed = false;
        break;
      }
    }
  }

  LpSolution& finish(LpSolution& sol, LpStatus st) {
    sol.status = st;
    sol.iterations = iterations_;
    if (sol.message.empty()) sol.message = message_;
    sol.x = Vector(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) sol.x(static_cast<Eigen::Index>(j)) = x_[j];
    if (st == LpStatus::optimal) {
      sol.objective = lp_objective(lp_, sol.x);
      sol.duals = duals_;
    } else {
      sol.objective = st == LpStatus::unbounded ? -kInf : kInf;
    }
    return sol;
  }

  const LinearProgram& lp_;
  const LpOptions& opt_;
  std::size_t n_ = 0, m_ = 0, total_ = 0;
  std::vector<std::size_t> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lo_, hi_, x_, cost_, sigma_;
  std::vector<Place> place_;
  std::vector<std::size_t> head_;
  Eigen::MatrixXd binv_;
  Vector duals_;
  bool basics_stale_ = true;
  std::size_t price_start_ = 0;
  std::size_t iterations_ = 0, max_iter_ = 0, pivots_since_refactor_ = 0, degenerate_run_ = 0;
  bool bland_ = false;
  std::string message_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (lp.lower[j] > lp.upper[j]) {
      LpSolution sol;
      sol.status = LpStatus::infeasible;
      sol.objective = kInf;
      sol.x = Vector::Zero(static_cast<Eigen::Index>(lp.num_vars()));
      sol.message = "empty variable bounds";
      return sol;
    }
  }
  Simplex simplex(lp, options);
  return simplex.run();
}

}  // namespace prescriptor
