#include "prescriptor/problems.hpp"

#include "prescriptor/recourse.hpp"

#include <cmath>
#include <numbers>

namespace prescriptor {

void PortfolioProblem::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (dy < 1) throw std::invalid_argument("portfolio needs at least one security");
}

void ShipmentProblem::validate() const {
  if (ship_cost.size() == 0) throw std::invalid_argument("shipment cost matrix is empty");
  if (!(p1 > 0.0 && p2 > p1)) throw std::invalid_argument("shipment costs must satisfy p2 > p1 > 0");
  if (!ship_cost.allFinite() || ship_cost.minCoeff() < 0.0) {
    throw std::invalid_argument("shipping costs must be finite and nonnegative");
  }
}

Matrix ShipmentProblem::benchmark_distances() {
  constexpr int warehouses = 4;
  constexpr int locations = 12;
  Matrix D(warehouses, locations);
  for (int i = 0; i < warehouses; ++i) {
    const double a = 2.0 * std::numbers::pi * i / warehouses;
    for (int j = 0; j < locations; ++j) {
      const double b = 2.0 * std::numbers::pi * j / locations;
      D(i, j) = std::hypot(0.85 * std::cos(a) - std::cos(b), 0.85 * std::sin(a) - std::sin(b));
    }
  }
  return D;
}

ShipmentProblem ShipmentProblem::benchmark() {
  ShipmentProblem p;
  p.ship_cost = 10.0 * benchmark_distances();
  p.p1 = 5.0;
  p.p2 = 100.0;
  return p;
}

void CapacitatedNewsvendorProblem::validate() const {
  if (d < 1) throw std::invalid_argument("newsvendor needs at least one item");
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
}

void NewsvendorSpec::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
}

std::string problem_name(const Problem& problem) {
  struct {
    std::string operator()(const PortfolioProblem&) const { return "portfolio"; }
    std::string operator()(const ShipmentProblem&) const { return "shipment"; }
    std::string operator()(const CapacitatedNewsvendorProblem&) const { return "cap-newsvendor"; }
    std::string operator()(const NewsvendorSpec&) const { return "newsvendor"; }
  } v;
  return std::visit(v, problem);
}

std::size_t outcome_dim(const Problem& problem) {
  struct {
    std::size_t operator()(const PortfolioProblem& p) const { return p.dy; }
    std::size_t operator()(const ShipmentProblem& p) const { return p.dy(); }
    std::size_t operator()(const CapacitatedNewsvendorProblem& p) const { return p.d; }
    std::size_t operator()(const NewsvendorSpec&) const { return 1; }
  } v;
  return std::visit(v, problem);
}

std::size_t decision_dim(const Problem& problem) {
  struct {
    std::size_t operator()(const PortfolioProblem& p) const { return p.dy; }
    std::size_t operator()(const ShipmentProblem& p) const { return p.dz(); }
    std::size_t operator()(const CapacitatedNewsvendorProblem& p) const { return p.d; }
    std::size_t operator()(const NewsvendorSpec&) const { return 1; }
  } v;
  return std::visit(v, problem);
}

void validate_problem(const Problem& problem) {
  std::visit([](const auto& p) { p.validate(); }, problem);
}

double portfolio_cost(const PortfolioProblem& problem, const Decision& d, const Vector& y) {
  const double ret = d.z.dot(y);
  return d.beta + std::max(-ret - d.beta, 0.0) / problem.epsilon - problem.lambda * ret;
}

double shipment_cost(const ShipmentProblem& problem, const Vector& z, const Vector& y) {
  ShipmentRecourse recourse(problem);
  return recourse.total_cost(z, y);
}

double capacitated_newsvendor_cost(const CapacitatedNewsvendorProblem& problem, const Vector& z, const Vector& y) {
  if (z.size() != static_cast<Eigen::Index>(problem.d) || y.size() != z.size()) {
    throw std::invalid_argument("dimension mismatch in newsvendor cost");
  }
  return -z.cwiseMin(y).sum();
}

double newsvendor_cost(const NewsvendorSpec& spec, double z, double y) {
  return std::max((1.0 - spec.tau) * (z - y), spec.tau * (y - z));
}

double feasibility_violation(const Problem& problem, const Decision& d) {
  const double neg = d.z.size() > 0 ? std::max(0.0, -d.z.minCoeff()) : 0.0;
  if (std::holds_alternative<PortfolioProblem>(problem)) return std::max(neg, std::abs(d.z.sum() - 1.0));
  if (std::holds_alternative<ShipmentProblem>(problem)) return neg;
  if (const auto* p = std::get_if<CapacitatedNewsvendorProblem>(&problem)) {
    return std::max(neg, d.z.sum() - p->capacity);
  }
  return 0.0;
}

CostEvaluator::CostEvaluator(Problem problem) : problem_(std::move(problem)) {
  validate_problem(problem_);
  if (const auto* p = std::get_if<ShipmentProblem>(&problem_)) recourse_ = std::make_unique<ShipmentRecourse>(*p);
}

CostEvaluator::~CostEvaluator() = default;
CostEvaluator::CostEvaluator(CostEvaluator&&) noexcept = default;
CostEvaluator& CostEvaluator::operator=(CostEvaluator&&) noexcept = default;

double CostEvaluator::operator()(const Decision& d, const Vector& y) {
  if (const auto* p = std::get_if<PortfolioProblem>(&problem_)) return portfolio_cost(*p, d, y);
  if (std::holds_alternative<ShipmentProblem>(problem_)) return recourse_->total_cost(d.z, y);
  if (const auto* p = std::get_if<CapacitatedNewsvendorProblem>(&problem_)) {
    return capacitated_newsvendor_cost(*p, d.z, y);
  }
  return newsvendor_cost(std::get<NewsvendorSpec>(problem_), d.z(0), y(0));
}

namespace {

std::vector<const Scenario*> active_scenarios(const std::vector<Scenario>& scenarios, std::size_t dim) {
  std::vector<const Scenario*> out;
  for (const auto& s : scenarios) {
    if (s.weight < 0.0) throw std::invalid_argument("epigraph formulation invalid for negative weights");
    if (static_cast<std::size_t>(s.y.size()) != dim) throw std::invalid_argument("scenario has the wrong dimension");
    if (s.weight >= kMinScenarioWeight) out.push_back(&s);
  }
  return out;
}

EpigraphLp portfolio_lp(const PortfolioProblem& p, const std::vector<const Scenario*>& sc) {
  EpigraphLp e;
  LinearProgram& lp = e.lp;
  double total = 0.0;
  Vector mean_term = Vector::Zero(static_cast<Eigen::Index>(p.dy));
  for (const auto* s : sc) {
    total += s->weight;
    mean_term += s->weight * s->y;
  }
  for (std::size_t j = 0; j < p.dy; ++j) {
    e.z_cols.push_back(lp.add_variable(-p.lambda * mean_term(static_cast<Eigen::Index>(j)), 0.0, kInf));
  }
  e.beta_col = static_cast<long>(lp.add_variable(total, -kInf, kInf));
  const std::size_t simplex = lp.add_row(RowSense::eq, 1.0);
  for (std::size_t col : e.z_cols) lp.set(simplex, col, 1.0);
  for (const auto* s : sc) {
    const std::size_t m = lp.add_variable(s->weight / p.epsilon, 0.0, kInf);
    const std::size_t r = lp.add_row(RowSense::ge, 0.0);
    lp.set(r, m, 1.0);
    lp.set(r, static_cast<std::size_t>(e.beta_col), 1.0);
    for (std::size_t j = 0; j < p.dy; ++j) {
      const double v = s->y(static_cast<Eigen::Index>(j));
      if (v != 0.0) lp.set(r, e.z_cols[j], v);
    }
  }
  return e;
}

EpigraphLp shipment_lp(const ShipmentProblem& p, const std::vector<const Scenario*>& sc) {
  EpigraphLp e;
  LinearProgram& lp = e.lp;
  double total = 0.0;
  for (const auto* s : sc) total += s->weight;
  for (std::size_t i = 0; i < p.dz(); ++i) e.z_cols.push_back(lp.add_variable(total * p.p1, 0.0, kInf));
  for (const auto* s : sc) {
    std::vector<std::size_t> demand_rows(p.dy()), cap_rows(p.dz());
    for (std::size_t j = 0; j < p.dy(); ++j) demand_rows[j] = lp.add_row(RowSense::ge, s->y(static_cast<Eigen::Index>(j)));
    for (std::size_t i = 0; i < p.dz(); ++i) {
      cap_rows[i] = lp.add_row(RowSense::le, 0.0);
      lp.set(cap_rows[i], e.z_cols[i], -1.0);
      const std::size_t t = lp.add_variable(s->weight * p.p2, 0.0, kInf);
      lp.set(cap_rows[i], t, -1.0);
    }
    for (std::size_t i = 0; i < p.dz(); ++i) {
      for (std::size_t j = 0; j < p.dy(); ++j) {
        const std::size_t v = lp.add_variable(
            s->weight * p.ship_cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 0.0, kInf);
        lp.set(demand_rows[j], v, 1.0);
        lp.set(cap_rows[i], v, 1.0);
      }
    }
  }
  return e;
}

EpigraphLp cap_newsvendor_lp(const CapacitatedNewsvendorProblem& p, const std::vector<const Scenario*>& sc) {
  EpigraphLp e;
  LinearProgram& lp = e.lp;
  for (std::size_t j = 0; j < p.d; ++j) e.z_cols.push_back(lp.add_variable(0.0, 0.0, kInf));
  const std::size_t budget = lp.add_row(RowSense::le, p.capacity);
  for (std::size_t col : e.z_cols) lp.set(budget, col, 1.0);
  for (const auto* s : sc) {
    for (std::size_t j = 0; j < p.d; ++j) {
      const std::size_t m = lp.add_variable(-s->weight, 0.0, s->y(static_cast<Eigen::Index>(j)));
      const std::size_t r = lp.add_row(RowSense::le, 0.0);
      lp.set(r, m, 1.0);
      lp.set(r, e.z_cols[j], -1.0);
    }
  }
  return e;
}

EpigraphLp newsvendor_lp(const NewsvendorSpec& p, const std::vector<const Scenario*>& sc) {
  EpigraphLp e;
  LinearProgram& lp = e.lp;
  e.z_cols.push_back(lp.add_variable(0.0, -kInf, kInf));
  for (const auto* s : sc) {
    const double y = s->y(0);
    const std::size_t th = lp.add_variable(s->weight, -kInf, kInf);
    const std::size_t over = lp.add_row(RowSense::ge, -(1.0 - p.tau) * y);
    lp.set(over, th, 1.0);
    lp.set(over, e.z_cols[0], -(1.0 - p.tau));
    const std::size_t under = lp.add_row(RowSense::ge, p.tau * y);
    lp.set(under, th, 1.0);
    lp.set(under, e.z_cols[0], p.tau);
  }
  return e;
}

}  // namespace

EpigraphLp lp_epigraph(const Problem& problem, const std::vector<Scenario>& scenarios) {
  validate_problem(problem);
  const auto sc = active_scenarios(scenarios, outcome_dim(problem));
  if (const auto* p = std::get_if<PortfolioProblem>(&problem)) return portfolio_lp(*p, sc);
  if (const auto* p = std::get_if<ShipmentProblem>(&problem)) return shipment_lp(*p, sc);
  if (const auto* p = std::get_if<CapacitatedNewsvendorProblem>(&problem)) return cap_newsvendor_lp(*p, sc);
  return newsvendor_lp(std::get<NewsvendorSpec>(problem), sc);
}

}  // namespace prescriptor
