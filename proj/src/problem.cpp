#include "sensched/problem.hpp"

#include "sensched/json_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sensched {

namespace {

constexpr double kFeasTol = 1e-9;

int energy_cap(double limit) {
  // count <= limit with integer counts
  return static_cast<int>(std::floor(limit + kFeasTol));
}

void check_assignment_size(int m, int T, std::size_t size, const char* what) {
  if (size != static_cast<std::size_t>(m) * T)
    throw std::invalid_argument(std::string(what) + ": assignment length mismatch");
}

}  // namespace

Schedule Schedule::zeros(int m, int T) {
  Schedule s;
  s.m = m;
  s.T = T;
  s.gamma.assign(static_cast<std::size_t>(m) * T, 0);
  return s;
}

std::vector<int> Schedule::support() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (gamma[i]) out.push_back(i);
  return out;
}

std::vector<int> Schedule::support_up_to(int k) const {
  std::vector<int> out;
  const int limit = m * (k + 1);
  for (int i = 0; i < limit; ++i)
    if (gamma[i]) out.push_back(i);
  return out;
}

bool operator==(const Schedule& a, const Schedule& b) {
  return a.m == b.m && a.T == b.T && a.gamma == b.gamma;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> materialize(const ConstraintSystem& cs, int m, int T) {
  const int mT = m * T;
  int rows = 0;
  for (const auto& c : cs.structured) {
    if (std::holds_alternative<SelectionConstraint>(c))
      rows += 2 + 2 * m * (T - 1);
    else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c))
      rows += psb->at_most ? T : 2 * T;
    else
      rows += 1;
  }
  if (cs.raw) rows += static_cast<int>(cs.raw->H.rows());

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(rows, mT);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  int r = 0;

  for (const auto& c : cs.structured) {
    if (const auto* sel = std::get_if<SelectionConstraint>(&c)) {
      // sum of first-step sensors == p, as an inequality pair
      for (int i = 0; i < m; ++i) H(r, i) = 1.0;
      b(r++) = sel->p;
      for (int i = 0; i < m; ++i) H(r, i) = -1.0;
      b(r++) = -sel->p;
      // gamma_i == gamma_{i + j*m}, pairs per sensor and later step
      for (int i = 0; i < m; ++i)
        for (int j = 1; j < T; ++j) {
          H(r, i) = 1.0;
          H(r, i + j * m) = -1.0;
          b(r++) = 0.0;
          H(r, i) = -1.0;
          H(r, i + j * m) = 1.0;
          b(r++) = 0.0;
        }
    } else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c)) {
      for (int k = 0; k < T; ++k) {
        for (int i = 0; i < m; ++i) H(r, k * m + i) = 1.0;
        b(r++) = psb->p;
        if (!psb->at_most) {
          for (int i = 0; i < m; ++i) H(r, k * m + i) = -1.0;
          b(r++) = -psb->p;
        }
      }
    } else {
      const auto& en = std::get<EnergyBudgetConstraint>(c);
      for (int k = 0; k < T; ++k) H(r, k * m + en.sensor) = 1.0;
      b(r++) = en.limit;
    }
  }
  if (cs.raw) {
    H.bottomRows(cs.raw->H.rows()) = cs.raw->H;
    b.tail(cs.raw->b.size()) = cs.raw->b;
  }
  return {std::move(H), std::move(b)};
}

bool is_feasible(const ConstraintSystem& cs, const Schedule& schedule) {
  const int m = schedule.m;
  const int T = schedule.T;
  if (static_cast<int>(schedule.gamma.size()) != m * T)
    throw std::invalid_argument("is_feasible: schedule length mismatch");

  for (const auto& c : cs.structured) {
    if (const auto* sel = std::get_if<SelectionConstraint>(&c)) {
      int first = 0;
      for (int i = 0; i < m; ++i) first += schedule.gamma[i];
      if (first != sel->p) return false;
      for (int i = 0; i < m; ++i)
        for (int k = 1; k < T; ++k)
          if (schedule.gamma[k * m + i] != schedule.gamma[i]) return false;
    } else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c)) {
      for (int k = 0; k < T; ++k) {
        int count = 0;
        for (int i = 0; i < m; ++i) count += schedule.gamma[k * m + i];
        if (psb->at_most ? (count > psb->p) : (count != psb->p)) return false;
      }
    } else {
      const auto& en = std::get<EnergyBudgetConstraint>(c);
      if (en.sensor < 0 || en.sensor >= m)
        throw std::invalid_argument("is_feasible: energy constraint sensor out of range");
      int count = 0;
      for (int k = 0; k < T; ++k) count += schedule.gamma[k * m + en.sensor];
      if (count > energy_cap(en.limit)) return false;
    }
  }

  if (cs.raw) {
    if (cs.raw->H.cols() != m * T)
      throw std::invalid_argument("is_feasible: raw constraint width mismatch");
    Eigen::VectorXd g(m * T);
    for (int i = 0; i < m * T; ++i) g(i) = schedule.gamma[i];
    Eigen::VectorXd lhs = cs.raw->H * g;
    for (Eigen::Index r = 0; r < lhs.size(); ++r)
      if (lhs(r) > cs.raw->b(r) + kFeasTol) return false;
  }
  return true;
}

bool partial_feasible(const ConstraintSystem& cs, int m, int T,
                      const std::vector<std::int8_t>& assignment) {
  check_assignment_size(m, T, assignment.size(), "partial_feasible");

  for (const auto& c : cs.structured) {
    if (const auto* sel = std::get_if<SelectionConstraint>(&c)) {
      // Tying collapses each sensor to on / off / undecided; a sensor seen
      // both on and off at different steps has no feasible completion.
      int forced_on = 0;
      int forced_off = 0;
      for (int i = 0; i < m; ++i) {
        bool on = false;
        bool off = false;
        for (int k = 0; k < T; ++k) {
          const std::int8_t v = assignment[k * m + i];
          on = on || v == 1;
          off = off || v == 0;
        }
        if (on && off) return false;
        forced_on += on ? 1 : 0;
        forced_off += off ? 1 : 0;
      }
      if (forced_on > sel->p) return false;
      if (m - forced_off < sel->p) return false;
    } else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c)) {
      for (int k = 0; k < T; ++k) {
        int ones = 0;
        int undecided = 0;
        for (int i = 0; i < m; ++i) {
          const std::int8_t v = assignment[k * m + i];
          ones += v == 1 ? 1 : 0;
          undecided += v == -1 ? 1 : 0;
        }
        if (ones > psb->p) return false;
        if (!psb->at_most && ones + undecided < psb->p) return false;
      }
    } else {
      const auto& en = std::get<EnergyBudgetConstraint>(c);
      int ones = 0;
      for (int k = 0; k < T; ++k) ones += assignment[k * m + en.sensor] == 1 ? 1 : 0;
      if (ones > energy_cap(en.limit)) return false;
    }
  }

  if (cs.raw) {
    if (cs.raw->H.cols() != m * T)
      throw std::invalid_argument("partial_feasible: raw constraint width mismatch");
    // Most favorable completion per row: undecided variables contribute the
    // coefficient's minimum of {0, h}.
    for (Eigen::Index r = 0; r < cs.raw->H.rows(); ++r) {
      double lhs = 0.0;
      for (int i = 0; i < m * T; ++i) {
        const double h = cs.raw->H(r, i);
        if (assignment[i] == 1)
          lhs += h;
        else if (assignment[i] == -1)
          lhs += std::min(0.0, h);
      }
      if (lhs > cs.raw->b(r) + kFeasTol) return false;
    }
  }
  return true;
}

bool partial_feasible(const ConstraintSystem& cs, int m, int T, std::span<const int> fixed_one,
                      std::span<const int> fixed_zero) {
  std::vector<std::int8_t> assignment(static_cast<std::size_t>(m) * T, -1);
  for (int i : fixed_one) {
    if (i < 0 || i >= m * T) throw std::out_of_range("partial_feasible: index out of range");
    assignment[i] = 1;
  }
  for (int i : fixed_zero) {
    if (i < 0 || i >= m * T) throw std::out_of_range("partial_feasible: index out of range");
    if (assignment[i] == 1)
      throw std::invalid_argument("partial_feasible: fixed_one and fixed_zero overlap");
    assignment[i] = 0;
  }
  return partial_feasible(cs, m, T, assignment);
}

std::vector<CostMatrix> final_state_costs(int n, int T) {
  std::vector<CostMatrix> costs;
  costs.reserve(T);
  for (int k = 0; k < T; ++k) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    if (k == T - 1) Q = Eigen::MatrixXd::Identity(n, n);
    costs.push_back(make_cost(k, std::move(Q)));
  }
  return costs;
}

std::vector<CostMatrix> total_error_costs(int n, int T, std::span<const double> theta) {
  if (!theta.empty() && static_cast<int>(theta.size()) != T)
    throw std::invalid_argument("total_error_costs: need one weight per step");
  std::vector<CostMatrix> costs;
  costs.reserve(T);
  for (int k = 0; k < T; ++k) {
    const double w = theta.empty() ? 1.0 : theta[k];
    if (w < 0.0) throw std::invalid_argument("total_error_costs: weights must be nonnegative");
    costs.push_back(make_cost(k, w * Eigen::MatrixXd::Identity(n, n)));
  }
  return costs;
}

std::vector<CostMatrix> objective_weight_lqg(const Eigen::MatrixXd& theta, int T) {
  if (theta.rows() != theta.cols())
    throw std::invalid_argument("objective_weight_lqg: Theta must be square");
  if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("objective_weight_lqg: Theta must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (theta + theta.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("objective_weight_lqg: Theta must be positive semidefinite");

  // Q = sqrt(clamped eigenvalues) * U', so Q'Q reproduces Theta.
  Eigen::VectorXd sqrt_eig = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd Q = sqrt_eig.asDiagonal() * es.eigenvectors().transpose();

  std::vector<CostMatrix> costs;
  costs.reserve(T);
  for (int k = 0; k < T; ++k) costs.push_back(make_cost(k, Q));
  return costs;
}

void validate_problem(const ScheduleProblem& problem) {
  const auto violations = validate(problem.params);
  if (!violations.empty())
    throw std::invalid_argument("problem: invalid system parameters: " + violations.front());
  if (problem.T < 1) throw std::invalid_argument("problem: horizon must be at least 1");
  if (static_cast<int>(problem.costs.size()) != problem.T)
    throw std::invalid_argument("problem: need exactly T cost matrices");
  for (int k = 0; k < problem.T; ++k) {
    if (problem.costs[k].k != k)
      throw std::invalid_argument("problem: cost matrices must be ordered by step");
    if (problem.costs[k].M.rows() != problem.params.n ||
        problem.costs[k].M.cols() != problem.params.n)
      throw std::invalid_argument("problem: cost matrix dimension mismatch");
  }
  for (const auto& c : problem.constraints.structured) {
    if (const auto* sel = std::get_if<SelectionConstraint>(&c)) {
      if (sel->p < 0) throw std::invalid_argument("problem: selection budget must be nonnegative");
    } else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c)) {
      if (psb->p < 0) throw std::invalid_argument("problem: per-step budget must be nonnegative");
    } else {
      const auto& en = std::get<EnergyBudgetConstraint>(c);
      if (en.sensor < 0 || en.sensor >= problem.params.m)
        throw std::invalid_argument("problem: energy constraint sensor out of range");
      if (en.limit < 0.0) throw std::invalid_argument("problem: energy limit must be nonnegative");
    }
  }
  if (problem.constraints.raw) {
    const auto& raw = *problem.constraints.raw;
    if (raw.H.cols() != problem.params.m * problem.T)
      throw std::invalid_argument("problem: raw constraint width mismatch");
    if (raw.b.size() != raw.H.rows())
      throw std::invalid_argument("problem: raw constraint rows and budget length differ");
  }
}

namespace {

std::vector<CostMatrix> costs_from_json(const nlohmann::json& j, int n, int T) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "final_state") return final_state_costs(n, T);
    if (name == "total_error") return total_error_costs(n, T);
    throw std::invalid_argument("objective: unknown preset '" + name + "'");
  }
  if (!j.is_object()) throw std::invalid_argument("objective: expected preset name or object");
  const std::string type = j.at("type").get<std::string>();
  if (type == "final_state") return final_state_costs(n, T);
  if (type == "total_error") {
    if (!j.contains("theta")) return total_error_costs(n, T);
    std::vector<double> theta = j.at("theta").get<std::vector<double>>();
    return total_error_costs(n, T, theta);
  }
  if (type == "lqg") return objective_weight_lqg(matrix_from_json(j.at("Theta"), "Theta", n, n), T);
  if (type == "explicit") {
    const auto& qs = j.at("Q");
    if (!qs.is_array() || static_cast<int>(qs.size()) != T)
      throw std::invalid_argument("objective: explicit Q needs one matrix per step");
    std::vector<CostMatrix> costs;
    for (int k = 0; k < T; ++k)
      costs.push_back(make_cost(k, matrix_from_json(qs[k], "Q[" + std::to_string(k) + "]", -1, n)));
    return costs;
  }
  throw std::invalid_argument("objective: unknown type '" + type + "'");
}

ConstraintSystem constraints_from_json(const nlohmann::json& j, int m, int T) {
  ConstraintSystem cs;
  if (j.is_null()) return cs;
  if (!j.is_array()) throw std::invalid_argument("constraints: expected a list");
  for (const auto& c : j) {
    const std::string type = c.at("type").get<std::string>();
    if (type == "selection") {
      cs.structured.push_back(SelectionConstraint{c.at("p").get<int>()});
    } else if (type == "per_step_budget") {
      PerStepBudgetConstraint psb;
      psb.p = c.at("p").get<int>();
      if (c.contains("at_most")) psb.at_most = c.at("at_most").get<bool>();
      cs.structured.push_back(psb);
    } else if (type == "energy_budget") {
      EnergyBudgetConstraint en;
      en.sensor = c.at("sensor").get<int>();
      en.limit = c.at("limit").get<double>();
      cs.structured.push_back(en);
    } else if (type == "raw") {
      if (cs.raw) throw std::invalid_argument("constraints: at most one raw block");
      RawConstraints raw;
      raw.H = matrix_from_json(c.at("H"), "H", -1, m * T);
      raw.b = vector_from_json(c.at("b"), "b", static_cast<int>(raw.H.rows()));
      cs.raw = std::move(raw);
    } else {
      throw std::invalid_argument("constraints: unknown type '" + type + "'");
    }
  }
  return cs;
}

}  // namespace

ScheduleProblem problem_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ScheduleProblem problem;
  const auto& inst = j.at("instance");
  if (inst.is_string()) {
    std::filesystem::path p = inst.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    problem.params = load_instance(p.string()).params;
  } else {
    problem.params = instance_from_json(inst).params;
  }
  problem.T = j.at("T").get<int>();
  if (problem.T < 1) throw std::invalid_argument("problem: horizon must be at least 1");
  problem.costs = costs_from_json(j.at("objective"), problem.params.n, problem.T);
  problem.constraints = constraints_from_json(j.contains("constraints") ? j.at("constraints")
                                                                        : nlohmann::json(),
                                              problem.params.m, problem.T);
  validate_problem(problem);
  return problem;
}

ScheduleProblem load_problem(const std::string& path) {
  const std::filesystem::path p(path);
  return problem_from_json(load_json_file(p), p.parent_path());
}

nlohmann::json problem_to_json(const ScheduleProblem& problem) {
  nlohmann::json j;
  j["instance"] = instance_to_json(InstanceFile{problem.params, std::nullopt});
  j["T"] = problem.T;
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& cost : problem.costs) qs.push_back(matrix_to_json(cost.Q));
  j["objective"] = {{"type", "explicit"}, {"Q", std::move(qs)}};
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : problem.constraints.structured) {
    if (const auto* sel = std::get_if<SelectionConstraint>(&c))
      cons.push_back({{"type", "selection"}, {"p", sel->p}});
    else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c))
      cons.push_back({{"type", "per_step_budget"}, {"p", psb->p}, {"at_most", psb->at_most}});
    else {
      const auto& en = std::get<EnergyBudgetConstraint>(c);
      cons.push_back({{"type", "energy_budget"}, {"sensor", en.sensor}, {"limit", en.limit}});
    }
  }
  if (problem.constraints.raw)
    cons.push_back({{"type", "raw"},
                    {"H", matrix_to_json(problem.constraints.raw->H)},
                    {"b", vector_to_json(problem.constraints.raw->b)}});
  j["constraints"] = std::move(cons);
  return j;
}

}  // namespace sensched
