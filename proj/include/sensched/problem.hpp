#pragma once

#include "sensched/estimator.hpp"
#include "sensched/system.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace sensched {

// Binary sensor schedule over m sensors and T steps. Entry k*m + j is sensor
// j at step k (0-based everywhere).
struct Schedule {
  std::vector<std::uint8_t> gamma;
  int m = 0;
  int T = 0;

  static Schedule zeros(int m, int T);

  int size() const { return m * T; }
  bool active(int k, int j) const { return gamma[static_cast<std::size_t>(k) * m + j] != 0; }
  std::vector<int> support() const;
  // Support restricted to the measurements available at step k, i.e. indices
  // below m*(k+1).
  std::vector<int> support_up_to(int k) const;
};

bool operator==(const Schedule& a, const Schedule& b);

// One sensor subset of size p, held for all steps.
struct SelectionConstraint {
  int p = 0;
};

// Per-step subset of size p (exactly p by default, at most p when at_most).
struct PerStepBudgetConstraint {
  int p = 0;
  bool at_most = false;
};

// Sensor `sensor` may be active at most `limit` times over the horizon.
struct EnergyBudgetConstraint {
  int sensor = 0;
  double limit = 0.0;
};

using StructuredConstraint =
    std::variant<SelectionConstraint, PerStepBudgetConstraint, EnergyBudgetConstraint>;

struct RawConstraints {
  Eigen::MatrixXd H;  // h x mT
  Eigen::VectorXd b;  // h
};

struct ConstraintSystem {
  std::vector<StructuredConstraint> structured;
  std::optional<RawConstraints> raw;
};

struct ScheduleProblem {
  SystemParams params;
  int T = 0;
  std::vector<CostMatrix> costs;  // one per step
  ConstraintSystem constraints;
};

// Expands every structured constraint into rows of H gamma <= b (equalities
// as inequality pairs) and appends the raw rows verbatim.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> materialize(const ConstraintSystem& cs, int m,
                                                        int T);

bool is_feasible(const ConstraintSystem& cs, const Schedule& schedule);

// Sound pruning check for a partial assignment (-1 undecided / 0 / 1):
// returns false only when no completion can be feasible. Exact for the
// structured families; raw rows are checked against each variable's most
// favorable completion.
bool partial_feasible(const ConstraintSystem& cs, int m, int T,
                      const std::vector<std::int8_t>& assignment);
bool partial_feasible(const ConstraintSystem& cs, int m, int T, std::span<const int> fixed_one,
                      std::span<const int> fixed_zero);

// Cost presets.
std::vector<CostMatrix> final_state_costs(int n, int T);
std::vector<CostMatrix> total_error_costs(int n, int T, std::span<const double> theta = {});
// trace(Theta Sigma_{k|k}) objective for every step; Theta must be symmetric
// PSD and is factorized by eigendecomposition.
std::vector<CostMatrix> objective_weight_lqg(const Eigen::MatrixXd& theta, int T);

void validate_problem(const ScheduleProblem& problem);

// Problem file:
//   {"instance": <object or path>, "T": int,
//    "objective": "final_state" | "total_error"
//                 | {"type":"total_error","theta":[...]}
//                 | {"type":"lqg","Theta":[[...]]}
//                 | {"type":"explicit","Q":[[[...]],...]},
//    "constraints": [{"type":"selection","p":...}
//                    | {"type":"per_step_budget","p":...,"at_most":bool}
//                    | {"type":"energy_budget","sensor":...,"limit":...}
//                    | {"type":"raw","H":[[...]],"b":[...]}]}
// Relative instance paths resolve against base_dir.
ScheduleProblem problem_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ScheduleProblem load_problem(const std::string& path);
nlohmann::json problem_to_json(const ScheduleProblem& problem);

}  // namespace sensched
