#pragma once

#include "sensched/problem.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace sensched {

// Exact minimization of the weighted filter error over binary schedules.
// Branch-and-bound over the schedule entries; each node's lower bound is the
// closed-form optimum of the support-relaxed filter problem in which every
// undecided sensor is treated as available. Enlarging a filter's support
// never increases its optimal error, so the bound is valid, and at a fully
// assigned node it equals that schedule's objective exactly.

struct Node {
  // One entry per measurement index: -1 undecided, 0 fixed off, 1 fixed on.
  std::vector<std::int8_t> assignment;
  double lower_bound = 0.0;
  int depth = 0;

  static Node root(int m, int T);
  bool fully_assigned() const;
  std::vector<int> fixed_one() const;
  std::vector<int> fixed_zero() const;
};

enum class BranchingRule {
  MaxMarginal,  // branch on the undecided index whose removal raises the bound most
  LowestIndex,
};

enum class IncumbentHeuristic {
  GreedyCompletion,  // greedy completion at the root seeds the incumbent
  None,
};

struct SolverConfig {
  double gap_tolerance = 1e-6;  // relative, with an absolute floor of 1e-9
  std::optional<double> time_limit;        // seconds
  std::optional<std::int64_t> node_limit;  // explored-node cap
  BranchingRule branching = BranchingRule::MaxMarginal;
  IncumbentHeuristic incumbent_heuristic = IncumbentHeuristic::GreedyCompletion;
  // Best-first queue size beyond which children are diverted to a depth-first
  // stack to bound memory.
  std::size_t queue_cap = 1000000;
};

enum class SolveStatus {
  Optimal,
  Feasible,  // stopped on a time or node limit; gap reports the proven bound
  Infeasible,
};

const char* to_string(SolveStatus status);

struct SolveResult {
  std::optional<Schedule> incumbent;
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = std::numeric_limits<double>::infinity();
  double gap = 0.0;  // (objective - lower_bound) / max(|objective|, 1e-12)
  SolveStatus status = SolveStatus::Infeasible;
  std::int64_t nodes_explored = 0;
  double wall_time = 0.0;  // seconds
  // Optimal filter coefficients realizing the incumbent objective, one per
  // step; their cost_c values sum to `objective`.
  std::vector<FilterCoefficients> coefficients;
};

enum class NodeAction {
  Branch,
  PruneBound,
  PruneInfeasible,
  Incumbent,
};

const char* to_string(NodeAction action);

// Per-node search record. The CSV emitter writes the five documented columns
// (node id, parent id, depth, bound, action); the extra fields support
// in-process audits of bound validity and the anytime contract.
struct NodeTraceRecord {
  std::int64_t id = 0;
  std::int64_t parent = -1;
  int depth = 0;
  double bound = 0.0;
  NodeAction action = NodeAction::Branch;
  double incumbent_objective = std::numeric_limits<double>::infinity();
  double global_lower_bound = -std::numeric_limits<double>::infinity();
  std::vector<std::int8_t> assignment;
};

using TraceSink = std::function<void(const NodeTraceRecord&)>;

void write_trace_csv_header(std::ostream& out);
void write_trace_csv_row(std::ostream& out, const NodeTraceRecord& record);

// Bound of the relaxation at `node`: sum over steps of the restricted error
// with support = all measurements not fixed to zero.
double node_lower_bound(const CovarianceCache& cache, const std::vector<CostMatrix>& costs,
                        const Node& node);

// Picks the next index to branch on among the undecided entries.
int branch_variable(const Node& node, const CovarianceCache& cache,
                    const std::vector<CostMatrix>& costs, const SolverConfig& config);

// Greedy completion of a partial assignment: repeatedly adds the feasible
// activation with the largest error reduction (whole sensors at once when a
// selection constraint ties steps together), then keeps adding to satisfy
// exact-cardinality constraints. Returns nullopt when no feasible completion
// is found.
std::optional<Schedule> greedy_completion(const Node& node, const ScheduleProblem& problem,
                                          const CovarianceCache& cache);

SolveResult solve(const ScheduleProblem& problem, const SolverConfig& config = {},
                  const TraceSink& trace = {});

}  // namespace sensched
