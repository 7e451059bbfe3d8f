#pragma once

#include "sensched/solver.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace sensched {

// Greedy baseline: from the empty schedule, keep adding the activation with
// the highest error reduction (whole sensors under selection tying) while
// the structured constraints admit it. Requires structured constraints;
// throws std::invalid_argument when only raw rows are given.
std::pair<Schedule, double> greedy(const ScheduleProblem& problem);

// Every feasible schedule of the constraint system, enumerated
// combinatorially (subsets for selection, per-step subset products for
// per-step budgets, pruned depth-first search otherwise). Throws
// std::runtime_error once more than `cap` schedules exist.
std::vector<Schedule> enumerate_feasible(const ConstraintSystem& cs, int m, int T,
                                         std::int64_t cap);

// Ground-truth oracle: evaluates the exact objective of every feasible
// schedule and returns the minimizer, breaking ties toward the support with
// the lowest indices.
std::pair<Schedule, double> brute_force(const ScheduleProblem& problem,
                                        std::int64_t enumeration_cap);

}  // namespace sensched
