#include "sensched/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace sensched {

namespace {

// Next size-p subset of [0, m) in lexicographic order; false when exhausted.
bool next_combination(std::vector<int>& comb, int m) {
  const int p = static_cast<int>(comb.size());
  int i = p - 1;
  while (i >= 0 && comb[i] == m - p + i) --i;
  if (i < 0) return false;
  ++comb[i];
  for (int j = i + 1; j < p; ++j) comb[j] = comb[j - 1] + 1;
  return true;
}

std::vector<int> first_combination(int p) {
  std::vector<int> comb(p);
  for (int i = 0; i < p; ++i) comb[i] = i;
  return comb;
}

void push_checked(std::vector<Schedule>& out, Schedule schedule, const ConstraintSystem& cs,
                  std::int64_t cap) {
  if (!is_feasible(cs, schedule)) return;
  if (static_cast<std::int64_t>(out.size()) >= cap)
    throw std::runtime_error("enumerate_feasible: more than " + std::to_string(cap) +
                             " feasible schedules");
  out.push_back(std::move(schedule));
}

// Depth-first enumeration over the raw 0/1 entries, pruning prefixes that
// cannot extend to a feasible schedule.
void enumerate_dfs(const ConstraintSystem& cs, int m, int T, std::vector<std::int8_t>& a,
                   int index, std::int64_t cap, std::vector<Schedule>& out) {
  if (!partial_feasible(cs, m, T, a)) return;
  if (index == m * T) {
    Schedule s = Schedule::zeros(m, T);
    for (int i = 0; i < m * T; ++i) s.gamma[i] = a[i] == 1 ? 1 : 0;
    push_checked(out, std::move(s), cs, cap);
    return;
  }
  for (const std::int8_t value : {std::int8_t{0}, std::int8_t{1}}) {
    a[index] = value;
    enumerate_dfs(cs, m, T, a, index + 1, cap, out);
  }
  a[index] = -1;
}

// True when the minimizer should switch to `candidate`: strictly lower
// objective, or an exact tie resolved toward the lowest-index support.
bool better_schedule(double cand_obj, const Schedule& cand, double best_obj,
                     const Schedule& best) {
  if (cand_obj < best_obj) return true;
  if (cand_obj > best_obj) return false;
  const auto sa = cand.support();
  const auto sb = best.support();
  return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
}

}  // namespace

std::pair<Schedule, double> greedy(const ScheduleProblem& problem) {
  validate_problem(problem);
  if (problem.constraints.structured.empty())
    throw std::invalid_argument("greedy: structured constraints required");
  if (problem.constraints.raw)
    throw std::invalid_argument("greedy: raw constraints are not supported");

  const CovarianceCache cache = build_cache(problem.params, problem.T);
  const Node root = Node::root(problem.params.m, problem.T);
  auto schedule = greedy_completion(root, problem, cache);
  if (!schedule) throw std::runtime_error("greedy: no feasible schedule exists");
  return {*schedule, schedule_objective(cache, problem.costs, *schedule)};
}

std::vector<Schedule> enumerate_feasible(const ConstraintSystem& cs, int m, int T,
                                         std::int64_t cap) {
  if (cap < 1) throw std::invalid_argument("enumerate_feasible: cap must be positive");
  std::vector<Schedule> out;

  const SelectionConstraint* selection = nullptr;
  const PerStepBudgetConstraint* per_step = nullptr;
  for (const auto& c : cs.structured) {
    if (const auto* sel = std::get_if<SelectionConstraint>(&c)) {
      if (!selection) selection = sel;
    } else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c)) {
      if (!per_step) per_step = psb;
    }
  }

  if (selection && !per_step) {
    // C(m, p) tied candidates; is_feasible filters any extra constraints.
    if (selection->p > m) return out;
    if (selection->p == 0) {
      push_checked(out, Schedule::zeros(m, T), cs, cap);
      return out;
    }
    std::vector<int> comb = first_combination(selection->p);
    do {
      Schedule s = Schedule::zeros(m, T);
      for (int k = 0; k < T; ++k)
        for (int i : comb) s.gamma[k * m + i] = 1;
      push_checked(out, std::move(s), cs, cap);
    } while (next_combination(comb, m));
    return out;
  }

  if (per_step && !selection) {
    // Product over steps of per-step subsets (sizes <= p when at_most).
    std::vector<std::vector<std::vector<int>>> step_choices(T);
    const int p_low = per_step->at_most ? 0 : per_step->p;
    for (int k = 0; k < T; ++k) {
      for (int p = p_low; p <= std::min(per_step->p, m); ++p) {
        if (p == 0) {
          step_choices[k].push_back({});
          continue;
        }
        std::vector<int> comb = first_combination(p);
        do {
          step_choices[k].push_back(comb);
        } while (next_combination(comb, m));
      }
      if (step_choices[k].empty()) return out;  // p > m with an exact budget
    }
    std::vector<std::size_t> pick(T, 0);
    while (true) {
      Schedule s = Schedule::zeros(m, T);
      for (int k = 0; k < T; ++k)
        for (int i : step_choices[k][pick[k]]) s.gamma[k * m + i] = 1;
      push_checked(out, std::move(s), cs, cap);
      int k = T - 1;
      while (k >= 0 && ++pick[k] == step_choices[k].size()) pick[k--] = 0;
      if (k < 0) break;
    }
    return out;
  }

  std::vector<std::int8_t> a(static_cast<std::size_t>(m) * T, -1);
  enumerate_dfs(cs, m, T, a, 0, cap, out);
  return out;
}

std::pair<Schedule, double> brute_force(const ScheduleProblem& problem,
                                        std::int64_t enumeration_cap) {
  validate_problem(problem);
  const auto feasible =
      enumerate_feasible(problem.constraints, problem.params.m, problem.T, enumeration_cap);
  if (feasible.empty()) throw std::runtime_error("brute_force: no feasible schedule exists");

  const CovarianceCache cache = build_cache(problem.params, problem.T);
  Schedule best = feasible.front();
  double best_obj = schedule_objective(cache, problem.costs, best);
  for (std::size_t i = 1; i < feasible.size(); ++i) {
    const double obj = schedule_objective(cache, problem.costs, feasible[i]);
    if (better_schedule(obj, feasible[i], best_obj, best)) {
      best = feasible[i];
      best_obj = obj;
    }
  }
  return {best, best_obj};
}

}  // namespace sensched
