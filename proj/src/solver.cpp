#include "sensched/solver.hpp"

#include "sensched/json_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace sensched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Mask = std::vector<std::uint64_t>;

struct MaskHash {
  std::size_t operator()(const Mask& mask) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (std::uint64_t w : mask) {
      h ^= static_cast<std::size_t>(w);
      h *= 1099511628211ull;
    }
    return h;
  }
};

// Per-step restricted errors keyed by support bitmask, so sibling nodes and
// repeated greedy evaluations reuse one factorization per distinct support.
class BoundMemo {
 public:
  BoundMemo(const CovarianceCache& cache, const std::vector<CostMatrix>& costs)
      : cache_(cache), costs_(costs), memo_(cache.T) {}

  int steps() const { return cache_.T; }
  int meas_count(int k) const { return cache_.meas_count(k); }

  double step_error(int k, const Mask& mask) {
    auto& table = memo_[k];
    auto it = table.find(mask);
    if (it != table.end()) return it->second;
    std::vector<int> S;
    const int mk = cache_.meas_count(k);
    for (int i = 0; i < mk; ++i)
      if (mask[i >> 6] & (1ull << (i & 63))) S.push_back(i);
    const double value = restricted_error(cache_, costs_[k], k, S);
    table.emplace(mask, value);
    return value;
  }

  // Bound mask: every index not fixed to zero counts as available.
  Mask allowed_mask(int k, const std::vector<std::int8_t>& assignment) const {
    return make_mask(k, assignment, [](std::int8_t v) { return v != 0; });
  }

  // Objective mask: only indices fixed to one count.
  Mask support_mask(int k, const std::vector<std::int8_t>& assignment) const {
    return make_mask(k, assignment, [](std::int8_t v) { return v == 1; });
  }

  double relaxation_bound(const std::vector<std::int8_t>& assignment) {
    double total = 0.0;
    for (int k = 0; k < cache_.T; ++k) total += step_error(k, allowed_mask(k, assignment));
    return total;
  }

  double support_objective(const std::vector<std::int8_t>& assignment) {
    double total = 0.0;
    for (int k = 0; k < cache_.T; ++k) total += step_error(k, support_mask(k, assignment));
    return total;
  }

 private:
  template <class Pred>
  Mask make_mask(int k, const std::vector<std::int8_t>& assignment, Pred pred) const {
    const int mk = cache_.meas_count(k);
    Mask mask(static_cast<std::size_t>(mk + 63) / 64, 0);
    for (int i = 0; i < mk; ++i)
      if (pred(assignment[i])) mask[i >> 6] |= 1ull << (i & 63);
    return mask;
  }

  const CovarianceCache& cache_;
  const std::vector<CostMatrix>& costs_;
  std::vector<std::unordered_map<Mask, double, MaskHash>> memo_;
};

// Fixes values forced by the structured constraints (selection tying,
// cardinality fills, exhausted energy budgets). Returns false when the
// assignment provably has no feasible completion.
bool propagate(const ConstraintSystem& cs, int m, int T, std::vector<std::int8_t>& a) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : cs.structured) {
      if (const auto* sel = std::get_if<SelectionConstraint>(&c)) {
        for (int i = 0; i < m; ++i) {
          bool on = false;
          bool off = false;
          for (int k = 0; k < T; ++k) {
            const std::int8_t v = a[k * m + i];
            on = on || v == 1;
            off = off || v == 0;
          }
          if (on && off) return false;
          if (on || off) {
            const std::int8_t value = on ? 1 : 0;
            for (int k = 0; k < T; ++k) {
              if (a[k * m + i] == -1) {
                a[k * m + i] = value;
                changed = true;
              }
            }
          }
        }
        // After tying, entry i of step 0 carries the sensor's status.
        int n_on = 0;
        int n_off = 0;
        for (int i = 0; i < m; ++i) {
          n_on += a[i] == 1 ? 1 : 0;
          n_off += a[i] == 0 ? 1 : 0;
        }
        const int n_undecided = m - n_on - n_off;
        if (n_on > sel->p) return false;
        if (m - n_off < sel->p) return false;
        if (n_undecided > 0 && (n_on == sel->p || n_on + n_undecided == sel->p)) {
          const std::int8_t value = n_on == sel->p ? 0 : 1;
          for (int i = 0; i < m; ++i)
            if (a[i] == -1)
              for (int k = 0; k < T; ++k) a[k * m + i] = value;
          changed = true;
        }
      } else if (const auto* psb = std::get_if<PerStepBudgetConstraint>(&c)) {
        for (int k = 0; k < T; ++k) {
          int ones = 0;
          int undecided = 0;
          for (int i = 0; i < m; ++i) {
            const std::int8_t v = a[k * m + i];
            ones += v == 1 ? 1 : 0;
            undecided += v == -1 ? 1 : 0;
          }
          if (ones > psb->p) return false;
          if (!psb->at_most && ones + undecided < psb->p) return false;
          std::int8_t fill = -1;
          if (ones == psb->p)
            fill = 0;
          else if (!psb->at_most && ones + undecided == psb->p)
            fill = 1;
          if (fill != -1 && undecided > 0) {
            for (int i = 0; i < m; ++i)
              if (a[k * m + i] == -1) a[k * m + i] = fill;
            changed = true;
          }
        }
      } else {
        const auto& en = std::get<EnergyBudgetConstraint>(c);
        const int cap = static_cast<int>(std::floor(en.limit + 1e-9));
        int ones = 0;
        bool any_undecided = false;
        for (int k = 0; k < T; ++k) {
          const std::int8_t v = a[k * m + en.sensor];
          ones += v == 1 ? 1 : 0;
          any_undecided = any_undecided || v == -1;
        }
        if (ones > cap) return false;
        if (ones == cap && any_undecided) {
          for (int k = 0; k < T; ++k)
            if (a[k * m + en.sensor] == -1) a[k * m + en.sensor] = 0;
          changed = true;
        }
      }
    }
  }
  return true;
}

bool fully_assigned(const std::vector<std::int8_t>& a) {
  return std::none_of(a.begin(), a.end(), [](std::int8_t v) { return v == -1; });
}

Schedule to_schedule(const std::vector<std::int8_t>& a, int m, int T) {
  Schedule s = Schedule::zeros(m, T);
  for (int i = 0; i < m * T; ++i) s.gamma[i] = a[i] == 1 ? 1 : 0;
  return s;
}

int lowest_undecided(const std::vector<std::int8_t>& a) {
  for (int i = 0; i < static_cast<int>(a.size()); ++i)
    if (a[i] == -1) return i;
  return -1;
}

// Undecided index whose removal from the relaxation raises the bound most;
// ties fall to the lowest index.
int pick_max_marginal(BoundMemo& memo, const std::vector<std::int8_t>& a, int m) {
  const int T = memo.steps();
  std::vector<Mask> allowed(T);
  std::vector<double> base(T);
  for (int k = 0; k < T; ++k) {
    allowed[k] = memo.allowed_mask(k, a);
    base[k] = memo.step_error(k, allowed[k]);
  }
  int best = -1;
  double best_delta = -kInf;
  for (int j = 0; j < static_cast<int>(a.size()); ++j) {
    if (a[j] != -1) continue;
    const int kj = j / m;
    double delta = 0.0;
    for (int k = kj; k < T; ++k) {
      Mask mask = allowed[k];
      mask[j >> 6] &= ~(1ull << (j & 63));
      delta += memo.step_error(k, mask) - base[k];
    }
    if (best == -1 || delta > best_delta) {
      best = j;
      best_delta = delta;
    }
  }
  return best;
}

std::optional<Schedule> greedy_impl(BoundMemo& memo, const Node& start,
                                    const ScheduleProblem& problem) {
  const int m = problem.params.m;
  const int T = problem.T;
  const ConstraintSystem& cs = problem.constraints;
  std::vector<std::int8_t> a = start.assignment;
  if (static_cast<int>(a.size()) != m * T)
    throw std::invalid_argument("greedy_completion: node size mismatch");
  if (!partial_feasible(cs, m, T, a)) return std::nullopt;

  const bool tied = std::any_of(cs.structured.begin(), cs.structured.end(), [](const auto& c) {
    return std::holds_alternative<SelectionConstraint>(c);
  });

  while (true) {
    const Schedule completed = to_schedule(a, m, T);
    const bool feasible_now = is_feasible(cs, completed);
    const double current = memo.support_objective(a);

    // Candidate additions: whole sensors when selection ties the steps,
    // single activations otherwise. Additions that break partial
    // feasibility are skipped.
    double best_reduction = -kInf;
    std::vector<int> best_indices;
    auto consider = [&](const std::vector<int>& indices) {
      std::vector<std::int8_t> trial = a;
      for (int q : indices) trial[q] = 1;
      if (!partial_feasible(cs, m, T, trial)) return;
      const double reduction = current - memo.support_objective(trial);
      if (best_indices.empty() || reduction > best_reduction) {
        best_reduction = reduction;
        best_indices = indices;
      }
    };
    if (tied) {
      for (int i = 0; i < m; ++i) {
        std::vector<int> indices;
        bool blocked = false;
        for (int k = 0; k < T; ++k) {
          const std::int8_t v = a[k * m + i];
          if (v == 0) blocked = true;
          if (v == -1) indices.push_back(k * m + i);
        }
        if (!blocked && !indices.empty()) consider(indices);
      }
    } else {
      for (int j = 0; j < m * T; ++j)
        if (a[j] == -1) consider({j});
    }

    if (best_indices.empty()) {
      if (feasible_now) return completed;
      return std::nullopt;
    }
    if (feasible_now && best_reduction <= 0.0) return completed;
    for (int q : best_indices) a[q] = 1;
  }
}

}  // namespace

Node Node::root(int m, int T) {
  Node node;
  node.assignment.assign(static_cast<std::size_t>(m) * T, -1);
  return node;
}

bool Node::fully_assigned() const { return sensched::fully_assigned(assignment); }

std::vector<int> Node::fixed_one() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i)
    if (assignment[i] == 1) out.push_back(i);
  return out;
}

std::vector<int> Node::fixed_zero() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i)
    if (assignment[i] == 0) out.push_back(i);
  return out;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

const char* to_string(NodeAction action) {
  switch (action) {
    case NodeAction::Branch: return "branch";
    case NodeAction::PruneBound: return "prune-bound";
    case NodeAction::PruneInfeasible: return "prune-infeasible";
    case NodeAction::Incumbent: return "incumbent";
  }
  return "unknown";
}

void write_trace_csv_header(std::ostream& out) {
  out << "# sensched trace csv v1\n";
  out << "node_id,parent_id,depth,bound,action\n";
}

void write_trace_csv_row(std::ostream& out, const NodeTraceRecord& record) {
  out << record.id << ',' << record.parent << ',' << record.depth << ','
      << format_double(record.bound) << ',' << to_string(record.action) << '\n';
}

double node_lower_bound(const CovarianceCache& cache, const std::vector<CostMatrix>& costs,
                        const Node& node) {
  if (static_cast<int>(node.assignment.size()) != cache.m * cache.T)
    throw std::invalid_argument("node_lower_bound: node size mismatch");
  BoundMemo memo(cache, costs);
  return memo.relaxation_bound(node.assignment);
}

int branch_variable(const Node& node, const CovarianceCache& cache,
                    const std::vector<CostMatrix>& costs, const SolverConfig& config) {
  const int j = lowest_undecided(node.assignment);
  if (j < 0) throw std::invalid_argument("branch_variable: no undecided index remains");
  if (config.branching == BranchingRule::LowestIndex) return j;
  BoundMemo memo(cache, costs);
  return pick_max_marginal(memo, node.assignment, cache.m);
}

std::optional<Schedule> greedy_completion(const Node& node, const ScheduleProblem& problem,
                                          const CovarianceCache& cache) {
  BoundMemo memo(cache, problem.costs);
  return greedy_impl(memo, node, problem);
}

namespace {

struct SearchNode {
  Node node;
  std::int64_t id = 0;
  std::int64_t parent = -1;
  std::int64_t seq = 0;
};

// Max-heap comparator whose "largest" element is the lowest bound (FIFO on
// ties), so pop_heap always surfaces the best-first choice.
struct BestFirstCmp {
  bool operator()(const SearchNode& a, const SearchNode& b) const {
    if (a.node.lower_bound != b.node.lower_bound) return a.node.lower_bound > b.node.lower_bound;
    return a.seq > b.seq;
  }
};

}  // namespace

SolveResult solve(const ScheduleProblem& problem, const SolverConfig& config,
                  const TraceSink& trace) {
  validate_problem(problem);
  if (!(config.gap_tolerance > 0.0))
    throw std::invalid_argument("solve: gap_tolerance must be positive");
  if (config.time_limit && *config.time_limit < 0.0)
    throw std::invalid_argument("solve: time_limit must be nonnegative");
  if (config.node_limit && *config.node_limit < 0)
    throw std::invalid_argument("solve: node_limit must be nonnegative");

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  const int m = problem.params.m;
  const int T = problem.T;
  const ConstraintSystem& cs = problem.constraints;

  const CovarianceCache cache = build_cache(problem.params, T);
  BoundMemo memo(cache, problem.costs);

  SolveResult result;

  std::optional<Schedule> incumbent;
  double inc_obj = kInf;
  auto cutoff = [&] {
    if (!incumbent) return kInf;
    return inc_obj - std::max(config.gap_tolerance * std::max(std::abs(inc_obj), 1.0), 1e-9);
  };

  std::vector<SearchNode> heap;      // best-first frontier
  std::vector<SearchNode> dive;      // depth-first overflow once the heap hits queue_cap
  std::multiset<double> open_bounds;
  std::int64_t next_id = 0;
  std::int64_t next_seq = 0;
  double pruned_floor = kInf;  // lowest cutoff any subtree was discarded against

  auto emit = [&](std::int64_t id, std::int64_t parent, int depth, double bound,
                  NodeAction action, const std::vector<std::int8_t>& assignment,
                  double inflight_bound) {
    if (!trace) return;
    NodeTraceRecord record;
    record.id = id;
    record.parent = parent;
    record.depth = depth;
    record.bound = bound;
    record.action = action;
    record.incumbent_objective = inc_obj;
    record.global_lower_bound =
        open_bounds.empty() ? inflight_bound : std::min(inflight_bound, *open_bounds.begin());
    record.assignment = assignment;
    trace(record);
  };

  Node root = Node::root(m, T);
  const std::int64_t root_id = next_id++;
  if (!propagate(cs, m, T, root.assignment)) {
    result.status = SolveStatus::Infeasible;
    result.lower_bound = kInf;
    result.gap = 0.0;
    result.wall_time = elapsed();
    return result;
  }
  root.lower_bound = memo.relaxation_bound(root.assignment);

  if (config.incumbent_heuristic == IncumbentHeuristic::GreedyCompletion) {
    if (auto seed = greedy_impl(memo, root, problem)) {
      incumbent = *seed;
      std::vector<std::int8_t> as(seed->gamma.begin(), seed->gamma.end());
      inc_obj = memo.support_objective(as);
      emit(root_id, -1, 0, inc_obj, NodeAction::Incumbent, as, root.lower_bound);
    }
  }

  open_bounds.insert(root.lower_bound);
  heap.push_back(SearchNode{std::move(root), root_id, -1, next_seq++});

  bool limit_hit = false;
  while (!heap.empty() || !dive.empty()) {
    if (config.time_limit && elapsed() > *config.time_limit) {
      limit_hit = true;
      break;
    }
    if (config.node_limit && result.nodes_explored >= *config.node_limit) {
      limit_hit = true;
      break;
    }

    SearchNode current;
    if (!dive.empty()) {
      current = std::move(dive.back());
      dive.pop_back();
    } else {
      std::pop_heap(heap.begin(), heap.end(), BestFirstCmp{});
      current = std::move(heap.back());
      heap.pop_back();
    }
    open_bounds.erase(open_bounds.find(current.node.lower_bound));
    ++result.nodes_explored;

    const double cut = cutoff();
    if (current.node.lower_bound >= cut) {
      pruned_floor = std::min(pruned_floor, cut);
      emit(current.id, current.parent, current.node.depth, current.node.lower_bound,
           NodeAction::PruneBound, current.node.assignment, current.node.lower_bound);
      continue;
    }
    if (!partial_feasible(cs, m, T, current.node.assignment)) {
      emit(current.id, current.parent, current.node.depth, current.node.lower_bound,
           NodeAction::PruneInfeasible, current.node.assignment, current.node.lower_bound);
      continue;
    }

    if (fully_assigned(current.node.assignment)) {
      const Schedule schedule = to_schedule(current.node.assignment, m, T);
      if (is_feasible(cs, schedule)) {
        // The relaxation is tight at leaves, so the bound is the objective.
        incumbent = schedule;
        inc_obj = current.node.lower_bound;
        emit(current.id, current.parent, current.node.depth, current.node.lower_bound,
             NodeAction::Incumbent, current.node.assignment, current.node.lower_bound);
      } else {
        emit(current.id, current.parent, current.node.depth, current.node.lower_bound,
             NodeAction::PruneInfeasible, current.node.assignment, current.node.lower_bound);
      }
      continue;
    }

    const int j = config.branching == BranchingRule::LowestIndex
                      ? lowest_undecided(current.node.assignment)
                      : pick_max_marginal(memo, current.node.assignment, m);
    for (const std::int8_t value : {std::int8_t{1}, std::int8_t{0}}) {
      Node child;
      child.assignment = current.node.assignment;
      child.assignment[j] = value;
      child.depth = current.node.depth + 1;
      const std::int64_t child_id = next_id++;
      if (!propagate(cs, m, T, child.assignment)) {
        emit(child_id, current.id, child.depth, current.node.lower_bound,
             NodeAction::PruneInfeasible, child.assignment, current.node.lower_bound);
        continue;
      }
      child.lower_bound = memo.relaxation_bound(child.assignment);
      open_bounds.insert(child.lower_bound);
      SearchNode entry{std::move(child), child_id, current.id, next_seq++};
      if (heap.size() + dive.size() >= config.queue_cap) {
        dive.push_back(std::move(entry));
      } else {
        heap.push_back(std::move(entry));
        std::push_heap(heap.begin(), heap.end(), BestFirstCmp{});
      }
    }
    emit(current.id, current.parent, current.node.depth, current.node.lower_bound,
         NodeAction::Branch, current.node.assignment, current.node.lower_bound);
  }

  result.wall_time = elapsed();
  if (incumbent) {
    result.incumbent = incumbent;
    result.objective = inc_obj;
    result.coefficients.reserve(T);
    for (int k = 0; k < T; ++k) {
      const std::vector<int> S = incumbent->support_up_to(k);
      result.coefficients.push_back(optimal_coefficients(cache, k, S));
    }
  }

  if (!limit_hit) {
    if (incumbent) {
      // Tree exhausted: optimality proven to within the pruning tolerance.
      result.status = SolveStatus::Optimal;
      result.lower_bound = inc_obj;
      result.gap = 0.0;
    } else {
      result.status = SolveStatus::Infeasible;
      result.lower_bound = kInf;
      result.gap = 0.0;
    }
  } else {
    result.status = SolveStatus::Feasible;
    double lb = open_bounds.empty() ? kInf : *open_bounds.begin();
    lb = std::min(lb, pruned_floor);
    if (incumbent) lb = std::min(lb, inc_obj);
    result.lower_bound = lb;
    result.gap = incumbent ? (inc_obj - lb) / std::max(std::abs(inc_obj), 1e-12) : kInf;
  }
  return result;
}

}  // namespace sensched
