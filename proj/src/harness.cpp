#include "sensched/harness.hpp"

#include "sensched/json_util.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <ostream>
#include <stdexcept>

namespace sensched {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

void check_spec(const ExperimentSpec& spec) {
  if (spec.experiment != "selection" && spec.experiment != "scheduling")
    throw std::invalid_argument("experiment spec: experiment must be 'selection' or 'scheduling'");
  if (spec.n_values.empty()) throw std::invalid_argument("experiment spec: empty n sweep");
  for (int n : spec.n_values)
    if (n < 1) throw std::invalid_argument("experiment spec: n values must be positive");
  if (spec.m < 1 || spec.T < 1 || spec.p < 0)
    throw std::invalid_argument("experiment spec: m, T must be positive and p nonnegative");
  if (spec.trials < 0) throw std::invalid_argument("experiment spec: trials must be nonnegative");
  if (spec.algorithms.empty())
    throw std::invalid_argument("experiment spec: at least one algorithm required");
  for (const auto& alg : spec.algorithms)
    if (alg != "solver" && alg != "greedy" && alg != "oracle")
      throw std::invalid_argument("experiment spec: unknown algorithm '" + alg + "'");
}

std::string csv_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(base) ^ n) ^ trial);
}

ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
  ExperimentSpec spec;
  spec.experiment = j.at("experiment").get<std::string>();
  spec.n_values = j.at("n").get<std::vector<int>>();
  spec.m = j.at("m").get<int>();
  spec.T = j.at("T").get<int>();
  spec.p = j.at("p").get<int>();
  spec.trials = j.at("trials").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("time_limit")) spec.time_limit = j.at("time_limit").get<double>();
  if (j.contains("gap_tolerance")) spec.gap_tolerance = j.at("gap_tolerance").get<double>();
  if (j.contains("algorithms"))
    spec.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  else
    spec.algorithms = {"solver", "greedy"};
  if (j.contains("oracle_cap")) spec.oracle_cap = j.at("oracle_cap").get<std::int64_t>();
  if (j.contains("spectral_target")) spec.spectral_target = j.at("spectral_target").get<double>();
  if (j.contains("noise_sigma2")) spec.noise_sigma2 = j.at("noise_sigma2").get<double>();
  check_spec(spec);
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  return experiment_spec_from_json(load_json_file(path));
}

ResultTable run_experiment(const ExperimentSpec& spec) {
  check_spec(spec);
  ResultTable rows;
  for (int n : spec.n_values) {
    for (int trial = 0; trial < spec.trials; ++trial) {
      const std::uint64_t seed =
          derive_seed(spec.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial));
      InstanceSpec inst_spec;
      inst_spec.n = n;
      inst_spec.m = spec.m;
      inst_spec.seed = seed;
      inst_spec.spectral_target = spec.spectral_target;
      inst_spec.noise_sigma2 = spec.noise_sigma2;

      ScheduleProblem problem;
      problem.params = generate_instance(inst_spec);
      problem.T = spec.T;
      problem.costs = final_state_costs(n, spec.T);
      if (spec.experiment == "selection")
        problem.constraints.structured.push_back(SelectionConstraint{spec.p});
      else
        problem.constraints.structured.push_back(PerStepBudgetConstraint{spec.p, false});

      for (const auto& alg : spec.algorithms) {
        BenchRow row;
        row.algorithm = alg;
        row.experiment = spec.experiment;
        row.n = n;
        row.m = spec.m;
        row.T = spec.T;
        row.p = spec.p;
        row.trial = trial;
        row.seed = seed;

        const auto t0 = std::chrono::steady_clock::now();
        if (alg == "solver") {
          SolverConfig config;
          config.gap_tolerance = spec.gap_tolerance;
          config.time_limit = spec.time_limit;
          const SolveResult res = solve(problem, config);
          if (res.incumbent) row.objective = res.objective;
          row.status = to_string(res.status);
          row.gap = res.gap;
          row.lower_bound = res.lower_bound;
          row.nodes = res.nodes_explored;
          row.wall_time = res.wall_time;
        } else if (alg == "greedy") {
          const auto [schedule, objective] = greedy(problem);
          row.objective = objective;
          row.status = "ok";
          row.wall_time =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
          const auto [schedule, objective] = brute_force(problem, spec.oracle_cap);
          row.objective = objective;
          row.status = "ok";
          row.wall_time =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const ResultTable& rows) {
  out << "# sensched bench csv v1\n";
  out << "algorithm,experiment,n,m,T,p,trial,seed,objective,status,gap,lower_bound,nodes,"
         "wall_time_s\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.experiment << ',' << r.n << ',' << r.m << ',' << r.T << ','
        << r.p << ',' << r.trial << ',' << r.seed << ',' << csv_field(r.objective) << ','
        << r.status << ',' << csv_field(r.gap) << ',' << csv_field(r.lower_bound) << ','
        << (r.nodes ? std::to_string(*r.nodes) : std::string()) << ',' << format_double(r.wall_time)
        << '\n';
  }
}

std::vector<ScatterRow> quality_scatter(const ResultTable& rows) {
  using Key = std::tuple<std::string, int, int>;  // experiment, n, trial
  std::map<Key, const BenchRow*> solver_rows;
  std::map<Key, const BenchRow*> greedy_rows;
  for (const auto& r : rows) {
    const Key key{r.experiment, r.n, r.trial};
    if (r.algorithm == "solver") solver_rows[key] = &r;
    if (r.algorithm == "greedy") greedy_rows[key] = &r;
  }
  if (solver_rows.size() != greedy_rows.size())
    throw std::invalid_argument("quality_scatter: unmatched solver/greedy rows");

  std::vector<ScatterRow> out;
  for (const auto& [key, solver_row] : solver_rows) {
    const auto it = greedy_rows.find(key);
    if (it == greedy_rows.end())
      throw std::invalid_argument("quality_scatter: unmatched solver/greedy rows");
    if (!solver_row->objective || !it->second->objective)
      throw std::invalid_argument("quality_scatter: row without an objective");
    ScatterRow s;
    s.instance = std::get<0>(key) + "_n" + std::to_string(std::get<1>(key)) + "_t" +
                 std::to_string(std::get<2>(key));
    s.solver_objective = *solver_row->objective;
    s.greedy_objective = *it->second->objective;
    s.ratio = s.greedy_objective / s.solver_objective;
    out.push_back(std::move(s));
  }
  return out;
}

void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows) {
  out << "# sensched scatter csv v1\n";
  out << "instance,solver_objective,greedy_objective,ratio\n";
  for (const auto& r : rows)
    out << r.instance << ',' << format_double(r.solver_objective) << ','
        << format_double(r.greedy_objective) << ',' << format_double(r.ratio) << '\n';
}

}  // namespace sensched
