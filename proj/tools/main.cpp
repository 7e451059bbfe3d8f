// sensched command line: instance generation, exact and greedy scheduling,
// brute-force oracle runs, and benchmark sweeps.

#include "sensched/harness.hpp"
#include "sensched/json_util.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

std::string schedule_string(const sensched::Schedule& s) {
  std::string out;
  for (int k = 0; k < s.T; ++k) {
    if (k > 0) out += '|';
    for (int j = 0; j < s.m; ++j) out += s.active(k, j) ? '1' : '0';
  }
  return out;
}

void print_schedule(const sensched::Schedule& s, double objective) {
  std::cout << "objective: " << sensched::format_double(objective) << "\n";
  std::cout << "schedule: " << schedule_string(s) << "\n";
  for (int k = 0; k < s.T; ++k) {
    std::cout << "step " << k << ":";
    for (int j = 0; j < s.m; ++j)
      if (s.active(k, j)) std::cout << ' ' << j;
    std::cout << "\n";
  }
}

int run_generate(int n, int m, std::uint64_t seed, double spectral_target, double noise_sigma2,
                 const std::string& out_path) {
  sensched::InstanceSpec spec;
  spec.n = n;
  spec.m = m;
  spec.seed = seed;
  spec.spectral_target = spectral_target;
  spec.noise_sigma2 = noise_sigma2;
  sensched::InstanceFile file{sensched::generate_instance(spec), spec};
  if (out_path.empty())
    std::cout << sensched::instance_to_json(file).dump(2) << "\n";
  else
    sensched::save_instance(out_path, file);
  return 0;
}

int run_solve(const std::string& problem_path, double time_limit, double gap,
              const std::string& trace_path) {
  const auto problem = sensched::load_problem(problem_path);

  sensched::SolverConfig config;
  config.gap_tolerance = gap;
  if (time_limit > 0.0) config.time_limit = time_limit;

  std::ofstream trace_file;
  sensched::TraceSink sink;
  if (!trace_path.empty()) {
    trace_file.open(trace_path);
    if (!trace_file) throw std::runtime_error("cannot write " + trace_path);
    sensched::write_trace_csv_header(trace_file);
    sink = [&trace_file](const sensched::NodeTraceRecord& record) {
      sensched::write_trace_csv_row(trace_file, record);
    };
  }

  const auto result = sensched::solve(problem, config, sink);
  std::cout << "status: " << sensched::to_string(result.status) << "\n";
  if (result.incumbent) print_schedule(*result.incumbent, result.objective);
  std::cout << "lower_bound: " << sensched::format_double(result.lower_bound) << "\n";
  std::cout << "gap: " << sensched::format_double(result.gap) << "\n";
  std::cout << "nodes: " << result.nodes_explored << "\n";
  std::cout << "wall_time_s: " << sensched::format_double(result.wall_time) << "\n";
  return 0;
}

int run_bench(const std::string& spec_path, const std::string& out_dir) {
  const auto spec = sensched::load_experiment_spec(spec_path);
  const auto rows = sensched::run_experiment(spec);

  std::filesystem::create_directories(out_dir);
  const auto results_path = std::filesystem::path(out_dir) / "results.csv";
  {
    std::ofstream out(results_path);
    if (!out) throw std::runtime_error("cannot write " + results_path.string());
    sensched::write_results_csv(out, rows);
  }
  std::cout << "wrote " << results_path.string() << " (" << rows.size() << " rows)\n";

  const bool has_solver = std::find(spec.algorithms.begin(), spec.algorithms.end(), "solver") !=
                          spec.algorithms.end();
  const bool has_greedy = std::find(spec.algorithms.begin(), spec.algorithms.end(), "greedy") !=
                          spec.algorithms.end();
  if (has_solver && has_greedy) {
    const auto scatter = sensched::quality_scatter(rows);
    const auto scatter_path = std::filesystem::path(out_dir) / "scatter.csv";
    std::ofstream out(scatter_path);
    if (!out) throw std::runtime_error("cannot write " + scatter_path.string());
    sensched::write_scatter_csv(out, scatter);
    std::cout << "wrote " << scatter_path.string() << " (" << scatter.size() << " pairs)\n";
  }

  if (has_solver) {
    for (int n : spec.n_values) {
      std::vector<double> times;
      for (const auto& r : rows)
        if (r.algorithm == "solver" && r.n == n) times.push_back(r.wall_time);
      if (times.empty()) continue;
      std::sort(times.begin(), times.end());
      const double median = times[times.size() / 2];
      std::cout << "solver n=" << n << ": median wall time "
                << sensched::format_double(median) << " s over " << times.size() << " trials\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal sensor schedules for Kalman-filter state estimation"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Draw a seeded random instance");
  int gen_n = 0;
  int gen_m = 0;
  std::uint64_t gen_seed = 0;
  double gen_spectral = 0.5;
  double gen_sigma2 = 0.01;
  std::string gen_out;
  generate->add_option("--n", gen_n, "State dimension")->required();
  generate->add_option("--m", gen_m, "Sensor count")->required();
  generate->add_option("--seed", gen_seed, "Generator seed")->required();
  generate->add_option("--spectral-target", gen_spectral, "Spectral radius of A (default 0.5)");
  generate->add_option("--noise-sigma2", gen_sigma2, "Measurement noise variance (default 0.01)");
  generate->add_option("--out", gen_out, "Output path (stdout when omitted)");

  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file to optimality");
  std::string solve_problem;
  double solve_time_limit = 0.0;
  double solve_gap = 1e-6;
  std::string solve_trace;
  solve_cmd->add_option("--problem", solve_problem, "Problem JSON file")->required();
  solve_cmd->add_option("--time-limit", solve_time_limit, "Time limit in seconds (0 = none)");
  solve_cmd->add_option("--gap", solve_gap, "Relative optimality gap tolerance");
  solve_cmd->add_option("--trace", solve_trace, "Write the node trace CSV to this path");

  auto* greedy_cmd = app.add_subcommand("greedy", "Run the greedy baseline");
  std::string greedy_problem;
  greedy_cmd->add_option("--problem", greedy_problem, "Problem JSON file")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "Enumerate every feasible schedule");
  std::string oracle_problem;
  std::int64_t oracle_cap = 1 << 22;
  oracle_cmd->add_option("--problem", oracle_problem, "Problem JSON file")->required();
  oracle_cmd->add_option("--cap", oracle_cap, "Enumeration cap");

  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark sweep");
  std::string bench_spec;
  std::string bench_out_dir;
  bench_cmd->add_option("--spec", bench_spec, "Experiment spec JSON file")->required();
  bench_cmd->add_option("--out-dir", bench_out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed())
      return run_generate(gen_n, gen_m, gen_seed, gen_spectral, gen_sigma2, gen_out);
    if (solve_cmd->parsed())
      return run_solve(solve_problem, solve_time_limit, solve_gap, solve_trace);
    if (greedy_cmd->parsed()) {
      const auto [schedule, objective] = sensched::greedy(sensched::load_problem(greedy_problem));
      print_schedule(schedule, objective);
      return 0;
    }
    if (oracle_cmd->parsed()) {
      const auto [schedule, objective] =
          sensched::brute_force(sensched::load_problem(oracle_problem), oracle_cap);
      print_schedule(schedule, objective);
      return 0;
    }
    if (bench_cmd->parsed()) return run_bench(bench_spec, bench_out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
