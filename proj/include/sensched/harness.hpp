#pragma once

#include "sensched/baselines.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sensched {

// Benchmark sweep: for each state dimension in `n_values` and each trial, a
// fresh instance is drawn and the final-state-error problem (Q_T = I) is
// solved under the experiment's constraint family.
struct ExperimentSpec {
  std::string experiment;  // "selection" or "scheduling"
  std::vector<int> n_values;
  int m = 0;
  int T = 0;
  int p = 0;
  int trials = 0;
  std::uint64_t seed = 1;  // base seed; per-trial seeds derive from it
  std::optional<double> time_limit;
  double gap_tolerance = 1e-6;
  std::vector<std::string> algorithms;  // subset of {"solver","greedy","oracle"}
  std::int64_t oracle_cap = 1 << 22;
  double spectral_target = 0.5;
  double noise_sigma2 = 0.01;
};

ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);
ExperimentSpec load_experiment_spec(const std::string& path);

// Instance seed for a (base seed, n, trial) cell: three rounds of the
// splitmix64 mixer, so sweeps are reproducible without storing seed lists.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n, std::uint64_t trial);

struct BenchRow {
  std::string algorithm;
  std::string experiment;
  int n = 0;
  int m = 0;
  int T = 0;
  int p = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> objective;
  std::string status;
  std::optional<double> gap;
  std::optional<double> lower_bound;
  std::optional<std::int64_t> nodes;
  double wall_time = 0.0;
};

using ResultTable = std::vector<BenchRow>;

// Runs the sweep; rows come out in (n, trial, algorithm) order. Everything
// except the wall-time column is deterministic for a fixed spec.
ResultTable run_experiment(const ExperimentSpec& spec);

void write_results_csv(std::ostream& out, const ResultTable& rows);

struct ScatterRow {
  std::string instance;
  double solver_objective = 0.0;
  double greedy_objective = 0.0;
  double ratio = 0.0;  // greedy / solver
};

// Pairs solver and greedy rows per instance. Throws std::invalid_argument on
// unmatched pairs.
std::vector<ScatterRow> quality_scatter(const ResultTable& rows);

void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows);

}  // namespace sensched
