#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hotspot/baselines.hpp"
#include "hotspot/config.hpp"
#include "hotspot/field.hpp"
#include "hotspot/gp.hpp"
#include "hotspot/planner.hpp"

namespace hotspot {

// One strategy column of an experiment: the name keys both the CSV output and
// the per-cell RNG stream, so adding strategies never perturbs existing cells.
struct StrategySpec {
  std::string name;
  bool is_baseline = false;
  BaselineConfig baseline;
  VarianceMode variance_mode = VarianceMode::Cpv;
  int window = 1;
  BetaSchedule beta;
  std::string beta_form = "inc";  // dec | inc | -
};

struct ExperimentMatrix {
  int environments = 20;
  int trials = 5;
  uint64_t env_seed_base = 1000;
  std::vector<StrategySpec> strategies;
  std::vector<double> budgets{100.0};
  std::vector<int> sparsity{0};  // 0 = exact inference
  int workers = 1;
};

struct TrialRow {
  uint64_t env_seed = 0;
  uint64_t trial_seed = 0;
  std::string strategy;
  std::string variance_mode;  // cv | cpv | -
  std::string window;         // off | radius
  std::string beta_form;      // dec | inc | -
  double budget = 0.0;
  int sparsity = 0;  // 0 = exact
  int images = 0;
  double point_metric = 0.0;
  double arm_metric = 0.0;
  double gp_time_ms = 0.0;
  bool failed = false;
  std::string error;
};

struct AggregateRow {
  std::string strategy;
  double budget = 0.0;
  int sparsity = 0;
  int samples = 0;
  double mean_point = 0.0;
  double sigma_point = 0.0;  // sample standard deviation (n - 1)
  double mean_arm = 0.0;
  double sigma_arm = 0.0;
  double mean_gp_time_ms = 0.0;
  double mean_images = 0.0;
};

struct TimingRow {
  std::string mode;  // exact | sparse
  int sparsity = 0;
  int step = 0;
  int train_size = 0;
  double update_seconds = 0.0;
};

class ResultTable {
 public:
  std::vector<TrialRow> rows;
  std::vector<TimingRow> timing;

  std::vector<AggregateRow> aggregates() const;
  void write_csv(const std::string& path) const;
  void write_timing_csv(const std::string& path) const;
  std::string summary() const;
};

// Builders from the shared run configuration.
ScalarField build_field(const RunConfig& config, uint64_t seed);
ArmGrid build_grid(const RunConfig& config);
Hyperparams build_hyper(const RunConfig& config, const ArmGrid& grid);
PlannerConfig build_planner_config(const RunConfig& config);
StrategySpec strategy_from_config(const RunConfig& config);
std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec);

// Runs every (environment, trial, strategy, budget, sparsity) cell. Results
// are a pure function of the matrix and config, whatever the worker count.
ResultTable run_matrix(const RunConfig& config, const ExperimentMatrix& matrix);

// The experiment matrices used by the CLI subcommands.
ExperimentMatrix ablation_matrix(const RunConfig& config);
ExperimentMatrix comparison_matrix(const RunConfig& config);
ExperimentMatrix budget_sweep_matrix(const RunConfig& config);
ExperimentMatrix sparsity_matrix(const RunConfig& config);

// Eight planner variants of the ablation: {CV, CPV} x {window off, on} x
// {decreasing, increasing beta}, with the published schedule constants.
std::vector<StrategySpec> ablation_strategies(const RunConfig& config);

// GP-update timing series on synthetic image batches (sweep_pixels
// measurements each): exact inference per step plus every sparsity level.
std::vector<TimingRow> sparsity_timing(const RunConfig& config);

EpisodeTrace run_single(const RunConfig& config, uint64_t env_seed,
                        uint64_t trial_seed);

}  // namespace hotspot
