#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/field.hpp"
#include "hotspot/gp.hpp"
#include "hotspot/sensing.hpp"

namespace hotspot {

// Exploration weight beta(k) = gamma * exp(rate * k) + offset.
struct BetaSchedule {
  double gamma = -10.0;
  double rate = -0.05;
  double offset = 10.0;

  bool increasing() const { return gamma < 0.0; }
  // beta(k) >= 0 for all k >= 1
  bool valid() const;
};

double beta_value(int k, const BetaSchedule& schedule);

enum class VarianceMode { Current, Cpv };

struct PlannerConfig {
  VarianceMode variance_mode = VarianceMode::Cpv;
  int window_radius = 1;  // 0 disables the dynamic window
  BetaSchedule beta;
  InferenceKind inference = InferenceKind::Exact;
  int num_inducing = 200;
  bool inducing_kmeans = false;
  double sensing_time = 2.0;  // T_S
  double budget = 100.0;      // B
  Vec3 start{0.0, 0.0, 0.0};  // v(0)
  double metric_resolution = 0.1;
  std::string debug_dump_path;  // per-step GP state dump when non-empty
};

struct BudgetLedger {
  double budget = 0.0;
  double spent = 0.0;

  double remaining() const { return budget - spent; }
  bool can_afford(double cost) const { return spent + cost <= budget + 1e-9; }
};

struct ArmScore {
  int arm_id = -1;
  double mu_bar = 0.0;
  double sigma_bar = 0.0;
  double score = 0.0;
};

// Average posterior mean and averaged variance per candidate arm, and the
// UCB-style score mu_bar + beta * sigma_bar. Variance comes from the plain
// posterior in Current mode and from the arm-conditioned CPV in Cpv mode.
std::vector<ArmScore> arm_scores(const GpEngine& engine, const ArmGrid& grid,
                                 VarianceMode mode, double beta,
                                 const std::vector<int>& candidate_ids);

// Dynamic window: all arms when radius <= 0, otherwise lattice neighbors
// within the radius at the same level plus overhead arms at adjacent levels.
// Always contains the current arm.
std::vector<int> candidate_arms(const ArmGrid& grid, int current_arm,
                                int window_radius);

struct StepRecord {
  int k = 0;
  int arm_id = -1;
  double beta = 0.0;
  double score = 0.0;
  double spent = 0.0;
};

struct EpisodeTrace {
  std::vector<int> visited;
  std::vector<double> arrival_spent;
  int images = 0;
  Vec2 x_alg;
  int alg_arm = -1;  // arm maximizing the posterior-mean sum over its I_i
  double point_metric = 0.0;
  double arm_metric = 0.0;
  double spent = 0.0;
  double gp_seconds = 0.0;
  double wall_seconds = 0.0;
  std::vector<StepRecord> steps;

  void write_steps_csv(const std::string& path) const;
};

struct EpisodeContext {
  const ArmGrid& grid;
  const GpEngine& engine;
  const PlannerConfig& config;
  Rng& rng;
  int step = 0;
  int current_arm = -1;
  double remaining = 0.0;
  const MeasurementBatch* last_batch = nullptr;
  double last_score = std::numeric_limits<double>::quiet_NaN();
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual int first_arm(const ArmGrid& grid, const Vec3& start) const {
    return grid.nearest_arm(start);
  }
  virtual std::optional<int> next_arm(EpisodeContext& ctx) = 0;
};

// Algorithm: greedy argmax of the UCB score over the candidate window, ties
// broken by smallest travel time from the current position, then lowest id.
class MfGpUcbStrategy : public Strategy {
 public:
  std::optional<int> next_arm(EpisodeContext& ctx) override;
};

EpisodeTrace run_episode(const ScalarField& field, const ArmGrid& grid,
                         const Hyperparams& hyper, const PlannerConfig& config,
                         Strategy& strategy, Rng& rng);

// Convenience overload running the MF-GP-UCB planner.
EpisodeTrace run_episode(const ScalarField& field, const ArmGrid& grid,
                         const Hyperparams& hyper, const PlannerConfig& config,
                         Rng& rng);

double point_metric(const ScalarField& field, const Vec2& x_alg,
                    double resolution = 0.1);
double arm_metric(const ScalarField& field, const ArmGrid& grid, int alg_arm);

}  // namespace hotspot
