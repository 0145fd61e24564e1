#include "hotspot/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace hotspot {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// argmax with ties broken by travel time from `from`, then by arm id
int pick_best(const std::vector<ArmScore>& scores, const ArmGrid& grid,
              const Vec3& from, double* best_score) {
  int best = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  double best_travel = std::numeric_limits<double>::infinity();
  for (const ArmScore& s : scores) {
    const double travel = travel_time(from, grid.arm(s.arm_id).position);
    if (s.score > best_val ||
        (s.score == best_val &&
         (travel < best_travel || (travel == best_travel && s.arm_id < best)))) {
      best = s.arm_id;
      best_val = s.score;
      best_travel = travel;
    }
  }
  if (best_score) *best_score = best_val;
  return best;
}

void dump_gp_state(const std::string& path, int k, const GpEngine& engine,
                   const Eigen::VectorXd& mu, const Eigen::VectorXd& var,
                   bool first) {
  std::ofstream out(path, first ? std::ios::trunc : std::ios::app);
  if (!out) return;
  out.precision(17);
  if (first) out << "step,type,x,y,a,b\n";
  const TrainingSet& train = engine.train();
  for (size_t i = 0; i < train.size(); ++i) {
    out << k << ",train," << train.X[i].x << ',' << train.X[i].y << ','
        << train.Y[i] << ',' << train.noise[i] << '\n';
  }
  const auto& pts = engine.test_points();
  for (size_t l = 0; l < pts.size(); ++l) {
    out << k << ",test," << pts[l].x << ',' << pts[l].y << ','
        << mu[static_cast<Eigen::Index>(l)] << ','
        << var[static_cast<Eigen::Index>(l)] << '\n';
  }
}

}  // namespace

bool BetaSchedule::valid() const {
  // beta(k) = gamma*exp(rate*k) + offset on k >= 1: monotone in k, so the
  // extremes are k=1 and the k->inf limit.
  const double at_one = gamma * std::exp(rate) + offset;
  if (at_one < 0.0) return false;
  if (rate < 0.0) return offset >= 0.0;
  if (rate == 0.0) return true;
  return gamma >= 0.0;  // positive rate with negative gamma diverges down
}

double beta_value(int k, const BetaSchedule& schedule) {
  return schedule.gamma * std::exp(schedule.rate * k) + schedule.offset;
}

std::vector<int> candidate_arms(const ArmGrid& grid, int current_arm,
                                int window_radius) {
  std::vector<int> out;
  if (window_radius <= 0 || current_arm < 0) {
    out.resize(grid.arms().size());
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  const Arm& cur = grid.arm(current_arm);
  const auto& levels = grid.levels();
  for (int dy = -window_radius; dy <= window_radius; ++dy) {
    for (int dx = -window_radius; dx <= window_radius; ++dx) {
      const int id = grid.arm_id_at(cur.level, cur.ix + dx, cur.iy + dy);
      if (id >= 0) out.push_back(id);
    }
  }
  for (int lv : {cur.level - 1, cur.level + 1}) {
    if (lv < 0 || lv >= static_cast<int>(levels.size())) continue;
    const double reach =
        window_radius *
        std::max(levels[cur.level].footprint_side, levels[lv].footprint_side) /
        2.0;
    for (const Arm& a : grid.arms()) {
      if (a.level != lv) continue;
      if (std::abs(a.position.x - cur.position.x) <= reach + 1e-9 &&
          std::abs(a.position.y - cur.position.y) <= reach + 1e-9) {
        out.push_back(a.id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ArmScore> arm_scores(const GpEngine& engine, const ArmGrid& grid,
                                 VarianceMode mode, double beta,
                                 const std::vector<int>& candidate_ids) {
  // union of the candidates' test indices
  std::vector<int> uni;
  for (int id : candidate_ids) {
    const Arm& a = grid.arm(id);
    uni.insert(uni.end(), a.test_indices.begin(), a.test_indices.end());
  }
  std::sort(uni.begin(), uni.end());
  uni.erase(std::unique(uni.begin(), uni.end()), uni.end());

  std::vector<int> pos(grid.test_points().size(), -1);
  for (size_t i = 0; i < uni.size(); ++i) pos[static_cast<size_t>(uni[i])] = static_cast<int>(i);

  const Eigen::VectorXd mu = engine.mean(uni);
  Eigen::VectorXd var;
  if (mode == VarianceMode::Current) {
    var = engine.variance(uni);
  }

  std::vector<ArmScore> scores;
  scores.reserve(candidate_ids.size());
  for (int id : candidate_ids) {
    const Arm& a = grid.arm(id);
    const double li = static_cast<double>(a.test_indices.size());
    double mu_sum = 0.0;
    for (int l : a.test_indices) mu_sum += mu[pos[static_cast<size_t>(l)]];
    double var_sum = 0.0;
    if (mode == VarianceMode::Current) {
      for (int l : a.test_indices) var_sum += var[pos[static_cast<size_t>(l)]];
    } else {
      const double noise =
          engine.hyper().noise_variances.at(static_cast<size_t>(a.level));
      var_sum = engine.cpv_diag(a.test_indices, noise).sum();
    }
    ArmScore s;
    s.arm_id = id;
    s.mu_bar = mu_sum / li;
    s.sigma_bar = std::sqrt(std::max(var_sum, 0.0) / (li * li));
    s.score = s.mu_bar + beta * s.sigma_bar;
    scores.push_back(s);
  }
  return scores;
}

std::optional<int> MfGpUcbStrategy::next_arm(EpisodeContext& ctx) {
  const std::vector<int> candidates =
      candidate_arms(ctx.grid, ctx.current_arm, ctx.config.window_radius);
  const double beta = beta_value(ctx.step, ctx.config.beta);
  const std::vector<ArmScore> scores =
      arm_scores(ctx.engine, ctx.grid, ctx.config.variance_mode, beta, candidates);
  const Vec3 from = ctx.current_arm >= 0 ? ctx.grid.arm(ctx.current_arm).position
                                         : ctx.config.start;
  double best_score = 0.0;
  const int best = pick_best(scores, ctx.grid, from, &best_score);
  ctx.last_score = best_score;
  return best;
}

EpisodeTrace run_episode(const ScalarField& field, const ArmGrid& grid,
                         const Hyperparams& hyper, const PlannerConfig& config,
                         Strategy& strategy, Rng& rng) {
  if (!(config.budget > 0.0) || config.sensing_time < 0.0) {
    throw std::invalid_argument("budget must be positive and sensing time non-negative");
  }
  if (!config.beta.valid()) {
    throw std::invalid_argument("beta schedule is negative for some step");
  }
  const double wall_start = now_seconds();

  Hyperparams h = hyper;
  if (h.noise_variances.empty()) {
    for (const AltitudeLevel& lv : grid.levels()) {
      h.noise_variances.push_back(lv.noise_variance);
    }
  }
  std::vector<Vec2> inducing;
  if (config.inference == InferenceKind::Sparse) {
    inducing = config.inducing_kmeans
                   ? select_inducing_kmeans(grid.test_points(), config.num_inducing,
                                            /*seed=*/config.num_inducing)
                   : select_inducing_lattice(grid.extent(), config.num_inducing);
  }
  GpEngine engine(grid.test_points(), h, config.inference, std::move(inducing));

  EpisodeTrace trace;
  BudgetLedger ledger{config.budget, 0.0};
  Vec3 pos = config.start;
  MeasurementBatch last_batch;
  EpisodeContext ctx{grid, engine, config, rng};

  for (int k = 1;; ++k) {
    ctx.step = k;
    ctx.remaining = ledger.remaining();
    ctx.last_score = std::numeric_limits<double>::quiet_NaN();
    int next = -1;
    if (k == 1) {
      next = strategy.first_arm(grid, pos);
    } else {
      const auto choice = strategy.next_arm(ctx);
      if (!choice || *choice < 0) break;
      next = *choice;
    }
    const double cost =
        travel_time(pos, grid.arm(next).position) + config.sensing_time;
    if (!ledger.can_afford(cost)) break;  // decline the move and terminate
    ledger.spent += cost;
    pos = grid.arm(next).position;
    ctx.current_arm = next;

    last_batch = take_image(field, grid.arm(next), grid, rng);
    ctx.last_batch = &last_batch;
    engine.add_batch(last_batch, grid.arm(next).level);
    ++trace.images;
    trace.visited.push_back(next);
    trace.arrival_spent.push_back(ledger.spent);
    trace.steps.push_back(
        {k, next, beta_value(k, config.beta), ctx.last_score, ledger.spent});

    if (!config.debug_dump_path.empty()) {
      const Eigen::VectorXd mu = engine.mean_all();
      std::vector<int> all(grid.test_points().size());
      std::iota(all.begin(), all.end(), 0);
      dump_gp_state(config.debug_dump_path, k, engine, mu, engine.variance(all),
                    k == 1);
    }
  }

  // x_alg = argmax of the posterior mean over the test set; the first maximal
  // index wins so the no-data case falls back to the first test point.
  const Eigen::VectorXd mu = engine.mean_all();
  Eigen::Index best_l = 0;
  for (Eigen::Index l = 1; l < mu.size(); ++l) {
    if (mu[l] > mu[best_l]) best_l = l;
  }
  trace.x_alg = grid.test_points()[static_cast<size_t>(best_l)];

  int best_arm = -1;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (const Arm& a : grid.arms()) {
    double s = 0.0;
    for (int l : a.test_indices) s += mu[l];
    if (s > best_sum) {
      best_sum = s;
      best_arm = a.id;
    }
  }
  trace.alg_arm = best_arm;

  trace.spent = ledger.spent;
  trace.point_metric = point_metric(field, trace.x_alg, config.metric_resolution);
  trace.arm_metric = arm_metric(field, grid, best_arm);
  trace.gp_seconds = engine.gp_seconds();
  trace.wall_seconds = now_seconds() - wall_start;
  return trace;
}

EpisodeTrace run_episode(const ScalarField& field, const ArmGrid& grid,
                         const Hyperparams& hyper, const PlannerConfig& config,
                         Rng& rng) {
  MfGpUcbStrategy strategy;
  return run_episode(field, grid, hyper, config, strategy, rng);
}

double point_metric(const ScalarField& field, const Vec2& x_alg,
                    double resolution) {
  const auto [x_opt, f_opt] = field.global_optimum(resolution);
  if (!(f_opt > 0.0)) {
    throw std::invalid_argument("point metric requires a positive field optimum");
  }
  return 100.0 * field.evaluate(x_alg) / f_opt;
}

double arm_metric(const ScalarField& field, const ArmGrid& grid, int alg_arm) {
  if (alg_arm < 0 || alg_arm >= static_cast<int>(grid.arms().size())) {
    throw std::invalid_argument("invalid arm id for arm metric");
  }
  double best_sum = 0.0;
  for (const Arm& a : grid.arms()) {
    double s = 0.0;
    for (int l : a.test_indices) s += field.evaluate(grid.test_points()[l]);
    best_sum = std::max(best_sum, s);
  }
  if (!(best_sum > 0.0)) {
    throw std::invalid_argument("arm metric requires a positive field");
  }
  double alg_sum = 0.0;
  for (int l : grid.arm(alg_arm).test_indices) {
    alg_sum += field.evaluate(grid.test_points()[l]);
  }
  return 100.0 * alg_sum / best_sum;
}

void EpisodeTrace::write_steps_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write step log: " + path);
  }
  out.precision(17);
  out << "k,arm_id,beta,score,spent\n";
  for (const StepRecord& s : steps) {
    out << s.k << ',' << s.arm_id << ',' << s.beta << ',' << s.score << ','
        << s.spent << '\n';
  }
}

}  // namespace hotspot
