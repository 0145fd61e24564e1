#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "hotspot/planner.hpp"

using namespace hotspot;

namespace {

ArmGrid paper_grid() {
  return ArmGrid(Rect{0, 0, 20, 20},
                 make_levels({10, 40, 70}, {1, 4, 7}, NoiseModel{0.25, 0.05}), 3);
}

ArmGrid small_grid(double noise_c0 = 0.25, double noise_c1 = 0.05) {
  return ArmGrid(Rect{0, 0, 10, 10},
                 make_levels({10, 30}, {2, 5}, NoiseModel{noise_c0, noise_c1}), 2);
}

Hyperparams grid_hyper(const ArmGrid& grid, double ls = 2.0, double sf2 = 100.0) {
  Hyperparams h;
  h.length_scale = ls;
  h.signal_variance = sf2;
  for (const auto& lv : grid.levels()) h.noise_variances.push_back(lv.noise_variance);
  return h;
}

ScalarField test_field(uint64_t seed, Rect extent = {0, 0, 10, 10}) {
  FieldConfig c;
  c.seed = seed;
  c.extent = extent;
  c.num_bumps = 3;
  c.global_max = 50.0;
  c.min_bump_separation = 2.0;
  return generate_random_field(c);
}

double replay_cost(const ArmGrid& grid, const PlannerConfig& cfg,
                   const std::vector<int>& visited) {
  Vec3 pos = cfg.start;
  double total = 0.0;
  for (int id : visited) {
    total += travel_time(pos, grid.arm(id).position) + cfg.sensing_time;
    pos = grid.arm(id).position;
  }
  return total;
}

}  // namespace

TEST_CASE("beta schedule evaluates the published forms") {
  const BetaSchedule cv_dec{1.5, -0.05, 0.0};
  CHECK(beta_value(1, cv_dec) == doctest::Approx(1.5 * std::exp(-0.05)));
  CHECK(beta_value(1000, cv_dec) == doctest::Approx(0.0).epsilon(1e-9));

  const BetaSchedule cpv_inc{-10.0, -0.05, 10.0};
  CHECK(beta_value(1, cpv_inc) == doctest::Approx(10.0 - 10.0 * std::exp(-0.05)));
  CHECK(beta_value(1000, cpv_inc) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(cpv_inc.increasing());

  // exponential at k = 0 is gamma + offset
  CHECK(beta_value(0, BetaSchedule{2.0, -0.1, 0.3}) == doctest::Approx(2.3));

  CHECK(cv_dec.valid());
  CHECK(cpv_inc.valid());
  CHECK_FALSE(BetaSchedule{-2.0, -0.05, 0.5}.valid());   // negative at k=1
  CHECK_FALSE(BetaSchedule{1.0, -0.05, -0.5}.valid());   // negative in the limit
  CHECK_FALSE(BetaSchedule{-1.0, 0.05, 5.0}.valid());    // diverges down
}

TEST_CASE("window off yields every arm and radius one the lattice neighborhood") {
  const ArmGrid grid = paper_grid();
  CHECK(candidate_arms(grid, 50, 0).size() == grid.arms().size());

  // interior arm at the lowest level
  const int interior = grid.arm_id_at(0, 9, 9);
  const std::vector<int> cands = candidate_arms(grid, interior, 1);
  CHECK(std::find(cands.begin(), cands.end(), interior) != cands.end());
  int same_level = 0, above = 0;
  for (int id : cands) {
    if (grid.arm(id).level == 0) ++same_level;
    if (grid.arm(id).level == 1) ++above;
  }
  CHECK(same_level == 9);  // 8 neighbors plus self
  CHECK(above >= 1);       // overhead arms at the adjacent level

  // corner arm keeps a smaller, never empty neighborhood
  const int corner = grid.arm_id_at(0, 0, 0);
  const std::vector<int> corner_cands = candidate_arms(grid, corner, 1);
  CHECK(!corner_cands.empty());
  CHECK(corner_cands.size() < cands.size());
  int corner_same = 0;
  for (int id : corner_cands) {
    if (grid.arm(id).level == 0) ++corner_same;
  }
  CHECK(corner_same == 4);  // 2x2 corner block

  // no skipping levels with radius one
  const int top = grid.arm_id_at(2, 1, 1);
  for (int id : candidate_arms(grid, top, 1)) {
    CHECK(grid.arm(id).level >= 1);
  }
}

TEST_CASE("prior scores are symmetric and tie-break to the nearest arm") {
  const ArmGrid grid(Rect{0, 0, 10, 10},
                     make_levels({10}, {2}, NoiseModel{0.25, 0.05}), 2);
  const Hyperparams h = grid_hyper(grid);
  GpEngine engine(grid.test_points(), h);

  std::vector<int> all(grid.arms().size());
  std::iota(all.begin(), all.end(), 0);
  const double beta = 1.0;
  const auto scores = arm_scores(engine, grid, VarianceMode::Current, beta, all);

  // no data: mu_bar = 0 and sigma_bar = sigma_f / sqrt(L_i) exactly
  for (const auto& s : scores) {
    const double li = static_cast<double>(grid.arm(s.arm_id).test_indices.size());
    CHECK(s.mu_bar == 0.0);
    CHECK(s.sigma_bar == doctest::Approx(10.0 / std::sqrt(li)).epsilon(1e-12));
  }

  // symmetric prior: the planner stays on the current arm (travel tie-break)
  MfGpUcbStrategy strategy;
  Rng rng = make_rng(1);
  PlannerConfig cfg;
  cfg.variance_mode = VarianceMode::Current;
  cfg.window_radius = 0;
  cfg.beta = BetaSchedule{1.0, 0.0, 0.0};
  EpisodeContext ctx{grid, engine, cfg, rng};
  ctx.step = 2;
  ctx.current_arm = 7;
  const auto choice = strategy.next_arm(ctx);
  REQUIRE(choice.has_value());
  CHECK(*choice == 7);
}

TEST_CASE("cpv mode prefers the higher arm from the prior when L_i matches") {
  // two levels, one arm each, single shared test point
  const ArmGrid grid(Rect{0, 0, 10, 10},
                     {{10.0, 10.0, 0.5}, {40.0, 10.0, 2.0}}, 1);
  REQUIRE(grid.arms().size() == 2);
  REQUIRE(grid.test_points().size() == 1);
  const Hyperparams h = grid_hyper(grid, 2.0, 4.0);
  GpEngine engine(grid.test_points(), h);
  const auto scores =
      arm_scores(engine, grid, VarianceMode::Cpv, 1.0, {0, 1});
  // sigma_bar = sqrt(sf2 * noise / (sf2 + noise)): lower for the low arm
  CHECK(scores[0].sigma_bar == doctest::Approx(std::sqrt(4.0 * 0.5 / 4.5)).epsilon(1e-6));
  CHECK(scores[1].sigma_bar == doctest::Approx(std::sqrt(4.0 * 2.0 / 6.0)).epsilon(1e-6));
  CHECK(scores[1].score > scores[0].score);
}

TEST_CASE("beta zero exploits and huge beta explores") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(6);
  const Hyperparams h = grid_hyper(grid);
  GpEngine engine(grid.test_points(), h);
  Rng rng = make_rng(2);
  for (int id : {0, 7, 12}) {
    engine.add_batch(take_image(field, grid.arm(id), grid, rng), grid.arm(id).level);
  }
  std::vector<int> all(grid.arms().size());
  std::iota(all.begin(), all.end(), 0);

  const auto exploit = arm_scores(engine, grid, VarianceMode::Current, 0.0, all);
  const auto explore = arm_scores(engine, grid, VarianceMode::Current, 1e9, all);

  const auto argmax = [](const std::vector<ArmScore>& v,
                         auto field_of) {
    size_t best = 0;
    for (size_t i = 1; i < v.size(); ++i) {
      if (field_of(v[i]) > field_of(v[best])) best = i;
    }
    return v[best].arm_id;
  };
  CHECK(argmax(exploit, [](const ArmScore& s) { return s.score; }) ==
        argmax(exploit, [](const ArmScore& s) { return s.mu_bar; }));
  CHECK(argmax(explore, [](const ArmScore& s) { return s.score; }) ==
        argmax(explore, [](const ArmScore& s) { return s.sigma_bar; }));
}

TEST_CASE("cpv scores never exceed current-variance scores") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(9);
  const Hyperparams h = grid_hyper(grid);
  GpEngine engine(grid.test_points(), h);
  Rng rng = make_rng(3);
  for (int id : {1, 5, 20}) {
    engine.add_batch(take_image(field, grid.arm(id), grid, rng), grid.arm(id).level);
  }
  std::vector<int> all(grid.arms().size());
  std::iota(all.begin(), all.end(), 0);
  const double beta = 2.0;
  const auto cv = arm_scores(engine, grid, VarianceMode::Current, beta, all);
  const auto cpv = arm_scores(engine, grid, VarianceMode::Cpv, beta, all);
  for (size_t i = 0; i < cv.size(); ++i) {
    CHECK(cpv[i].mu_bar == doctest::Approx(cv[i].mu_bar).epsilon(1e-12));
    CHECK(cpv[i].score <= cv[i].score + 1e-9);
  }
}

TEST_CASE("exact budget for one action takes exactly one image") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(4);
  const Hyperparams h = grid_hyper(grid);
  PlannerConfig cfg;
  cfg.start = Vec3{1.0, 1.0, 10.0};  // exactly at the first arm
  cfg.sensing_time = 2.0;
  cfg.budget = 2.0;
  cfg.window_radius = 1;
  cfg.beta = BetaSchedule{-10, -0.05, 10};
  Rng rng = make_rng(5);
  const EpisodeTrace trace = run_episode(field, grid, h, cfg, rng);
  CHECK(trace.images == 1);
  CHECK(trace.spent == doctest::Approx(2.0));
  CHECK(trace.point_metric > 0.0);
}

TEST_CASE("budget below one action yields the prior guess") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(4);
  const Hyperparams h = grid_hyper(grid);
  PlannerConfig cfg;
  cfg.start = Vec3{0, 0, 0};
  cfg.budget = 1.0;  // the climb alone costs 10
  Rng rng = make_rng(5);
  const EpisodeTrace trace = run_episode(field, grid, h, cfg, rng);
  CHECK(trace.images == 0);
  CHECK(trace.spent == 0.0);
  CHECK(trace.x_alg.x == grid.test_points()[0].x);
  CHECK(trace.x_alg.y == grid.test_points()[0].y);
  CHECK(trace.point_metric >= 0.0);
}

TEST_CASE("matched seeds reproduce the trace bit for bit") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(12);
  const Hyperparams h = grid_hyper(grid);
  PlannerConfig cfg;
  cfg.budget = 60.0;
  Rng a = make_rng(42), b = make_rng(42);
  const EpisodeTrace ta = run_episode(field, grid, h, cfg, a);
  const EpisodeTrace tb = run_episode(field, grid, h, cfg, b);
  CHECK(ta.visited == tb.visited);
  CHECK(ta.x_alg.x == tb.x_alg.x);
  CHECK(ta.point_metric == tb.point_metric);
  CHECK(ta.arm_metric == tb.arm_metric);
  CHECK(ta.spent == tb.spent);
}

TEST_CASE("noise-free sensing with a huge budget finds the hotspot") {
  const ArmGrid grid(Rect{0, 0, 10, 10},
                     make_levels({10, 30}, {2, 5}, NoiseModel{0, 0}), 2);
  const ScalarField field = test_field(21);
  Hyperparams h = grid_hyper(grid);  // zero noise levels from the grid
  PlannerConfig cfg;
  cfg.variance_mode = VarianceMode::Current;
  cfg.window_radius = 0;
  // exploration pressure strong enough to force full coverage before
  // the posterior mean can dominate the score
  cfg.beta = BetaSchedule{0.0, 0.0, 15.0};
  cfg.budget = 500.0;
  Rng rng = make_rng(30);
  const EpisodeTrace trace = run_episode(field, grid, h, cfg, rng);

  const auto [x_opt, f_opt] = field.global_optimum(0.1);
  const double spacing = 1.0;  // pixel lattice pitch at the low level
  CHECK(std::abs(trace.x_alg.x - x_opt.x) <= spacing + 0.2);
  CHECK(std::abs(trace.x_alg.y - x_opt.y) <= spacing + 0.2);
  CHECK(trace.point_metric > 85.0);
}

TEST_CASE("budget constraint holds on every trace") {
  const ArmGrid grid = small_grid();
  const Hyperparams h = grid_hyper(grid);
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const ScalarField field = test_field(seed + 100);
    PlannerConfig cfg;
    cfg.budget = 40.0 + 7.0 * static_cast<double>(seed);
    cfg.window_radius = static_cast<int>(seed % 3);
    cfg.variance_mode = seed % 2 ? VarianceMode::Cpv : VarianceMode::Current;
    Rng rng = make_rng(seed);
    const EpisodeTrace trace = run_episode(field, grid, h, cfg, rng);
    const double cost = replay_cost(grid, cfg, trace.visited);
    CHECK(cost <= cfg.budget + 1e-9);
    CHECK(cost == doctest::Approx(trace.spent));
    CHECK(trace.point_metric >= 0.0);
    CHECK(trace.point_metric <= 100.0 + 1.0);
    CHECK(trace.arm_metric >= 0.0);
    CHECK(trace.arm_metric <= 100.0 + 1e-9);
  }
}

TEST_CASE("windowed traces only step to candidate arms") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(77);
  const Hyperparams h = grid_hyper(grid);
  PlannerConfig cfg;
  cfg.window_radius = 1;
  cfg.budget = 80.0;
  Rng rng = make_rng(8);
  const EpisodeTrace trace = run_episode(field, grid, h, cfg, rng);
  REQUIRE(trace.visited.size() > 2);
  for (size_t i = 1; i < trace.visited.size(); ++i) {
    const auto cands = candidate_arms(grid, trace.visited[i - 1], 1);
    CHECK(std::find(cands.begin(), cands.end(), trace.visited[i]) != cands.end());
  }
}

TEST_CASE("point and arm metrics normalize to one hundred") {
  const ScalarField field = test_field(31);
  const auto [x_opt, f_opt] = field.global_optimum(0.1);
  CHECK(point_metric(field, x_opt) == doctest::Approx(100.0));

  // a uniform field scores 100 wherever the episode lands
  GridData g;
  g.width_cells = 3;
  g.height_cells = 3;
  g.cell_size = 5.0;
  g.values.assign(9, 2.0);
  const ScalarField uniform = ScalarField::from_grid(g);
  const ArmGrid grid = small_grid();
  CHECK(point_metric(uniform, {3.3, 8.1}) == doctest::Approx(100.0));
  const Hyperparams h = grid_hyper(grid);
  PlannerConfig cfg;
  cfg.budget = 60.0;
  Rng rng = make_rng(3);
  const EpisodeTrace trace = run_episode(uniform, grid, h, cfg, rng);
  CHECK(point_metric(uniform, trace.x_alg) == doctest::Approx(100.0));
  CHECK(arm_metric(uniform, grid, trace.alg_arm) == doctest::Approx(100.0));
}

TEST_CASE("invalid planner configs are rejected") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(1);
  const Hyperparams h = grid_hyper(grid);
  Rng rng = make_rng(1);
  PlannerConfig bad;
  bad.budget = 0.0;
  CHECK_THROWS_AS((void)run_episode(field, grid, h, bad, rng), std::invalid_argument);
  PlannerConfig neg;
  neg.beta = BetaSchedule{-2.0, -0.05, 0.5};
  CHECK_THROWS_AS((void)run_episode(field, grid, h, neg, rng), std::invalid_argument);
}

TEST_CASE("per-step log serializes") {
  const ArmGrid grid = small_grid();
  const ScalarField field = test_field(2);
  const Hyperparams h = grid_hyper(grid);
  PlannerConfig cfg;
  cfg.budget = 30.0;
  Rng rng = make_rng(9);
  const EpisodeTrace trace = run_episode(field, grid, h, cfg, rng);
  const std::string path = "/tmp/hotspot_steps.csv";
  trace.write_steps_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,arm_id,beta,score,spent");
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == static_cast<int>(trace.steps.size()));
  std::remove(path.c_str());
}
