#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hotspot/bench.hpp"

using namespace hotspot;

namespace {

// small enough to run in a blink, still exercising the full pipeline
RunConfig tiny_config() {
  RunConfig c;
  c.field_width = 8.0;
  c.field_height = 8.0;
  c.num_bumps = 2;
  c.altitudes = {10.0, 30.0};
  c.footprints = {2.0, 4.0};
  c.pixels_per_side = 2;
  c.budget = 30.0;
  c.environments = 2;
  c.trials = 2;
  c.budgets = {20.0, 30.0};
  c.sparsity = {16};
  c.sweep_pixels = 30;
  c.sweep_steps = 4;
  return c;
}

std::string strip_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const size_t comma = line.rfind(',');
    out << line.substr(0, comma) << '\n';
  }
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentMatrix single_matrix(const RunConfig& c) {
  ExperimentMatrix m;
  m.environments = 1;
  m.trials = 1;
  m.env_seed_base = c.env_seed_base;
  m.strategies = {strategy_from_config(c)};
  m.budgets = {c.budget};
  m.sparsity = {0};
  return m;
}

}  // namespace

TEST_CASE("config round trips exactly") {
  const RunConfig def;
  const std::string text = emit_config(def);
  const RunConfig back = parse_config(text, "mem");
  CHECK(back == def);
  CHECK(emit_config(back) == text);

  RunConfig tweaked = def;
  tweaked.budget = 123.456789012345;
  tweaked.strategy = "block-ucl";
  tweaked.budgets = {1.5, 2.5, 1e-3};
  tweaked.field_path = "/tmp/some.grid";
  const RunConfig again = parse_config(emit_config(tweaked), "mem");
  CHECK(again == tweaked);
}

TEST_CASE("config errors carry the line number and key") {
  const std::string bad =
      "[field]\nseed = 1\n\n[planner]\nbudgrt = 100\n";
  try {
    (void)parse_config(bad, "test.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("test.cfg:5") != std::string::npos);
    CHECK(msg.find("budgrt") != std::string::npos);
  }

  CHECK_THROWS_AS((void)parse_config("[planner]\nstrategy = warp\n", "m"),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_config("seed = 1\n", "m"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("[planner]\nbudget = -5\n", "m"), ConfigError);
  CHECK_THROWS_AS(
      (void)parse_config("[planner]\nbeta_gamma = -2\nbeta_offset = 0.5\n", "m"),
      ConfigError);
  CHECK_THROWS_AS((void)load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("config overrides by dotted key") {
  RunConfig c;
  set_config_value(c, "planner.budget", "250");
  CHECK(c.budget == 250.0);
  set_config_value(c, "sensing.altitudes", "5, 15, 25");
  CHECK(c.altitudes == std::vector<double>{5.0, 15.0, 25.0});
  CHECK(get_config_value(c, "planner.budget") == "250");
  CHECK_THROWS_AS(set_config_value(c, "planner.warp", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "budget", "1"), ConfigError);
}

TEST_CASE("a one-cell matrix produces a single row") {
  const RunConfig c = tiny_config();
  const ResultTable table = run_matrix(c, single_matrix(c));
  REQUIRE(table.rows.size() == 1);
  const TrialRow& r = table.rows[0];
  CHECK(r.strategy == "mfgpucb");
  CHECK(!r.failed);
  CHECK(r.images > 0);
  CHECK(r.point_metric >= 0.0);
  CHECK(r.point_metric <= 101.0);
  CHECK(r.arm_metric <= 100.0 + 1e-9);
}

TEST_CASE("matrix results are deterministic and csv-stable") {
  const RunConfig c = tiny_config();
  ExperimentMatrix m = single_matrix(c);
  m.environments = 2;
  m.trials = 2;
  m.budgets = {20.0, 30.0};

  const ResultTable t1 = run_matrix(c, m);
  const ResultTable t2 = run_matrix(c, m);
  const std::string p1 = "/tmp/hotspot_bench1.csv";
  const std::string p2 = "/tmp/hotspot_bench2.csv";
  t1.write_csv(p1);
  t2.write_csv(p2);
  const std::string csv1 = read_file(p1);
  CHECK(strip_time_column(csv1) == strip_time_column(read_file(p2)));
  std::remove(p1.c_str());
  std::remove(p2.c_str());

  // CSV schema: constant column count, fixed header
  std::istringstream in(csv1);
  std::string line;
  size_t columns = 0;
  while (std::getline(in, line)) {
    const size_t count = static_cast<size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns == 0) columns = count;
    CHECK(columns == count);
  }
}

TEST_CASE("worker count does not change the results") {
  const RunConfig c = tiny_config();
  ExperimentMatrix m = single_matrix(c);
  m.environments = 2;
  m.trials = 2;
  m.workers = 1;
  const ResultTable serial = run_matrix(c, m);
  m.workers = 3;
  const ResultTable parallel = run_matrix(c, m);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].point_metric == parallel.rows[i].point_metric);
    CHECK(serial.rows[i].images == parallel.rows[i].images);
    CHECK(serial.rows[i].strategy == parallel.rows[i].strategy);
  }
}

TEST_CASE("matched budgets share the measurement stream") {
  // same (env, trial, strategy) cell at different budgets: the longer run's
  // visit sequence extends the shorter one's
  const RunConfig c = tiny_config();
  const EpisodeTrace t20 = [&] {
    RunConfig rc = c;
    rc.budget = 20.0;
    return run_single(rc, 1000, 0);
  }();
  const EpisodeTrace t30 = [&] {
    RunConfig rc = c;
    rc.budget = 30.0;
    return run_single(rc, 1000, 0);
  }();
  REQUIRE(t20.visited.size() <= t30.visited.size());
  for (size_t i = 0; i < t20.visited.size(); ++i) {
    CHECK(t20.visited[i] == t30.visited[i]);
  }
}

TEST_CASE("one-sigma is the sample standard deviation") {
  ResultTable table;
  const double points[] = {10.0, 20.0, 30.0, 40.0};
  for (double p : points) {
    TrialRow r;
    r.strategy = "s";
    r.budget = 1.0;
    r.sparsity = 0;
    r.point_metric = p;
    r.arm_metric = p / 2;
    table.rows.push_back(r);
  }
  const auto agg = table.aggregates();
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].samples == 4);
  CHECK(agg[0].mean_point == doctest::Approx(25.0));
  // sample (n-1) convention: sqrt(500/3)
  CHECK(agg[0].sigma_point == doctest::Approx(std::sqrt(500.0 / 3.0)));
}

TEST_CASE("failing cells are recorded without aborting the matrix") {
  const RunConfig c = tiny_config();
  ExperimentMatrix m = single_matrix(c);
  StrategySpec broken;
  broken.name = "broken";
  broken.is_baseline = true;
  broken.baseline.kind = BaselineKind::Boustrophedon;
  broken.baseline.fixed_level = 99;  // no such level
  m.strategies.push_back(broken);

  const ResultTable table = run_matrix(c, m);
  REQUIRE(table.rows.size() == 2);
  CHECK(!table.rows[0].failed);
  CHECK(table.rows[1].failed);
  CHECK(!table.rows[1].error.empty());
  const auto agg = table.aggregates();
  for (const auto& a : agg) {
    if (a.strategy == "broken") CHECK(a.samples == 0);
  }
  CHECK(table.summary().find("failed") != std::string::npos);
}

TEST_CASE("ablation matrix wires the eight published variants") {
  const RunConfig c = tiny_config();
  const ExperimentMatrix m = ablation_matrix(c);
  REQUIRE(m.strategies.size() == 8);
  CHECK(m.strategies[0].name == "cv-bdec");
  CHECK(m.strategies[0].beta.gamma == doctest::Approx(1.5));
  CHECK(m.strategies[1].beta.gamma == doctest::Approx(10.0));
  CHECK(m.strategies[3].beta.offset == doctest::Approx(10.0));
  CHECK(m.strategies[7].name == "dcpv-binc");
  CHECK(m.strategies[7].window >= 1);
  int cpv = 0, windowed = 0;
  for (const auto& s : m.strategies) {
    cpv += s.variance_mode == VarianceMode::Cpv ? 1 : 0;
    windowed += s.window > 0 ? 1 : 0;
  }
  CHECK(cpv == 4);
  CHECK(windowed == 4);
}

TEST_CASE("comparison matrix includes the flagship and all baselines") {
  const RunConfig c = tiny_config();
  const ExperimentMatrix m = comparison_matrix(c);
  REQUIRE(m.strategies.size() == 8);  // flagship + 2x2 fixed-level + vr/mi/ucl
  CHECK(m.strategies[0].name == "dcpv-binc");
  CHECK(m.strategies[1].name == "boustrophedon-low");
  CHECK(m.strategies.back().name == "block-ucl");
}

TEST_CASE("budget sweep rejects unsorted budgets") {
  RunConfig c = tiny_config();
  c.budgets = {100.0, 50.0};
  CHECK_THROWS_AS((void)budget_sweep_matrix(c), std::invalid_argument);
}

TEST_CASE("sparsity timing series covers exact and sparse modes") {
  const RunConfig c = tiny_config();
  const auto rows = sparsity_timing(c);
  REQUIRE(rows.size() == 2 * static_cast<size_t>(c.sweep_steps));
  int exact_rows = 0, sparse_rows = 0;
  for (const auto& r : rows) {
    CHECK(r.update_seconds >= 0.0);
    CHECK(r.train_size == r.step * c.sweep_pixels);
    if (r.mode == "exact") ++exact_rows;
    if (r.mode == "sparse") ++sparse_rows;
  }
  CHECK(exact_rows == c.sweep_steps);
  CHECK(sparse_rows == c.sweep_steps);

  ResultTable table;
  table.timing = rows;
  const std::string path = "/tmp/hotspot_timing.csv";
  table.write_timing_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "mode,S,step,train_size,update_seconds");
  std::remove(path.c_str());
}

TEST_CASE("grid-file fields drive the matrix when field.path is set") {
  GridData g;
  g.width_cells = 9;
  g.height_cells = 9;
  g.cell_size = 1.0;
  g.values.assign(81, 0.5);
  g.values[4 * 9 + 4] = 5.0;  // single hotspot in the middle
  const std::string path = "/tmp/hotspot_bench_field.grid";
  write_grid_file(g, path);

  RunConfig c = tiny_config();
  c.field_path = path;
  const ResultTable table = run_matrix(c, single_matrix(c));
  REQUIRE(table.rows.size() == 1);
  CHECK(!table.rows[0].failed);
  std::remove(path.c_str());
}
