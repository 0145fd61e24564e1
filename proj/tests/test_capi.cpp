// Exercises the shared-library surface exactly as an external client would:
// only hotspot.h, no core headers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <string>

#include "hotspot.h"

namespace {

hs_config* tiny_config() {
  hs_config* c = nullptr;
  REQUIRE(hs_config_default(&c) == HS_OK);
  REQUIRE(hs_config_set(c, "field.width", "8") == HS_OK);
  REQUIRE(hs_config_set(c, "field.height", "8") == HS_OK);
  REQUIRE(hs_config_set(c, "field.num_bumps", "2") == HS_OK);
  REQUIRE(hs_config_set(c, "sensing.altitudes", "10,30") == HS_OK);
  REQUIRE(hs_config_set(c, "sensing.footprints", "2,4") == HS_OK);
  REQUIRE(hs_config_set(c, "sensing.pixels_per_side", "2") == HS_OK);
  REQUIRE(hs_config_set(c, "planner.budget", "30") == HS_OK);
  REQUIRE(hs_config_set(c, "bench.environments", "1") == HS_OK);
  REQUIRE(hs_config_set(c, "bench.trials", "1") == HS_OK);
  REQUIRE(hs_config_set(c, "bench.sweep_pixels", "20") == HS_OK);
  REQUIRE(hs_config_set(c, "bench.sweep_steps", "3") == HS_OK);
  REQUIRE(hs_config_set(c, "bench.sparsity", "16") == HS_OK);
  return c;
}

}  // namespace

TEST_CASE("config handles load, set, get and save") {
  hs_config* c = tiny_config();
  char* value = nullptr;
  CHECK(hs_config_get(c, "planner.budget", &value) == HS_OK);
  CHECK(std::string(value) == "30");
  hs_string_free(value);

  CHECK(hs_config_set(c, "planner.warp", "1") == HS_ERR_PARSE);
  CHECK(std::string(hs_last_error()).find("warp") != std::string::npos);
  CHECK(hs_config_set(c, "planner.budget", "oops") == HS_ERR_PARSE);

  // cross-field validation happens when the config is consumed
  CHECK(hs_config_set(c, "planner.budget", "-1") == HS_OK);
  CHECK(hs_config_save(c, "/tmp/hotspot_capi_invalid.cfg") == HS_ERR_PARSE);
  CHECK(hs_config_set(c, "planner.budget", "30") == HS_OK);

  const char* path = "/tmp/hotspot_capi.cfg";
  CHECK(hs_config_save(c, path) == HS_OK);
  hs_config* back = nullptr;
  CHECK(hs_config_load(path, &back) == HS_OK);
  char* round = nullptr;
  CHECK(hs_config_get(back, "field.width", &round) == HS_OK);
  CHECK(std::string(round) == "8");
  hs_string_free(round);
  hs_config_free(back);
  hs_config_free(c);
  std::remove(path);

  hs_config* missing = nullptr;
  CHECK(hs_config_load("/nonexistent.cfg", &missing) == HS_ERR_PARSE);
  CHECK(std::strlen(hs_last_error()) > 0);
}

TEST_CASE("null arguments are rejected") {
  CHECK(hs_config_default(nullptr) == HS_ERR_INVALID_ARGUMENT);
  CHECK(hs_field_load(nullptr, nullptr) == HS_ERR_INVALID_ARGUMENT);
  hs_field* f = nullptr;
  CHECK(hs_field_load("/nonexistent.grid", &f) == HS_ERR_IO);
}

TEST_CASE("field generation, evaluation and grid files") {
  hs_config* c = tiny_config();
  hs_field* field = nullptr;
  REQUIRE(hs_field_generate(c, 7, &field) == HS_OK);

  double x = 0, y = 0, v = 0;
  CHECK(hs_field_optimum(field, 0.1, &x, &y, &v) == HS_OK);
  CHECK(v == doctest::Approx(50.0).epsilon(1e-6));

  double at = -1;
  CHECK(hs_field_evaluate(field, x, y, &at) == HS_OK);
  CHECK(at == doctest::Approx(v).epsilon(1e-9));

  const char* path = "/tmp/hotspot_capi.grid";
  CHECK(hs_field_save(field, 0.2, path) == HS_OK);
  hs_field* loaded = nullptr;
  CHECK(hs_field_load(path, &loaded) == HS_OK);
  double lv = 0;
  CHECK(hs_field_evaluate(loaded, x, y, &lv) == HS_OK);
  CHECK(lv == doctest::Approx(v).epsilon(0.05));
  hs_field_free(loaded);
  hs_field_free(field);
  hs_config_free(c);
  std::remove(path);
}

TEST_CASE("episodes run through the c api") {
  hs_config* c = tiny_config();
  hs_field* field = nullptr;
  REQUIRE(hs_field_generate(c, 3, &field) == HS_OK);
  hs_grid* grid = nullptr;
  REQUIRE(hs_grid_build(c, &grid) == HS_OK);

  int arms = 0, test_points = 0;
  CHECK(hs_grid_counts(grid, &arms, &test_points) == HS_OK);
  CHECK(arms == 16 + 4);
  CHECK(test_points > 0);

  const char* summary_path = "/tmp/hotspot_capi_grid.csv";
  CHECK(hs_grid_write_summary(grid, summary_path) == HS_OK);
  std::remove(summary_path);

  hs_episode* ep = nullptr;
  REQUIRE(hs_episode_run(c, field, grid, 5, &ep) == HS_OK);
  double point = -1, arm = -1, spent = -1, gp = -1, rx = 0, ry = 0;
  int images = 0, steps = 0;
  CHECK(hs_episode_metrics(ep, &point, &arm) == HS_OK);
  CHECK(hs_episode_counts(ep, &images, &steps) == HS_OK);
  CHECK(hs_episode_spent(ep, &spent) == HS_OK);
  CHECK(hs_episode_gp_time(ep, &gp) == HS_OK);
  CHECK(hs_episode_result(ep, &rx, &ry) == HS_OK);
  CHECK(point >= 0.0);
  CHECK(point <= 101.0);
  CHECK(arm <= 100.0 + 1e-9);
  CHECK(images > 0);
  CHECK(steps == images);
  CHECK(spent <= 30.0 + 1e-9);
  CHECK(gp >= 0.0);

  const char* row_path = "/tmp/hotspot_capi_row.csv";
  const char* steps_path = "/tmp/hotspot_capi_steps.csv";
  CHECK(hs_episode_write_row(ep, c, row_path) == HS_OK);
  CHECK(hs_episode_write_steps(ep, steps_path) == HS_OK);
  std::remove(row_path);
  std::remove(steps_path);

  // deterministic across repeated runs with the same seed
  hs_episode* ep2 = nullptr;
  REQUIRE(hs_episode_run(c, field, grid, 5, &ep2) == HS_OK);
  double point2 = -2;
  CHECK(hs_episode_metrics(ep2, &point2, nullptr) == HS_OK);
  CHECK(point2 == point);

  hs_episode_free(ep2);
  hs_episode_free(ep);
  hs_grid_free(grid);
  hs_field_free(field);
  hs_config_free(c);
}

TEST_CASE("experiments produce tables and summaries") {
  hs_config* c = tiny_config();
  hs_table* table = nullptr;
  REQUIRE(hs_experiment_run(c, HS_EXPERIMENT_SPARSITY_SWEEP, 1, &table) == HS_OK);

  int rows = 0;
  CHECK(hs_table_num_rows(table, &rows) == HS_OK);
  CHECK(rows == 2);  // exact + one sparsity level

  char* text = nullptr;
  CHECK(hs_table_summary(table, &text) == HS_OK);
  CHECK(std::strlen(text) > 0);
  hs_string_free(text);

  const char* csv = "/tmp/hotspot_capi_table.csv";
  const char* timing = "/tmp/hotspot_capi_timing.csv";
  CHECK(hs_table_write_csv(table, csv) == HS_OK);
  CHECK(hs_table_write_timing_csv(table, timing) == HS_OK);
  std::remove(csv);
  std::remove(timing);
  hs_table_free(table);

  // generic tables have no timing series
  hs_table* budget = nullptr;
  hs_config_set(c, "bench.budgets", "20,30");
  REQUIRE(hs_experiment_run(c, HS_EXPERIMENT_BUDGET_SWEEP, 1, &budget) == HS_OK);
  CHECK(hs_table_write_timing_csv(budget, timing) == HS_ERR_INVALID_ARGUMENT);
  int budget_rows = 0;
  CHECK(hs_table_num_rows(budget, &budget_rows) == HS_OK);
  CHECK(budget_rows == 2);
  hs_table_free(budget);
  hs_config_free(c);
}
