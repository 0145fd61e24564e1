#include "hotspot.h"

#include <cstring>
#include <exception>
#include <string>

#include "hotspot/bench.hpp"
#include "hotspot/config.hpp"
#include "hotspot/field.hpp"
#include "hotspot/planner.hpp"
#include "hotspot/sensing.hpp"

namespace {

thread_local std::string g_last_error;

struct hs_episode_impl {
  hotspot::EpisodeTrace trace;
  std::string strategy;
};

struct hs_table_impl {
  hotspot::ResultTable table;
};

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
hs_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const hotspot::ConfigError& e) {
    g_last_error = e.what();
    return HS_ERR_PARSE;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return HS_ERR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    g_last_error = e.what();
    return HS_ERR_INVALID_ARGUMENT;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    const std::string what = e.what();
    if (what.find("cannot") != std::string::npos ||
        what.find("file") != std::string::npos) {
      return HS_ERR_IO;
    }
    return HS_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HS_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return HS_ERR_UNKNOWN;
  }
}

hs_status require(bool ok, const char* msg) {
  if (!ok) {
    g_last_error = msg;
    return HS_ERR_INVALID_ARGUMENT;
  }
  return HS_OK;
}

const hotspot::RunConfig& cfg(const hs_config* c) {
  return *reinterpret_cast<const hotspot::RunConfig*>(c);
}
hotspot::RunConfig& cfg(hs_config* c) {
  return *reinterpret_cast<hotspot::RunConfig*>(c);
}
const hotspot::ScalarField& fld(const hs_field* f) {
  return *reinterpret_cast<const hotspot::ScalarField*>(f);
}
const hotspot::ArmGrid& grd(const hs_grid* g) {
  return *reinterpret_cast<const hotspot::ArmGrid*>(g);
}

}  // namespace

extern "C" {

const char* hs_status_name(hs_status status) {
  switch (status) {
    case HS_OK:
      return "ok";
    case HS_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case HS_ERR_PARSE:
      return "parse error";
    case HS_ERR_IO:
      return "io error";
    case HS_ERR_NUMERIC:
      return "numeric error";
    case HS_ERR_UNKNOWN:
      return "unknown error";
  }
  return "bad status";
}

const char* hs_last_error(void) { return g_last_error.c_str(); }

void hs_string_free(char* text) { std::free(text); }

hs_status hs_config_default(hs_config** out) {
  if (hs_status s = require(out != nullptr, "out is null")) return s;
  return guarded([&] {
    *out = reinterpret_cast<hs_config*>(new hotspot::RunConfig());
    return HS_OK;
  });
}

hs_status hs_config_load(const char* path, hs_config** out) {
  if (hs_status s = require(path && out, "path or out is null")) return s;
  return guarded([&] {
    auto config = new hotspot::RunConfig(hotspot::load_config(path));
    *out = reinterpret_cast<hs_config*>(config);
    return HS_OK;
  });
}

hs_status hs_config_save(const hs_config* config, const char* path) {
  if (hs_status s = require(config && path, "config or path is null")) return s;
  return guarded([&] {
    hotspot::save_config(cfg(config), path);
    return HS_OK;
  });
}

hs_status hs_config_set(hs_config* config, const char* key, const char* value) {
  if (hs_status s = require(config && key && value, "null argument")) return s;
  return guarded([&] {
    hotspot::set_config_value(cfg(config), key, value);
    return HS_OK;
  });
}

hs_status hs_config_get(const hs_config* config, const char* key, char** out) {
  if (hs_status s = require(config && key && out, "null argument")) return s;
  return guarded([&] {
    *out = dup_string(hotspot::get_config_value(cfg(config), key));
    return HS_OK;
  });
}

void hs_config_free(hs_config* config) {
  delete reinterpret_cast<hotspot::RunConfig*>(config);
}

hs_status hs_field_generate(const hs_config* config, uint64_t seed,
                            hs_field** out) {
  if (hs_status s = require(config && out, "config or out is null")) return s;
  return guarded([&] {
    hotspot::validate_config(cfg(config));
    auto field =
        new hotspot::ScalarField(hotspot::build_field(cfg(config), seed));
    *out = reinterpret_cast<hs_field*>(field);
    return HS_OK;
  });
}

hs_status hs_field_load(const char* path, hs_field** out) {
  if (hs_status s = require(path && out, "path or out is null")) return s;
  return guarded([&] {
    auto field =
        new hotspot::ScalarField(hotspot::load_field_from_grid(path));
    *out = reinterpret_cast<hs_field*>(field);
    return HS_OK;
  });
}

hs_status hs_field_save(const hs_field* field, double cell_size,
                        const char* path) {
  if (hs_status s = require(field && path, "field or path is null")) return s;
  return guarded([&] {
    hotspot::save_field_to_grid(fld(field), cell_size, path);
    return HS_OK;
  });
}

hs_status hs_field_evaluate(const hs_field* field, double x, double y,
                            double* value) {
  if (hs_status s = require(field && value, "field or value is null")) return s;
  return guarded([&] {
    *value = fld(field).evaluate({x, y});
    return HS_OK;
  });
}

hs_status hs_field_optimum(const hs_field* field, double resolution, double* x,
                           double* y, double* value) {
  if (hs_status s = require(field && x && y && value, "null argument")) return s;
  return guarded([&] {
    const auto [p, v] = fld(field).global_optimum(resolution);
    *x = p.x;
    *y = p.y;
    *value = v;
    return HS_OK;
  });
}

void hs_field_free(hs_field* field) {
  delete reinterpret_cast<hotspot::ScalarField*>(field);
}

hs_status hs_grid_build(const hs_config* config, hs_grid** out) {
  if (hs_status s = require(config && out, "config or out is null")) return s;
  return guarded([&] {
    hotspot::validate_config(cfg(config));
    auto grid = new hotspot::ArmGrid(hotspot::build_grid(cfg(config)));
    *out = reinterpret_cast<hs_grid*>(grid);
    return HS_OK;
  });
}

hs_status hs_grid_counts(const hs_grid* grid, int* num_arms,
                         int* num_test_points) {
  if (hs_status s = require(grid != nullptr, "grid is null")) return s;
  if (num_arms) *num_arms = static_cast<int>(grd(grid).arms().size());
  if (num_test_points) {
    *num_test_points = static_cast<int>(grd(grid).test_points().size());
  }
  return HS_OK;
}

hs_status hs_grid_write_summary(const hs_grid* grid, const char* path) {
  if (hs_status s = require(grid && path, "grid or path is null")) return s;
  return guarded([&] {
    grd(grid).write_summary_csv(path);
    return HS_OK;
  });
}

void hs_grid_free(hs_grid* grid) {
  delete reinterpret_cast<hotspot::ArmGrid*>(grid);
}

hs_status hs_episode_run(const hs_config* config, const hs_field* field,
                         const hs_grid* grid, uint64_t seed, hs_episode** out) {
  if (hs_status s = require(config && field && grid && out, "null argument")) {
    return s;
  }
  return guarded([&] {
    const hotspot::RunConfig& c = cfg(config);
    hotspot::validate_config(c);
    const hotspot::StrategySpec spec = hotspot::strategy_from_config(c);
    hotspot::PlannerConfig pc = hotspot::build_planner_config(c);
    const hotspot::Hyperparams hyper = hotspot::build_hyper(c, grd(grid));
    hotspot::Rng rng = hotspot::make_rng(
        hotspot::derive_seed(seed, 0, hotspot::fnv1a(spec.name)));
    auto strategy = hotspot::make_strategy(spec);
    auto episode = new hs_episode_impl{
        hotspot::run_episode(fld(field), grd(grid), hyper, pc, *strategy, rng),
        spec.name};
    *out = reinterpret_cast<hs_episode*>(episode);
    return HS_OK;
  });
}

hs_status hs_episode_metrics(const hs_episode* episode, double* point_metric,
                             double* arm_metric) {
  if (hs_status s = require(episode != nullptr, "episode is null")) return s;
  const auto* e = reinterpret_cast<const hs_episode_impl*>(episode);
  if (point_metric) *point_metric = e->trace.point_metric;
  if (arm_metric) *arm_metric = e->trace.arm_metric;
  return HS_OK;
}

hs_status hs_episode_counts(const hs_episode* episode, int* images, int* steps) {
  if (hs_status s = require(episode != nullptr, "episode is null")) return s;
  const auto* e = reinterpret_cast<const hs_episode_impl*>(episode);
  if (images) *images = e->trace.images;
  if (steps) *steps = static_cast<int>(e->trace.steps.size());
  return HS_OK;
}

hs_status hs_episode_result(const hs_episode* episode, double* x, double* y) {
  if (hs_status s = require(episode != nullptr, "episode is null")) return s;
  const auto* e = reinterpret_cast<const hs_episode_impl*>(episode);
  if (x) *x = e->trace.x_alg.x;
  if (y) *y = e->trace.x_alg.y;
  return HS_OK;
}

hs_status hs_episode_spent(const hs_episode* episode, double* seconds) {
  if (hs_status s = require(episode && seconds, "null argument")) return s;
  *seconds = reinterpret_cast<const hs_episode_impl*>(episode)->trace.spent;
  return HS_OK;
}

hs_status hs_episode_gp_time(const hs_episode* episode, double* seconds) {
  if (hs_status s = require(episode && seconds, "null argument")) return s;
  *seconds = reinterpret_cast<const hs_episode_impl*>(episode)->trace.gp_seconds;
  return HS_OK;
}

hs_status hs_episode_write_row(const hs_episode* episode,
                               const hs_config* config, const char* path) {
  if (hs_status s = require(episode && config && path, "null argument")) return s;
  return guarded([&] {
    const auto* e = reinterpret_cast<const hs_episode_impl*>(episode);
    const hotspot::RunConfig& c = cfg(config);
    hotspot::ResultTable table;
    hotspot::TrialRow row;
    row.env_seed = c.field_seed;
    row.trial_seed = 0;
    row.strategy = e->strategy;
    row.variance_mode = c.strategy == "mfgpucb" ? c.variance_mode : "-";
    row.window =
        c.strategy == "mfgpucb" && c.window > 0 ? std::to_string(c.window) : "off";
    row.beta_form = c.beta_gamma < 0 ? "inc" : "dec";
    row.budget = c.budget;
    row.sparsity = c.inference == "sparse" ? c.inducing : 0;
    row.images = e->trace.images;
    row.point_metric = e->trace.point_metric;
    row.arm_metric = e->trace.arm_metric;
    row.gp_time_ms = e->trace.gp_seconds * 1000.0;
    table.rows.push_back(std::move(row));
    table.write_csv(path);
    return HS_OK;
  });
}

hs_status hs_episode_write_steps(const hs_episode* episode, const char* path) {
  if (hs_status s = require(episode && path, "null argument")) return s;
  return guarded([&] {
    reinterpret_cast<const hs_episode_impl*>(episode)->trace.write_steps_csv(path);
    return HS_OK;
  });
}

void hs_episode_free(hs_episode* episode) {
  delete reinterpret_cast<hs_episode_impl*>(episode);
}

hs_status hs_experiment_run(const hs_config* config, hs_experiment experiment,
                            int workers, hs_table** out) {
  if (hs_status s = require(config && out, "config or out is null")) return s;
  return guarded([&] {
    const hotspot::RunConfig& c = cfg(config);
    hotspot::validate_config(c);
    hotspot::ExperimentMatrix matrix;
    switch (experiment) {
      case HS_EXPERIMENT_ABLATION:
        matrix = hotspot::ablation_matrix(c);
        break;
      case HS_EXPERIMENT_COMPARE:
        matrix = hotspot::comparison_matrix(c);
        break;
      case HS_EXPERIMENT_BUDGET_SWEEP:
        matrix = hotspot::budget_sweep_matrix(c);
        break;
      case HS_EXPERIMENT_SPARSITY_SWEEP:
        matrix = hotspot::sparsity_matrix(c);
        break;
      default:
        throw std::invalid_argument("unknown experiment id");
    }
    if (workers > 0) matrix.workers = workers;
    auto table = new hs_table_impl{hotspot::run_matrix(c, matrix)};
    if (experiment == HS_EXPERIMENT_SPARSITY_SWEEP) {
      table->table.timing = hotspot::sparsity_timing(c);
    }
    *out = reinterpret_cast<hs_table*>(table);
    return HS_OK;
  });
}

hs_status hs_table_write_csv(const hs_table* table, const char* path) {
  if (hs_status s = require(table && path, "table or path is null")) return s;
  return guarded([&] {
    reinterpret_cast<const hs_table_impl*>(table)->table.write_csv(path);
    return HS_OK;
  });
}

hs_status hs_table_write_timing_csv(const hs_table* table, const char* path) {
  if (hs_status s = require(table && path, "table or path is null")) return s;
  const auto* t = reinterpret_cast<const hs_table_impl*>(table);
  if (t->table.timing.empty()) {
    g_last_error = "table has no timing series";
    return HS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    t->table.write_timing_csv(path);
    return HS_OK;
  });
}

hs_status hs_table_num_rows(const hs_table* table, int* rows) {
  if (hs_status s = require(table && rows, "table or rows is null")) return s;
  *rows = static_cast<int>(
      reinterpret_cast<const hs_table_impl*>(table)->table.rows.size());
  return HS_OK;
}

hs_status hs_table_summary(const hs_table* table, char** out) {
  if (hs_status s = require(table && out, "table or out is null")) return s;
  return guarded([&] {
    *out = dup_string(
        reinterpret_cast<const hs_table_impl*>(table)->table.summary());
    return HS_OK;
  });
}

void hs_table_free(hs_table* table) {
  delete reinterpret_cast<hs_table_impl*>(table);
}

}  // extern "C"
