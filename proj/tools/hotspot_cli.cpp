// Benchmark CLI for the hotspot planning library. Talks to the core purely
// through the C API in hotspot.h.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "hotspot.h"

namespace {

struct ConfigDeleter {
  void operator()(hs_config* c) const { hs_config_free(c); }
};
struct FieldDeleter {
  void operator()(hs_field* f) const { hs_field_free(f); }
};
struct GridDeleter {
  void operator()(hs_grid* g) const { hs_grid_free(g); }
};
struct EpisodeDeleter {
  void operator()(hs_episode* e) const { hs_episode_free(e); }
};
struct TableDeleter {
  void operator()(hs_table* t) const { hs_table_free(t); }
};

using ConfigPtr = std::unique_ptr<hs_config, ConfigDeleter>;
using FieldPtr = std::unique_ptr<hs_field, FieldDeleter>;
using GridPtr = std::unique_ptr<hs_grid, GridDeleter>;
using EpisodePtr = std::unique_ptr<hs_episode, EpisodeDeleter>;
using TablePtr = std::unique_ptr<hs_table, TableDeleter>;

[[noreturn]] void fail(hs_status status, const char* what) {
  std::fprintf(stderr, "error: %s: %s (%s)\n", what, hs_last_error(),
               hs_status_name(status));
  std::exit(1);
}

void check(hs_status status, const char* what) {
  if (status != HS_OK) fail(status, what);
}

ConfigPtr load_or_default(const std::string& config_path) {
  hs_config* raw = nullptr;
  if (config_path.empty()) {
    check(hs_config_default(&raw), "creating default config");
  } else {
    check(hs_config_load(config_path.c_str(), &raw), "loading config");
  }
  return ConfigPtr(raw);
}

uint64_t config_seed(const hs_config* config) {
  char* text = nullptr;
  check(hs_config_get(config, "field.seed", &text), "reading field.seed");
  const uint64_t seed = std::strtoull(text, nullptr, 10);
  hs_string_free(text);
  return seed;
}

void run_experiment(const std::string& config_path, hs_experiment kind,
                    const std::string& out, int workers, bool verbose) {
  ConfigPtr config = load_or_default(config_path);
  hs_table* raw = nullptr;
  check(hs_experiment_run(config.get(), kind, workers, &raw), "running experiment");
  TablePtr table(raw);
  if (!out.empty()) {
    check(hs_table_write_csv(table.get(), out.c_str()), "writing results");
    if (kind == HS_EXPERIMENT_SPARSITY_SWEEP) {
      const std::string timing = out + ".timing.csv";
      check(hs_table_write_timing_csv(table.get(), timing.c_str()),
            "writing timing series");
      if (verbose) std::printf("timing series: %s\n", timing.c_str());
    }
  }
  char* summary = nullptr;
  check(hs_table_summary(table.get(), &summary), "formatting summary");
  std::fputs(summary, stdout);
  hs_string_free(summary);
  if (verbose && !out.empty()) {
    int rows = 0;
    hs_table_num_rows(table.get(), &rows);
    std::printf("%d rows -> %s\n", rows, out.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity GP-UCB hotspot identification benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
  bool verbose = false;

  auto add_common = [&](CLI::App* cmd, bool with_workers) {
    cmd->add_option("--config", config_path, "config file (key = value sections)");
    cmd->add_option("--out", out, "output CSV path");
    cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_given = true;
    });
    cmd->add_flag("--verbose", verbose, "extra diagnostics");
    if (with_workers) {
      cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
    }
  };

  CLI::App* gen = app.add_subcommand("gen-field", "generate a field, write grid file");
  add_common(gen, false);

  CLI::App* run = app.add_subcommand("run", "run a single planning episode");
  add_common(run, false);

  CLI::App* ablation = app.add_subcommand(
      "ablation", "planner variants: CV/CPV x window x beta schedule");
  add_common(ablation, true);

  CLI::App* compare =
      app.add_subcommand("compare", "flagship planner against the baselines");
  add_common(compare, true);

  CLI::App* budget =
      app.add_subcommand("budget-sweep", "point metric across budgets");
  add_common(budget, true);

  CLI::App* sparsity = app.add_subcommand(
      "sparsity-sweep", "exact vs sparse inference: metrics and update times");
  add_common(sparsity, true);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    ConfigPtr config = load_or_default(config_path);
    const uint64_t field_seed = seed_given ? seed : config_seed(config.get());
    hs_field* raw = nullptr;
    check(hs_field_generate(config.get(), field_seed, &raw), "generating field");
    FieldPtr field(raw);
    double x = 0, y = 0, value = 0;
    check(hs_field_optimum(field.get(), 0.1, &x, &y, &value), "scanning optimum");
    std::printf("field seed %llu: optimum %.3f at (%.2f, %.2f)\n",
                static_cast<unsigned long long>(field_seed), value, x, y);
    if (!out.empty()) {
      char* res = nullptr;
      check(hs_config_get(config.get(), "field.resolution", &res),
            "reading resolution");
      const double cell = std::strtod(res, nullptr);
      hs_string_free(res);
      check(hs_field_save(field.get(), cell, out.c_str()), "writing grid file");
      std::printf("grid file: %s\n", out.c_str());
    }
    return 0;
  }

  if (run->parsed()) {
    ConfigPtr config = load_or_default(config_path);
    const uint64_t env_seed = seed_given ? seed : config_seed(config.get());
    hs_field* raw_field = nullptr;
    check(hs_field_generate(config.get(), env_seed, &raw_field), "building field");
    FieldPtr field(raw_field);
    hs_grid* raw_grid = nullptr;
    check(hs_grid_build(config.get(), &raw_grid), "building arm grid");
    GridPtr grid(raw_grid);
    if (verbose && !out.empty()) {
      const std::string grid_csv = out + ".grid.csv";
      check(hs_grid_write_summary(grid.get(), grid_csv.c_str()),
            "writing grid summary");
      std::printf("grid summary: %s\n", grid_csv.c_str());
    }
    hs_episode* raw_ep = nullptr;
    check(hs_episode_run(config.get(), field.get(), grid.get(), env_seed, &raw_ep),
          "running episode");
    EpisodePtr episode(raw_ep);
    double point = 0, arm = 0, spent = 0, gp = 0, x = 0, y = 0;
    int images = 0, steps = 0;
    hs_episode_metrics(episode.get(), &point, &arm);
    hs_episode_counts(episode.get(), &images, &steps);
    hs_episode_spent(episode.get(), &spent);
    hs_episode_gp_time(episode.get(), &gp);
    hs_episode_result(episode.get(), &x, &y);
    std::printf(
        "episode seed %llu: %d images, %.1f s spent, x_alg (%.2f, %.2f), "
        "point %.2f%%, arm %.2f%%, gp %.1f ms\n",
        static_cast<unsigned long long>(env_seed), images, spent, x, y, point,
        arm, gp * 1000.0);
    if (!out.empty()) {
      check(hs_episode_write_row(episode.get(), config.get(), out.c_str()),
            "writing episode row");
      if (verbose) {
        const std::string steps_csv = out + ".steps.csv";
        check(hs_episode_write_steps(episode.get(), steps_csv.c_str()),
              "writing step log");
        std::printf("step log: %s\n", steps_csv.c_str());
      }
    }
    return 0;
  }

  if (ablation->parsed()) {
    run_experiment(config_path, HS_EXPERIMENT_ABLATION, out, workers, verbose);
  } else if (compare->parsed()) {
    run_experiment(config_path, HS_EXPERIMENT_COMPARE, out, workers, verbose);
  } else if (budget->parsed()) {
    run_experiment(config_path, HS_EXPERIMENT_BUDGET_SWEEP, out, workers, verbose);
  } else if (sparsity->parsed()) {
    run_experiment(config_path, HS_EXPERIMENT_SPARSITY_SWEEP, out, workers,
                   verbose);
  }
  return 0;
}
