#pragma once

#include <string>
#include <vector>

#include "hotspot/common.hpp"

namespace hotspot {

// Full run configuration, mirrored one to one by the key = value config file
// (sections per module). Enumerated options are kept as validated strings so
// a loaded file round-trips exactly.
struct RunConfig {
  // [field]
  uint64_t field_seed = 1;
  double field_width = 20.0;
  double field_height = 20.0;
  int num_bumps = 6;
  double global_max = 50.0;
  double min_separation = 2.5;
  double bump_width_min = 1.5;
  double bump_width_max = 3.5;
  double baseline = 0.0;
  double resolution = 0.1;
  std::string field_path;  // load a grid file instead of generating

  // [sensing]
  std::vector<double> altitudes{10.0, 40.0, 70.0};
  std::vector<double> footprints{1.0, 4.0, 7.0};
  int pixels_per_side = 3;
  double noise_c0 = 0.25;
  double noise_c1 = 0.05;

  // [gp]
  double length_scale = 2.0;
  double signal_variance = 100.0;
  double jitter_scale = 1e-8;

  // [planner]
  std::string strategy = "mfgpucb";
  std::string variance_mode = "cpv";  // cv | cpv
  int window = 1;                     // 0 = off
  double beta_gamma = -10.0;
  double beta_rate = -0.05;
  double beta_offset = 10.0;
  std::string inference = "exact";  // exact | sparse
  int inducing = 200;
  std::string inducing_method = "lattice";  // lattice | kmeans
  double sensing_time = 2.0;
  double budget = 100.0;
  double start_x = 0.0;
  double start_y = 0.0;
  double start_z = 0.0;
  int fixed_level = 0;
  double block_growth = 2.0;

  // [bench]
  int environments = 20;
  int trials = 5;
  uint64_t env_seed_base = 1000;
  std::vector<double> budgets{50.0, 100.0, 150.0, 200.0};
  std::vector<int> sparsity{100, 200, 400};
  int sweep_pixels = 646;
  int sweep_steps = 15;
  int workers = 1;

  bool operator==(const RunConfig&) const = default;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig parse_config(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);
std::string emit_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

// Cross-field consistency checks; throws ConfigError. Runs automatically on
// parse, load and save.
void validate_config(const RunConfig& config, const std::string& origin = "config");

// Applies one "section.key" override; throws ConfigError on unknown keys or
// malformed values. Cross-field validation is deferred so related keys can
// be overridden in any order.
void set_config_value(RunConfig& config, const std::string& dotted_key,
                      const std::string& value);
std::string get_config_value(const RunConfig& config,
                             const std::string& dotted_key);

}  // namespace hotspot
