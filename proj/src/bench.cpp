#include "hotspot/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

namespace hotspot {

namespace {

std::string csv_double(double d) {
  std::ostringstream out;
  out.precision(17);
  out << d;
  return out.str();
}

struct Cell {
  int env = 0;
  int trial = 0;
  size_t strategy = 0;
  size_t budget = 0;
  size_t sparsity = 0;
};

}  // namespace

ScalarField build_field(const RunConfig& config, uint64_t seed) {
  if (!config.field_path.empty()) {
    return load_field_from_grid(config.field_path);
  }
  FieldConfig fc;
  fc.seed = seed;
  fc.extent = Rect{0.0, 0.0, config.field_width, config.field_height};
  fc.num_bumps = config.num_bumps;
  fc.global_max = config.global_max;
  fc.min_bump_separation = config.min_separation;
  fc.bump_width_min = config.bump_width_min;
  fc.bump_width_max = config.bump_width_max;
  fc.baseline = config.baseline;
  fc.cache_resolution = config.resolution;
  return generate_random_field(fc);
}

ArmGrid build_grid(const RunConfig& config) {
  const NoiseModel noise{config.noise_c0, config.noise_c1};
  Rect extent{0.0, 0.0, config.field_width, config.field_height};
  if (!config.field_path.empty()) {
    const ScalarField f = load_field_from_grid(config.field_path);
    extent = f.extent();
  }
  return ArmGrid(extent, make_levels(config.altitudes, config.footprints, noise),
                 config.pixels_per_side);
}

Hyperparams build_hyper(const RunConfig& config, const ArmGrid& grid) {
  Hyperparams h;
  h.length_scale = config.length_scale;
  h.signal_variance = config.signal_variance;
  h.jitter_scale = config.jitter_scale;
  for (const AltitudeLevel& lv : grid.levels()) {
    h.noise_variances.push_back(lv.noise_variance);
  }
  return h;
}

PlannerConfig build_planner_config(const RunConfig& config) {
  PlannerConfig p;
  p.variance_mode =
      config.variance_mode == "cv" ? VarianceMode::Current : VarianceMode::Cpv;
  p.window_radius = config.window;
  p.beta = BetaSchedule{config.beta_gamma, config.beta_rate, config.beta_offset};
  p.inference = config.inference == "sparse" ? InferenceKind::Sparse
                                             : InferenceKind::Exact;
  p.num_inducing = config.inducing;
  p.inducing_kmeans = config.inducing_method == "kmeans";
  p.sensing_time = config.sensing_time;
  p.budget = config.budget;
  p.start = Vec3{config.start_x, config.start_y, config.start_z};
  p.metric_resolution = config.resolution;
  return p;
}

StrategySpec strategy_from_config(const RunConfig& config) {
  StrategySpec s;
  s.name = config.strategy;
  s.variance_mode =
      config.variance_mode == "cv" ? VarianceMode::Current : VarianceMode::Cpv;
  s.window = config.window;
  s.beta = BetaSchedule{config.beta_gamma, config.beta_rate, config.beta_offset};
  s.beta_form = s.beta.increasing() ? "inc" : "dec";
  if (config.strategy == "mfgpucb") {
    s.is_baseline = false;
    return s;
  }
  s.is_baseline = true;
  s.baseline.fixed_level = config.fixed_level;
  s.baseline.block_growth = config.block_growth;
  if (config.strategy == "boustrophedon") {
    s.baseline.kind = BaselineKind::Boustrophedon;
  } else if (config.strategy == "gradient") {
    s.baseline.kind = BaselineKind::GradientAscent;
  } else if (config.strategy == "variance-reduction") {
    s.baseline.kind = BaselineKind::VarianceReduction;
  } else if (config.strategy == "mutual-information") {
    s.baseline.kind = BaselineKind::MutualInformation;
  } else if (config.strategy == "block-ucl") {
    s.baseline.kind = BaselineKind::BlockUcl;
  } else {
    throw ConfigError("unknown strategy '" + config.strategy + "'");
  }
  return s;
}

std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec) {
  if (spec.is_baseline) {
    return make_baseline(spec.baseline);
  }
  return std::make_unique<MfGpUcbStrategy>();
}

namespace {

TrialRow run_cell(const RunConfig& config, const ExperimentMatrix& matrix,
                  const ScalarField& field, const ArmGrid& grid,
                  const Hyperparams& hyper, const Cell& cell) {
  const StrategySpec& spec = matrix.strategies[cell.strategy];
  const double budget = matrix.budgets[cell.budget];
  const int sparsity = matrix.sparsity[cell.sparsity];
  const uint64_t env_seed = matrix.env_seed_base + static_cast<uint64_t>(cell.env);

  TrialRow row;
  row.env_seed = env_seed;
  row.trial_seed = static_cast<uint64_t>(cell.trial);
  row.strategy = spec.name;
  row.budget = budget;
  row.sparsity = sparsity;
  if (spec.is_baseline) {
    switch (spec.baseline.kind) {
      case BaselineKind::VarianceReduction:
        row.variance_mode = "cpv";
        break;
      case BaselineKind::BlockUcl:
        row.variance_mode = "cv";
        break;
      default:
        row.variance_mode = "-";
    }
    row.window = "off";
    row.beta_form = spec.baseline.kind == BaselineKind::BlockUcl ? spec.beta_form : "-";
  } else {
    row.variance_mode = spec.variance_mode == VarianceMode::Cpv ? "cpv" : "cv";
    row.window = spec.window > 0 ? std::to_string(spec.window) : "off";
    row.beta_form = spec.beta_form;
  }

  try {
    PlannerConfig pc = build_planner_config(config);
    pc.variance_mode = spec.variance_mode;
    pc.window_radius = spec.window;
    pc.beta = spec.beta;
    pc.budget = budget;
    pc.inference = sparsity > 0 ? InferenceKind::Sparse : InferenceKind::Exact;
    if (sparsity > 0) pc.num_inducing = sparsity;

    // Stream split on (environment, trial, strategy) only: matched budgets
    // and sparsity levels share measurement noise.
    Rng rng = make_rng(derive_seed(env_seed, row.trial_seed, fnv1a(spec.name)));
    auto strategy = make_strategy(spec);
    const EpisodeTrace trace =
        run_episode(field, grid, hyper, pc, *strategy, rng);
    row.images = trace.images;
    row.point_metric = trace.point_metric;
    row.arm_metric = trace.arm_metric;
    row.gp_time_ms = trace.gp_seconds * 1000.0;
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
    row.point_metric = std::numeric_limits<double>::quiet_NaN();
    row.arm_metric = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace

ResultTable run_matrix(const RunConfig& config, const ExperimentMatrix& matrix) {
  if (matrix.environments < 1 || matrix.trials < 1 || matrix.strategies.empty() ||
      matrix.budgets.empty() || matrix.sparsity.empty()) {
    throw std::invalid_argument("experiment matrix must have at least one cell");
  }

  std::vector<Cell> cells;
  for (int e = 0; e < matrix.environments; ++e) {
    for (int t = 0; t < matrix.trials; ++t) {
      for (size_t s = 0; s < matrix.strategies.size(); ++s) {
        for (size_t b = 0; b < matrix.budgets.size(); ++b) {
          for (size_t sp = 0; sp < matrix.sparsity.size(); ++sp) {
            cells.push_back({e, t, s, b, sp});
          }
        }
      }
    }
  }

  // Shared per-environment fixtures (fields are immutable, grids likewise).
  std::vector<ScalarField> fields;
  fields.reserve(static_cast<size_t>(matrix.environments));
  for (int e = 0; e < matrix.environments; ++e) {
    fields.push_back(
        build_field(config, matrix.env_seed_base + static_cast<uint64_t>(e)));
  }
  const ArmGrid grid = build_grid(config);
  const Hyperparams hyper = build_hyper(config, grid);

  ResultTable table;
  table.rows.resize(cells.size());
  const int workers = std::max(
      1, matrix.workers > 0
             ? matrix.workers
             : static_cast<int>(std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (size_t i = 0; i < cells.size(); ++i) {
      table.rows[i] = run_cell(config, matrix, fields[cells[i].env], grid, hyper,
                               cells[i]);
    }
  } else {
    std::atomic<size_t> next{0};
    auto work = [&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        table.rows[i] = run_cell(config, matrix, fields[cells[i].env], grid,
                                 hyper, cells[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return table;
}

std::vector<AggregateRow> ResultTable::aggregates() const {
  std::map<std::tuple<std::string, double, int>, std::vector<const TrialRow*>>
      groups;
  for (const TrialRow& r : rows) {
    groups[{r.strategy, r.budget, r.sparsity}].push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, members] : groups) {
    AggregateRow a;
    a.strategy = std::get<0>(key);
    a.budget = std::get<1>(key);
    a.sparsity = std::get<2>(key);
    double sp = 0, sa = 0, st = 0, si = 0;
    std::vector<double> points, arms;
    for (const TrialRow* r : members) {
      if (r->failed) continue;
      points.push_back(r->point_metric);
      arms.push_back(r->arm_metric);
      sp += r->point_metric;
      sa += r->arm_metric;
      st += r->gp_time_ms;
      si += r->images;
    }
    a.samples = static_cast<int>(points.size());
    if (a.samples > 0) {
      a.mean_point = sp / a.samples;
      a.mean_arm = sa / a.samples;
      a.mean_gp_time_ms = st / a.samples;
      a.mean_images = si / a.samples;
      if (a.samples > 1) {
        double vp = 0, va = 0;
        for (double p : points) vp += (p - a.mean_point) * (p - a.mean_point);
        for (double m : arms) va += (m - a.mean_arm) * (m - a.mean_arm);
        a.sigma_point = std::sqrt(vp / (a.samples - 1));
        a.sigma_arm = std::sqrt(va / (a.samples - 1));
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

void ResultTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write results: " + path);
  }
  out << "env_seed,trial_seed,strategy,variance_mode,window,beta_form,budget,S,"
         "images,point_metric,arm_metric,gp_time_ms\n";
  for (const TrialRow& r : rows) {
    out << r.env_seed << ',' << r.trial_seed << ',' << r.strategy << ','
        << r.variance_mode << ',' << r.window << ',' << r.beta_form << ','
        << csv_double(r.budget) << ',' << r.sparsity << ',' << r.images << ','
        << csv_double(r.point_metric) << ',' << csv_double(r.arm_metric) << ','
        << csv_double(r.gp_time_ms) << '\n';
  }
}

void ResultTable::write_timing_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write timing series: " + path);
  }
  out << "mode,S,step,train_size,update_seconds\n";
  for (const TimingRow& r : timing) {
    out << r.mode << ',' << r.sparsity << ',' << r.step << ',' << r.train_size
        << ',' << csv_double(r.update_seconds) << '\n';
  }
}

std::string ResultTable::summary() const {
  std::ostringstream out;
  out << std::left << std::setw(24) << "strategy" << std::right << std::setw(9)
      << "budget" << std::setw(7) << "S" << std::setw(5) << "n" << std::setw(10)
      << "point" << std::setw(8) << "+-" << std::setw(10) << "arm" << std::setw(8)
      << "+-" << std::setw(12) << "gp_ms" << std::setw(9) << "images" << '\n';
  for (const AggregateRow& a : aggregates()) {
    out << std::left << std::setw(24) << a.strategy << std::right << std::fixed
        << std::setprecision(1) << std::setw(9) << a.budget << std::setw(7)
        << a.sparsity << std::setw(5) << a.samples << std::setprecision(2)
        << std::setw(10) << a.mean_point << std::setw(8) << a.sigma_point
        << std::setw(10) << a.mean_arm << std::setw(8) << a.sigma_arm
        << std::setw(12) << a.mean_gp_time_ms << std::setprecision(1)
        << std::setw(9) << a.mean_images << '\n';
  }
  int failures = 0;
  for (const TrialRow& r : rows) failures += r.failed ? 1 : 0;
  if (failures > 0) {
    out << failures << " cell(s) failed\n";
  }
  return out.str();
}

std::vector<StrategySpec> ablation_strategies(const RunConfig& config) {
  // The four published beta schedules; window variants reuse them.
  const BetaSchedule cv_dec{1.5, -0.05, 0.0};
  const BetaSchedule cpv_dec{10.0, -0.05, 0.0};
  const BetaSchedule cv_inc{-0.5, -0.05, 0.5};
  const BetaSchedule cpv_inc{-10.0, -0.05, 10.0};
  const int r = std::max(1, config.window);

  std::vector<StrategySpec> out;
  auto add = [&](const std::string& name, VarianceMode mode, int window,
                 const BetaSchedule& beta, const std::string& form) {
    StrategySpec s;
    s.name = name;
    s.variance_mode = mode;
    s.window = window;
    s.beta = beta;
    s.beta_form = form;
    out.push_back(std::move(s));
  };
  add("cv-bdec", VarianceMode::Current, 0, cv_dec, "dec");
  add("cpv-bdec", VarianceMode::Cpv, 0, cpv_dec, "dec");
  add("cv-binc", VarianceMode::Current, 0, cv_inc, "inc");
  add("cpv-binc", VarianceMode::Cpv, 0, cpv_inc, "inc");
  add("dcv-bdec", VarianceMode::Current, r, cv_dec, "dec");
  add("dcpv-bdec", VarianceMode::Cpv, r, cpv_dec, "dec");
  add("dcv-binc", VarianceMode::Current, r, cv_inc, "inc");
  add("dcpv-binc", VarianceMode::Cpv, r, cpv_inc, "inc");
  return out;
}

namespace {

ExperimentMatrix base_matrix(const RunConfig& config) {
  ExperimentMatrix m;
  m.environments = config.environments;
  m.trials = config.trials;
  m.env_seed_base = config.env_seed_base;
  m.budgets = {config.budget};
  m.sparsity = {0};
  m.workers = config.workers;
  return m;
}

StrategySpec flagship(const RunConfig& config) {
  StrategySpec s;
  s.name = "dcpv-binc";
  s.variance_mode = VarianceMode::Cpv;
  s.window = std::max(1, config.window);
  s.beta = BetaSchedule{-10.0, -0.05, 10.0};
  s.beta_form = "inc";
  return s;
}

}  // namespace

ExperimentMatrix ablation_matrix(const RunConfig& config) {
  ExperimentMatrix m = base_matrix(config);
  m.strategies = ablation_strategies(config);
  return m;
}

ExperimentMatrix comparison_matrix(const RunConfig& config) {
  ExperimentMatrix m = base_matrix(config);
  m.strategies.push_back(flagship(config));
  const char* level_names[] = {"low", "mid", "high"};
  const int levels = static_cast<int>(config.altitudes.size());
  for (int lv = 0; lv < levels; ++lv) {
    StrategySpec s;
    s.name = std::string("boustrophedon-") +
             (lv < 3 ? level_names[lv] : std::to_string(lv));
    s.is_baseline = true;
    s.baseline.kind = BaselineKind::Boustrophedon;
    s.baseline.fixed_level = lv;
    m.strategies.push_back(s);
  }
  for (int lv = 0; lv < levels; ++lv) {
    StrategySpec s;
    s.name = std::string("gradient-") +
             (lv < 3 ? level_names[lv] : std::to_string(lv));
    s.is_baseline = true;
    s.baseline.kind = BaselineKind::GradientAscent;
    s.baseline.fixed_level = lv;
    m.strategies.push_back(s);
  }
  StrategySpec vr;
  vr.name = "variance-reduction";
  vr.is_baseline = true;
  vr.baseline.kind = BaselineKind::VarianceReduction;
  m.strategies.push_back(vr);
  StrategySpec mi;
  mi.name = "mutual-information";
  mi.is_baseline = true;
  mi.baseline.kind = BaselineKind::MutualInformation;
  m.strategies.push_back(mi);
  StrategySpec ucl;
  ucl.name = "block-ucl";
  ucl.is_baseline = true;
  ucl.baseline.kind = BaselineKind::BlockUcl;
  ucl.baseline.block_growth = config.block_growth;
  ucl.beta = BetaSchedule{config.beta_gamma, config.beta_rate, config.beta_offset};
  ucl.beta_form = ucl.beta.increasing() ? "inc" : "dec";
  m.strategies.push_back(ucl);
  return m;
}

ExperimentMatrix budget_sweep_matrix(const RunConfig& config) {
  ExperimentMatrix m = base_matrix(config);
  m.strategies = {flagship(config)};
  m.budgets = config.budgets;
  if (!std::is_sorted(m.budgets.begin(), m.budgets.end())) {
    throw std::invalid_argument("bench.budgets must be sorted ascending");
  }
  return m;
}

ExperimentMatrix sparsity_matrix(const RunConfig& config) {
  ExperimentMatrix m = base_matrix(config);
  m.strategies = {flagship(config)};
  m.sparsity = {0};
  for (int s : config.sparsity) {
    if (s > 0) m.sparsity.push_back(s);
  }
  return m;
}

std::vector<TimingRow> sparsity_timing(const RunConfig& config) {
  const Rect extent{0.0, 0.0, config.field_width, config.field_height};
  Rng rng = make_rng(derive_seed(config.env_seed_base, 0, fnv1a("sparsity-timing")));
  std::uniform_real_distribution<double> ux(extent.x0, extent.x0 + extent.width);
  std::uniform_real_distribution<double> uy(extent.y0, extent.y0 + extent.height);
  std::normal_distribution<double> val(0.0, 1.0);

  // Synthetic image batches: sweep_pixels measurements each, level noise
  // cycling through the configured altitudes.
  const NoiseModel noise{config.noise_c0, config.noise_c1};
  std::vector<MeasurementBatch> batches;
  for (int k = 0; k < config.sweep_steps; ++k) {
    MeasurementBatch b;
    b.arm_id = k;
    const size_t lv = static_cast<size_t>(k) % config.altitudes.size();
    b.noise_variance = noise_variance_at(config.altitudes[lv], noise);
    for (int j = 0; j < config.sweep_pixels; ++j) {
      b.pixel_locations.push_back({ux(rng), uy(rng)});
      b.values.push_back(10.0 + val(rng));
    }
    batches.push_back(std::move(b));
  }

  // A modest fixed query set: the timing target is the update itself.
  const std::vector<Vec2> query = select_inducing_lattice(extent, 400);
  std::vector<int> query_idx(query.size());
  std::iota(query_idx.begin(), query_idx.end(), 0);

  Hyperparams hyper;
  hyper.length_scale = config.length_scale;
  hyper.signal_variance = config.signal_variance;
  hyper.jitter_scale = config.jitter_scale;
  for (double a : config.altitudes) {
    hyper.noise_variances.push_back(noise_variance_at(a, noise));
  }

  std::vector<TimingRow> out;
  auto run_series = [&](InferenceKind kind, int s) {
    std::vector<Vec2> inducing;
    if (kind == InferenceKind::Sparse) {
      inducing = select_inducing_lattice(extent, s);
    }
    GpEngine engine(query, hyper, kind, std::move(inducing));
    for (int k = 0; k < config.sweep_steps; ++k) {
      const double before = engine.gp_seconds();
      engine.add_batch(batches[static_cast<size_t>(k)],
                       static_cast<int>(static_cast<size_t>(k) %
                                        config.altitudes.size()));
      engine.refresh();
      engine.mean(query_idx);
      engine.variance(query_idx);
      TimingRow row;
      row.mode = kind == InferenceKind::Sparse ? "sparse" : "exact";
      row.sparsity = s;
      row.step = k + 1;
      row.train_size = static_cast<int>(engine.train().size());
      row.update_seconds = engine.gp_seconds() - before;
      out.push_back(std::move(row));
    }
  };

  run_series(InferenceKind::Exact, 0);
  for (int s : config.sparsity) {
    if (s > 0) run_series(InferenceKind::Sparse, s);
  }
  return out;
}

EpisodeTrace run_single(const RunConfig& config, uint64_t env_seed,
                        uint64_t trial_seed) {
  const ScalarField field = build_field(config, env_seed);
  const ArmGrid grid = build_grid(config);
  const Hyperparams hyper = build_hyper(config, grid);
  const StrategySpec spec = strategy_from_config(config);
  PlannerConfig pc = build_planner_config(config);
  Rng rng = make_rng(derive_seed(env_seed, trial_seed, fnv1a(spec.name)));
  auto strategy = make_strategy(spec);
  return run_episode(field, grid, hyper, pc, *strategy, rng);
}

}  // namespace hotspot
