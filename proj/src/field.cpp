#include "hotspot/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hotspot {

namespace {

void validate_grid(const GridData& g) {
  if (g.width_cells < 2 || g.height_cells < 2) {
    throw std::invalid_argument("grid must be at least 2x2 cells");
  }
  if (!(g.cell_size > 0.0)) {
    throw std::invalid_argument("grid cell size must be positive");
  }
  if (g.values.size() !=
      static_cast<size_t>(g.width_cells) * static_cast<size_t>(g.height_cells)) {
    throw std::invalid_argument("grid value count does not match header");
  }
  for (double v : g.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("grid contains non-finite values");
    }
    if (v < 0.0) {
      throw std::invalid_argument("grid contains negative intensities");
    }
  }
}

}  // namespace

ScalarField ScalarField::gaussian_mixture(Rect extent, std::vector<Bump> bumps,
                                          double baseline,
                                          double cache_resolution) {
  if (!(extent.width > 0.0) || !(extent.height > 0.0)) {
    throw std::invalid_argument("field extent must be positive");
  }
  if (baseline < 0.0) {
    throw std::invalid_argument("baseline must be non-negative");
  }
  ScalarField f;
  f.extent_ = extent;
  f.bumps_ = std::move(bumps);
  f.baseline_ = baseline;
  f.grid_backed_ = false;
  if (cache_resolution > 0.0) {
    f.cache_ = f.sample_to_grid(cache_resolution);
  }
  return f;
}

ScalarField ScalarField::from_grid(GridData grid) {
  validate_grid(grid);
  ScalarField f;
  f.extent_ = Rect{grid.origin_x, grid.origin_y,
                   (grid.width_cells - 1) * grid.cell_size,
                   (grid.height_cells - 1) * grid.cell_size};
  f.cache_ = std::move(grid);
  f.grid_backed_ = true;
  return f;
}

double ScalarField::evaluate_clamped(const Vec2& q) const {
  if (grid_backed_) {
    const GridData& g = cache_;
    double fx = (q.x - g.origin_x) / g.cell_size;
    double fy = (q.y - g.origin_y) / g.cell_size;
    fx = std::min(std::max(fx, 0.0), static_cast<double>(g.width_cells - 1));
    fy = std::min(std::max(fy, 0.0), static_cast<double>(g.height_cells - 1));
    int c0 = std::min(static_cast<int>(fx), g.width_cells - 2);
    int r0 = std::min(static_cast<int>(fy), g.height_cells - 2);
    const double tx = fx - c0;
    const double ty = fy - r0;
    const double v00 = g.values[r0 * g.width_cells + c0];
    const double v01 = g.values[r0 * g.width_cells + c0 + 1];
    const double v10 = g.values[(r0 + 1) * g.width_cells + c0];
    const double v11 = g.values[(r0 + 1) * g.width_cells + c0 + 1];
    return (1 - ty) * ((1 - tx) * v00 + tx * v01) +
           ty * ((1 - tx) * v10 + tx * v11);
  }
  double v = baseline_;
  for (const Bump& b : bumps_) {
    v += b.amplitude * std::exp(-sq_dist(q, b.center) / (2.0 * b.width * b.width));
  }
  return v;
}

double ScalarField::evaluate(const Vec2& x) const {
  return evaluate_clamped(extent_.clamp(x));
}

double ScalarField::evaluate_strict(const Vec2& x) const {
  if (!extent_.contains(x)) {
    throw std::out_of_range("query point outside field extent");
  }
  return evaluate_clamped(x);
}

std::pair<Vec2, double> ScalarField::global_optimum(double resolution) const {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("resolution must be positive");
  }
  const int nx = static_cast<int>(std::floor(extent_.width / resolution + 1e-9)) + 1;
  const int ny = static_cast<int>(std::floor(extent_.height / resolution + 1e-9)) + 1;
  Vec2 best{extent_.x0, extent_.y0};
  double best_v = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < ny; ++r) {
    for (int c = 0; c < nx; ++c) {
      const Vec2 p{extent_.x0 + c * resolution, extent_.y0 + r * resolution};
      const double v = evaluate_clamped(p);
      if (v > best_v) {
        best_v = v;
        best = p;
      }
    }
  }
  return {best, best_v};
}

GridData ScalarField::sample_to_grid(double cell_size) const {
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("cell size must be positive");
  }
  GridData g;
  g.cell_size = cell_size;
  g.origin_x = extent_.x0;
  g.origin_y = extent_.y0;
  g.width_cells = static_cast<int>(std::floor(extent_.width / cell_size + 1e-9)) + 1;
  g.height_cells = static_cast<int>(std::floor(extent_.height / cell_size + 1e-9)) + 1;
  g.values.resize(static_cast<size_t>(g.width_cells) * g.height_cells);
  for (int r = 0; r < g.height_cells; ++r) {
    for (int c = 0; c < g.width_cells; ++c) {
      const Vec2 p{g.origin_x + c * cell_size, g.origin_y + r * cell_size};
      g.values[static_cast<size_t>(r) * g.width_cells + c] = evaluate_clamped(p);
    }
  }
  return g;
}

ScalarField generate_random_field(const FieldConfig& config) {
  if (config.num_bumps < 1) {
    throw std::invalid_argument("num_bumps must be at least 1");
  }
  if (!(config.global_max > 0.0)) {
    throw std::invalid_argument("global_max must be positive");
  }
  if (!(config.extent.width > 0.0) || !(config.extent.height > 0.0)) {
    throw std::invalid_argument("field extent must be positive");
  }

  Rng rng = make_rng(config.seed);
  std::uniform_real_distribution<double> ux(config.extent.x0,
                                            config.extent.x0 + config.extent.width);
  std::uniform_real_distribution<double> uy(config.extent.y0,
                                            config.extent.y0 + config.extent.height);
  std::uniform_real_distribution<double> uw(config.bump_width_min,
                                            config.bump_width_max);
  std::uniform_real_distribution<double> ua(0.4, 1.0);

  std::vector<ScalarField::Bump> bumps;
  double separation = config.min_bump_separation;
  int attempts = 0;
  while (static_cast<int>(bumps.size()) < config.num_bumps) {
    Vec2 c{ux(rng), uy(rng)};
    bool ok = true;
    for (const auto& b : bumps) {
      if (sq_dist(c, b.center) < separation * separation) {
        ok = false;
        break;
      }
    }
    if (ok) {
      bumps.push_back({c, ua(rng), uw(rng)});
      attempts = 0;
    } else if (++attempts > 200) {
      // Extent too crowded for the requested separation; relax it rather
      // than loop forever.
      separation *= 0.5;
      attempts = 0;
    }
  }

  ScalarField raw = ScalarField::gaussian_mixture(config.extent, bumps,
                                                  config.baseline,
                                                  config.cache_resolution);
  const double raw_max = raw.global_optimum(config.cache_resolution).second;
  const double scale = config.global_max / raw_max;
  for (auto& b : bumps) {
    b.amplitude *= scale;
  }
  return ScalarField::gaussian_mixture(config.extent, std::move(bumps),
                                       config.baseline * scale,
                                       config.cache_resolution);
}

GridData read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open grid file: " + path);
  }
  GridData g;
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("grid file is empty: " + path);
  }
  std::istringstream hs(header);
  if (!(hs >> g.width_cells >> g.height_cells >> g.cell_size >> g.origin_x >>
        g.origin_y)) {
    throw std::runtime_error("malformed grid header in " + path);
  }
  std::string trailing;
  if (hs >> trailing) {
    throw std::runtime_error("malformed grid header in " + path);
  }
  if (g.width_cells < 2 || g.height_cells < 2 || !(g.cell_size > 0.0)) {
    throw std::runtime_error("invalid grid dimensions in " + path);
  }
  const size_t count =
      static_cast<size_t>(g.width_cells) * static_cast<size_t>(g.height_cells);
  g.values.reserve(count);
  double v;
  while (in >> v) {
    g.values.push_back(v);
  }
  if (g.values.size() != count) {
    throw std::runtime_error("grid value count mismatch in " + path);
  }
  return g;
}

void write_grid_file(const GridData& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write grid file: " + path);
  }
  out.precision(17);
  out << grid.width_cells << ' ' << grid.height_cells << ' ' << grid.cell_size
      << ' ' << grid.origin_x << ' ' << grid.origin_y << '\n';
  for (int r = 0; r < grid.height_cells; ++r) {
    for (int c = 0; c < grid.width_cells; ++c) {
      if (c) out << ' ';
      out << grid.values[static_cast<size_t>(r) * grid.width_cells + c];
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

ScalarField load_field_from_grid(const std::string& path) {
  GridData g = read_grid_file(path);
  return ScalarField::from_grid(std::move(g));
}

void save_field_to_grid(const ScalarField& field, double cell_size,
                        const std::string& path) {
  write_grid_file(field.sample_to_grid(cell_size), path);
}

}  // namespace hotspot
