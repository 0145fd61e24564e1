#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hotspot/common.hpp"

namespace hotspot {

struct FieldConfig {
  uint64_t seed = 1;
  Rect extent{0.0, 0.0, 20.0, 20.0};
  int num_bumps = 6;
  double global_max = 50.0;
  double min_bump_separation = 2.5;
  double bump_width_min = 1.5;
  double bump_width_max = 3.5;
  double baseline = 0.0;
  double cache_resolution = 0.1;
};

// Dense row-major samples of a field; also the on-disk grid file payload.
struct GridData {
  int width_cells = 0;
  int height_cells = 0;
  double cell_size = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<double> values;  // row-major, values[row * width_cells + col]
};

// Ground-truth intensity over a 2D rectangle. Either an analytic Gaussian
// mixture (generated fields) or a bilinear interpolant of a loaded grid.
// Immutable after construction; shareable across concurrent episodes.
class ScalarField {
 public:
  struct Bump {
    Vec2 center;
    double amplitude = 0.0;
    double width = 0.0;
  };

  static ScalarField gaussian_mixture(Rect extent, std::vector<Bump> bumps,
                                      double baseline,
                                      double cache_resolution = 0.1);
  static ScalarField from_grid(GridData grid);

  // Clamps out-of-extent queries to the boundary.
  double evaluate(const Vec2& x) const;
  // Throws std::out_of_range instead of clamping.
  double evaluate_strict(const Vec2& x) const;

  // Brute-force argmax over a dense grid at the given resolution. Ties are
  // broken by the lowest row-major grid index.
  std::pair<Vec2, double> global_optimum(double resolution) const;

  const Rect& extent() const { return extent_; }
  const std::vector<Bump>& bumps() const { return bumps_; }
  const GridData& cached_grid() const { return cache_; }
  bool is_grid_backed() const { return grid_backed_; }

  GridData sample_to_grid(double cell_size) const;

 private:
  ScalarField() = default;
  double evaluate_clamped(const Vec2& x) const;

  Rect extent_;
  std::vector<Bump> bumps_;
  double baseline_ = 0.0;
  GridData cache_;
  bool grid_backed_ = false;
};

ScalarField generate_random_field(const FieldConfig& config);

ScalarField load_field_from_grid(const std::string& path);
void save_field_to_grid(const ScalarField& field, double cell_size,
                        const std::string& path);

GridData read_grid_file(const std::string& path);
void write_grid_file(const GridData& grid, const std::string& path);

}  // namespace hotspot
