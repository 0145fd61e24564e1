#pragma once

#include <string>
#include <vector>

#include "hotspot/common.hpp"
#include "hotspot/field.hpp"

namespace hotspot {

struct AltitudeLevel {
  double altitude = 0.0;        // m
  double footprint_side = 0.0;  // m, square footprint on the ground
  double noise_variance = 0.0;  // per-pixel measurement noise at this level
};

// Linear altitude-to-noise model: c0 + c1 * altitude.
struct NoiseModel {
  double c0 = 0.25;
  double c1 = 0.05;
};

double noise_variance_at(double altitude, const NoiseModel& model);

struct Arm {
  int id = -1;
  Vec3 position;
  int level = 0;
  int ix = 0;  // lattice column within the level
  int iy = 0;  // lattice row within the level
  std::vector<int> test_indices;  // global test points inside the footprint
};

// 3D lattice of candidate sensing locations plus the global test-point set
// (the deduplicated union of every arm's pixel-center grid). Immutable after
// build.
class ArmGrid {
 public:
  ArmGrid(Rect extent, std::vector<AltitudeLevel> levels, int pixels_per_side);

  const Rect& extent() const { return extent_; }
  const std::vector<AltitudeLevel>& levels() const { return levels_; }
  const std::vector<Arm>& arms() const { return arms_; }
  const Arm& arm(int id) const { return arms_.at(id); }
  const std::vector<Vec2>& test_points() const { return test_points_; }
  int pixels_per_side() const { return pixels_per_side_; }
  int arms_per_row(int level) const { return lattice_nx_.at(level); }
  int arms_per_col(int level) const { return lattice_ny_.at(level); }
  int level_arm_offset(int level) const { return level_offset_.at(level); }
  int arm_id_at(int level, int ix, int iy) const;

  // Pixel centers of one image from this arm, clamped to the extent.
  std::vector<Vec2> pixel_centers(const Arm& arm) const;

  int nearest_arm(const Vec3& p) const;
  int nearest_arm_at_level(const Vec3& p, int level) const;

  void write_summary_csv(const std::string& path) const;

 private:
  Rect extent_;
  std::vector<AltitudeLevel> levels_;
  std::vector<Arm> arms_;
  std::vector<Vec2> test_points_;
  std::vector<int> lattice_nx_;
  std::vector<int> lattice_ny_;
  std::vector<int> level_offset_;
  int pixels_per_side_ = 3;
};

struct MeasurementBatch {
  int arm_id = -1;
  std::vector<Vec2> pixel_locations;
  std::vector<double> values;
  double noise_variance = 0.0;  // shared by every pixel in the batch
};

MeasurementBatch take_image(const ScalarField& field, const Arm& arm,
                            const ArmGrid& grid, Rng& rng);

// Unit-speed travel: Euclidean distance in meters read as seconds.
double travel_time(const Vec3& a, const Vec3& b);

std::vector<AltitudeLevel> make_levels(const std::vector<double>& altitudes,
                                       const std::vector<double>& footprints,
                                       const NoiseModel& noise);

}  // namespace hotspot
