#include "hotspot/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace hotspot {

namespace {

constexpr double kDedupTol = 1e-9;

// Quantized key for deduplicating test points within kDedupTol.
std::pair<int64_t, int64_t> point_key(const Vec2& p) {
  return {static_cast<int64_t>(std::llround(p.x / kDedupTol)),
          static_cast<int64_t>(std::llround(p.y / kDedupTol))};
}

}  // namespace

double noise_variance_at(double altitude, const NoiseModel& model) {
  if (!(altitude > 0.0)) {
    throw std::invalid_argument("altitude must be positive");
  }
  if (model.c0 < 0.0 || model.c1 < 0.0) {
    throw std::invalid_argument("noise model coefficients must be non-negative");
  }
  return model.c0 + model.c1 * altitude;
}

std::vector<AltitudeLevel> make_levels(const std::vector<double>& altitudes,
                                       const std::vector<double>& footprints,
                                       const NoiseModel& noise) {
  if (altitudes.size() != footprints.size() || altitudes.empty()) {
    throw std::invalid_argument("altitudes and footprints must match and be non-empty");
  }
  std::vector<AltitudeLevel> levels;
  levels.reserve(altitudes.size());
  for (size_t i = 0; i < altitudes.size(); ++i) {
    levels.push_back({altitudes[i], footprints[i],
                      noise_variance_at(altitudes[i], noise)});
  }
  std::sort(levels.begin(), levels.end(),
            [](const AltitudeLevel& a, const AltitudeLevel& b) {
              return a.altitude < b.altitude;
            });
  return levels;
}

ArmGrid::ArmGrid(Rect extent, std::vector<AltitudeLevel> levels,
                 int pixels_per_side)
    : extent_(extent), levels_(std::move(levels)), pixels_per_side_(pixels_per_side) {
  if (levels_.empty()) {
    throw std::invalid_argument("at least one altitude level required");
  }
  if (pixels_per_side_ < 1) {
    throw std::invalid_argument("pixels_per_side must be at least 1");
  }
  for (size_t i = 0; i < levels_.size(); ++i) {
    const auto& lv = levels_[i];
    if (!(lv.altitude > 0.0) || !(lv.footprint_side > 0.0)) {
      throw std::invalid_argument("levels must have positive altitude and footprint");
    }
    if (i > 0 && levels_[i].altitude <= levels_[i - 1].altitude) {
      throw std::invalid_argument("levels must be sorted by increasing altitude");
    }
    if (i > 0 && levels_[i].noise_variance < levels_[i - 1].noise_variance) {
      throw std::invalid_argument("noise variance must be non-decreasing with altitude");
    }
  }
  if (levels_.front().footprint_side > extent_.width + kDedupTol ||
      levels_.front().footprint_side > extent_.height + kDedupTol) {
    throw std::invalid_argument("lowest-level footprint larger than the extent");
  }

  // Arms tile each level edge to edge: spacing equals the footprint side,
  // ceil-counted so the union of footprints covers the whole extent.
  std::map<std::pair<int64_t, int64_t>, int> seen;
  for (size_t lv = 0; lv < levels_.size(); ++lv) {
    const double side = levels_[lv].footprint_side;
    const int nx = static_cast<int>(std::ceil(extent_.width / side - kDedupTol));
    const int ny = static_cast<int>(std::ceil(extent_.height / side - kDedupTol));
    lattice_nx_.push_back(nx);
    lattice_ny_.push_back(ny);
    level_offset_.push_back(static_cast<int>(arms_.size()));
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        Arm a;
        a.id = static_cast<int>(arms_.size());
        a.level = static_cast<int>(lv);
        a.ix = ix;
        a.iy = iy;
        a.position = {extent_.x0 + (ix + 0.5) * side,
                      extent_.y0 + (iy + 0.5) * side, levels_[lv].altitude};
        arms_.push_back(std::move(a));
      }
    }
  }

  // Global test set: union of all arms' pixel-center grids, deduplicated.
  for (auto& a : arms_) {
    for (const Vec2& p : pixel_centers(a)) {
      auto [it, inserted] = seen.emplace(point_key(p),
                                         static_cast<int>(test_points_.size()));
      if (inserted) {
        test_points_.push_back(p);
      }
    }
  }

  // I_i: indices of every test point inside the arm's footprint.
  for (auto& a : arms_) {
    const double half = levels_[a.level].footprint_side / 2.0;
    for (int l = 0; l < static_cast<int>(test_points_.size()); ++l) {
      const Vec2& p = test_points_[l];
      if (std::abs(p.x - a.position.x) <= half + kDedupTol &&
          std::abs(p.y - a.position.y) <= half + kDedupTol) {
        a.test_indices.push_back(l);
      }
    }
    if (a.test_indices.empty()) {
      throw std::logic_error("arm with empty test index set");
    }
  }
}

int ArmGrid::arm_id_at(int level, int ix, int iy) const {
  if (level < 0 || level >= static_cast<int>(levels_.size())) return -1;
  if (ix < 0 || ix >= lattice_nx_[level]) return -1;
  if (iy < 0 || iy >= lattice_ny_[level]) return -1;
  return level_offset_[level] + iy * lattice_nx_[level] + ix;
}

std::vector<Vec2> ArmGrid::pixel_centers(const Arm& arm) const {
  const double side = levels_[arm.level].footprint_side;
  const double pixel = side / pixels_per_side_;
  std::vector<Vec2> centers;
  centers.reserve(static_cast<size_t>(pixels_per_side_) * pixels_per_side_);
  for (int py = 0; py < pixels_per_side_; ++py) {
    for (int px = 0; px < pixels_per_side_; ++px) {
      Vec2 c{arm.position.x - side / 2.0 + (px + 0.5) * pixel,
             arm.position.y - side / 2.0 + (py + 0.5) * pixel};
      centers.push_back(extent_.clamp(c));
    }
  }
  return centers;
}

int ArmGrid::nearest_arm(const Vec3& p) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Arm& a : arms_) {
    const double d = travel_time(p, a.position);
    if (d < best_d) {
      best_d = d;
      best = a.id;
    }
  }
  return best;
}

int ArmGrid::nearest_arm_at_level(const Vec3& p, int level) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Arm& a : arms_) {
    if (a.level != level) continue;
    const double d = travel_time(p, a.position);
    if (d < best_d) {
      best_d = d;
      best = a.id;
    }
  }
  return best;
}

void ArmGrid::write_summary_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write arm grid summary: " + path);
  }
  out << "arm_id,x,y,altitude,level,footprint_side,noise_variance,num_test_points\n";
  out.precision(17);
  for (const Arm& a : arms_) {
    out << a.id << ',' << a.position.x << ',' << a.position.y << ','
        << a.position.z << ',' << a.level << ',' << levels_[a.level].footprint_side
        << ',' << levels_[a.level].noise_variance << ',' << a.test_indices.size()
        << '\n';
  }
}

MeasurementBatch take_image(const ScalarField& field, const Arm& arm,
                            const ArmGrid& grid, Rng& rng) {
  MeasurementBatch batch;
  batch.arm_id = arm.id;
  batch.noise_variance = grid.levels()[arm.level].noise_variance;
  batch.pixel_locations = grid.pixel_centers(arm);
  batch.values.reserve(batch.pixel_locations.size());
  const double sigma = std::sqrt(batch.noise_variance);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const Vec2& p : batch.pixel_locations) {
    double v = field.evaluate(p);
    if (sigma > 0.0) {
      v += sigma * noise(rng);
    }
    batch.values.push_back(v);
  }
  return batch;
}

double travel_time(const Vec3& a, const Vec3& b) { return distance(a, b); }

}  // namespace hotspot
