#include "hotspot/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hotspot {

namespace {

int best_by_travel_then_id(const std::vector<int>& ids,
                           const std::vector<double>& values,
                           const ArmGrid& grid, const Vec3& from) {
  int best = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  double best_travel = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ids.size(); ++i) {
    const double travel = travel_time(from, grid.arm(ids[i]).position);
    if (values[i] > best_val ||
        (values[i] == best_val &&
         (travel < best_travel || (travel == best_travel && ids[i] < best)))) {
      best = ids[i];
      best_val = values[i];
      best_travel = travel;
    }
  }
  return best;
}

class BoustrophedonStrategy : public Strategy {
 public:
  explicit BoustrophedonStrategy(int level) : level_(level) {}

  int first_arm(const ArmGrid& grid, const Vec3&) const override {
    return boustrophedon_order(grid, level_).front();
  }

  std::optional<int> next_arm(EpisodeContext& ctx) override {
    if (order_.empty()) {
      order_ = boustrophedon_order(ctx.grid, level_);
      cursor_ = 1;  // first arm already visited
    }
    if (cursor_ >= order_.size()) return std::nullopt;  // sweep complete
    return order_[cursor_++];
  }

 private:
  int level_;
  std::vector<int> order_;
  size_t cursor_ = 0;
};

class GradientAscentStrategy : public Strategy {
 public:
  explicit GradientAscentStrategy(int level) : level_(level) {}

  int first_arm(const ArmGrid& grid, const Vec3& start) const override {
    return grid.nearest_arm_at_level(start, level_);
  }

  std::optional<int> next_arm(EpisodeContext& ctx) override {
    const Arm& cur = ctx.grid.arm(ctx.current_arm);
    const MeasurementBatch* batch = ctx.last_batch;
    if (!batch || batch->values.empty()) return ctx.current_arm;

    // least-squares plane v = a + gx*x + gy*y through the latest image
    Eigen::MatrixXd a(static_cast<Eigen::Index>(batch->values.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(batch->values.size()));
    for (size_t i = 0; i < batch->values.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      a(row, 0) = 1.0;
      a(row, 1) = batch->pixel_locations[i].x;
      a(row, 2) = batch->pixel_locations[i].y;
      b[row] = batch->values[i];
    }
    const Eigen::Matrix3d ata = a.transpose() * a;
    Eigen::LDLT<Eigen::Matrix3d> solver(ata);
    std::vector<int> neighbors = same_level_neighbors(ctx.grid, cur);
    if (solver.info() != Eigen::Success ||
        ata.determinant() < 1e-9 * std::pow(ata.trace() / 3.0, 3)) {
      // collinear pixels: no plane, take a seeded random neighbor
      if (neighbors.empty()) return ctx.current_arm;
      std::uniform_int_distribution<size_t> pick(0, neighbors.size() - 1);
      return neighbors[pick(ctx.rng)];
    }
    const Eigen::Vector3d coeff = solver.solve(a.transpose() * b);
    const double gx = coeff[1], gy = coeff[2];
    const double norm = std::hypot(gx, gy);
    if (norm < 1e-9) return ctx.current_arm;  // flat: stay and resample

    int best = ctx.current_arm;
    double best_dot = 0.0;
    for (int id : neighbors) {
      const Arm& n = ctx.grid.arm(id);
      const double dx = n.position.x - cur.position.x;
      const double dy = n.position.y - cur.position.y;
      const double len = std::hypot(dx, dy);
      const double dot = (dx * gx + dy * gy) / (len * norm);
      if (dot > best_dot) {
        best_dot = dot;
        best = id;
      }
    }
    return best;
  }

 private:
  static std::vector<int> same_level_neighbors(const ArmGrid& grid,
                                               const Arm& cur) {
    std::vector<int> out;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int id = grid.arm_id_at(cur.level, cur.ix + dx, cur.iy + dy);
        if (id >= 0) out.push_back(id);
      }
    }
    return out;
  }

  int level_;
};

class VarianceReductionStrategy : public Strategy {
 public:
  std::optional<int> next_arm(EpisodeContext& ctx) override {
    std::vector<int> all(ctx.grid.arms().size());
    std::iota(all.begin(), all.end(), 0);
    const std::vector<ArmScore> scores =
        arm_scores(ctx.engine, ctx.grid, VarianceMode::Cpv, 0.0, all);
    std::vector<double> values;
    values.reserve(scores.size());
    for (const ArmScore& s : scores) values.push_back(s.sigma_bar);
    const Vec3 from = ctx.grid.arm(ctx.current_arm).position;
    return best_by_travel_then_id(all, values, ctx.grid, from);
  }
};

class MutualInformationStrategy : public Strategy {
 public:
  std::optional<int> next_arm(EpisodeContext& ctx) override {
    std::vector<int> ids;
    std::vector<double> gains;
    ids.reserve(ctx.grid.arms().size());
    for (const Arm& a : ctx.grid.arms()) {
      ids.push_back(a.id);
      gains.push_back(mutual_information_gain(ctx.engine, a));
    }
    const Vec3 from = ctx.grid.arm(ctx.current_arm).position;
    return best_by_travel_then_id(ids, gains, ctx.grid, from);
  }
};

class BlockUclStrategy : public Strategy {
 public:
  explicit BlockUclStrategy(double growth) : growth_(std::max(1.0, growth)) {}

  std::optional<int> next_arm(EpisodeContext& ctx) override {
    if (images_in_block_ >= block_length()) {
      ++block_;
      images_in_block_ = 0;
    }
    if (images_in_block_ == 0) {
      // block boundary: re-select by the UCL index
      std::vector<int> all(ctx.grid.arms().size());
      std::iota(all.begin(), all.end(), 0);
      const double beta = beta_value(ctx.step, ctx.config.beta);
      const std::vector<ArmScore> scores =
          arm_scores(ctx.engine, ctx.grid, VarianceMode::Current, beta, all);
      std::vector<double> values;
      values.reserve(scores.size());
      for (const ArmScore& s : scores) values.push_back(s.score);
      const Vec3 from = ctx.grid.arm(ctx.current_arm).position;
      committed_ = best_by_travel_then_id(all, values, ctx.grid, from);
      ctx.last_score = values[static_cast<size_t>(committed_)];
    }
    ++images_in_block_;
    return committed_;
  }

 private:
  long block_length() const {
    return static_cast<long>(std::ceil(std::pow(growth_, block_)));
  }

  double growth_;
  int block_ = 1;  // the first image is block 0 of length 1
  long images_in_block_ = 0;
  int committed_ = -1;
};

}  // namespace

std::vector<int> boustrophedon_order(const ArmGrid& grid, int level) {
  const int nx = grid.arms_per_row(level);
  const int ny = grid.arms_per_col(level);
  std::vector<int> order;
  order.reserve(static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int i = 0; i < nx; ++i) {
      const int ix = (iy % 2 == 0) ? i : nx - 1 - i;
      order.push_back(grid.arm_id_at(level, ix, iy));
    }
  }
  return order;
}

double mutual_information_gain(const GpEngine& engine, const Arm& arm) {
  const double noise =
      engine.hyper().noise_variances.at(static_cast<size_t>(arm.level));
  if (!std::isfinite(noise)) return 0.0;
  Eigen::MatrixXd m = engine.covariance_block(arm.test_indices) / noise;
  m.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("mutual information factorization failed");
  }
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    logdet += std::log(llt.matrixL()(i, i));
  }
  return std::max(0.0, logdet);  // 2 * 0.5 * sum(log diag L)
}

std::unique_ptr<Strategy> make_baseline(const BaselineConfig& config) {
  switch (config.kind) {
    case BaselineKind::Boustrophedon:
      return std::make_unique<BoustrophedonStrategy>(config.fixed_level);
    case BaselineKind::GradientAscent:
      return std::make_unique<GradientAscentStrategy>(config.fixed_level);
    case BaselineKind::VarianceReduction:
      return std::make_unique<VarianceReductionStrategy>();
    case BaselineKind::MutualInformation:
      return std::make_unique<MutualInformationStrategy>();
    case BaselineKind::BlockUcl:
      return std::make_unique<BlockUclStrategy>(config.block_growth);
  }
  throw std::invalid_argument("unknown baseline kind");
}

}  // namespace hotspot
