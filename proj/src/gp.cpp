#include "hotspot/gp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace hotspot {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

MatrixXd to_matrix(const std::vector<Vec2>& pts) {
  MatrixXd m(static_cast<Eigen::Index>(pts.size()), 2);
  for (size_t i = 0; i < pts.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = pts[i].x;
    m(static_cast<Eigen::Index>(i), 1) = pts[i].y;
  }
  return m;
}

MatrixXd kernel_from_coords(const MatrixXd& a, const MatrixXd& b,
                            const Hyperparams& hyper) {
  const VectorXd a_sq = a.rowwise().squaredNorm();
  const VectorXd b_sq = b.rowwise().squaredNorm();
  MatrixXd d = -2.0 * a * b.transpose();
  d.colwise() += a_sq;
  d.rowwise() += b_sq.transpose();
  const double inv = -0.5 / (hyper.length_scale * hyper.length_scale);
  return hyper.signal_variance * (d.array().max(0.0) * inv).exp();
}

void check_hyper(const Hyperparams& hyper) {
  if (!(hyper.length_scale > 0.0) || !(hyper.signal_variance > 0.0)) {
    throw std::invalid_argument("length scale and signal variance must be positive");
  }
}

VectorXd clamp_variance(VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) v[i] = 0.0;
  }
  return v;
}

// Pool-adjacent-violators projection to a non-decreasing sequence.
std::vector<double> isotonic(std::vector<double> v) {
  const size_t n = v.size();
  std::vector<double> level(n);
  std::vector<size_t> count(n);
  size_t blocks = 0;
  for (size_t i = 0; i < n; ++i) {
    level[blocks] = v[i];
    count[blocks] = 1;
    ++blocks;
    while (blocks > 1 && level[blocks - 2] > level[blocks - 1]) {
      const double merged = (level[blocks - 2] * count[blocks - 2] +
                             level[blocks - 1] * count[blocks - 1]) /
                            (count[blocks - 2] + count[blocks - 1]);
      count[blocks - 2] += count[blocks - 1];
      level[blocks - 2] = merged;
      --blocks;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (size_t b = 0; b < blocks; ++b) {
    out.insert(out.end(), count[b], level[b]);
  }
  return out;
}

}  // namespace

void TrainingSet::append(const MeasurementBatch& batch, int level_index) {
  X.insert(X.end(), batch.pixel_locations.begin(), batch.pixel_locations.end());
  Y.insert(Y.end(), batch.values.begin(), batch.values.end());
  noise.insert(noise.end(), batch.values.size(), batch.noise_variance);
  level.insert(level.end(), batch.values.size(), level_index);
}

double se_kernel(const Vec2& a, const Vec2& b, const Hyperparams& hyper) {
  check_hyper(hyper);
  return hyper.signal_variance *
         std::exp(-sq_dist(a, b) / (2.0 * hyper.length_scale * hyper.length_scale));
}

MatrixXd kernel_matrix(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                       const Hyperparams& hyper) {
  check_hyper(hyper);
  return kernel_from_coords(to_matrix(a), to_matrix(b), hyper);
}

GpEngine::GpEngine(std::vector<Vec2> test_points, Hyperparams hyper,
                   InferenceKind kind, std::vector<Vec2> inducing)
    : test_points_(std::move(test_points)),
      hyper_(std::move(hyper)),
      kind_(kind),
      inducing_(std::move(inducing)) {
  check_hyper(hyper_);
  if (kind_ == InferenceKind::Sparse) {
    if (inducing_.empty()) {
      throw std::invalid_argument("sparse inference requires inducing points");
    }
    const auto s = static_cast<Eigen::Index>(inducing_.size());
    MatrixXd kuu = kernel_matrix(inducing_, inducing_, hyper_);
    kuu.diagonal().array() += hyper_.jitter();
    llt_kuu_.compute(kuu);
    if (llt_kuu_.info() != Eigen::Success) {
      throw std::runtime_error("inducing kernel matrix factorization failed");
    }
    sigma_m_ = kuu;
    b_m_ = VectorXd::Zero(s);
  }
}

void GpEngine::set_training(TrainingSet train) {
  train_ = std::move(train);
  if (train_.X.size() != train_.Y.size() || train_.X.size() != train_.noise.size()) {
    throw std::invalid_argument("training set arrays must have equal lengths");
  }
  if (kind_ == InferenceKind::Sparse) {
    MatrixXd kuu = kernel_matrix(inducing_, inducing_, hyper_);
    kuu.diagonal().array() += hyper_.jitter();
    sigma_m_ = kuu;
    b_m_.setZero();
    accumulate_sparse(0);
  }
  dirty_ = true;
}

void GpEngine::add_batch(const MeasurementBatch& batch, int level_index) {
  const size_t first = train_.size();
  train_.append(batch, level_index);
  if (kind_ == InferenceKind::Sparse) {
    const double t0 = now_seconds();
    accumulate_sparse(first);
    gp_seconds_ += now_seconds() - t0;
  }
  dirty_ = true;
}

void GpEngine::accumulate_sparse(size_t first_row) {
  const size_t n = train_.size();
  if (first_row >= n) return;
  std::vector<Vec2> pts(train_.X.begin() + static_cast<long>(first_row),
                        train_.X.end());
  const MatrixXd kub = kernel_matrix(inducing_, pts, hyper_);
  const MatrixXd lu_inv_kub = llt_kuu_.matrixL().solve(kub);
  VectorXd lambda(static_cast<Eigen::Index>(pts.size()));
  for (size_t j = 0; j < pts.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const double qff = lu_inv_kub.col(col).squaredNorm();
    const double noise = train_.noise[first_row + j];
    lambda[col] = std::max(hyper_.signal_variance - qff + noise,
                           1e-12 * hyper_.signal_variance);
  }
  const MatrixXd kub_scaled = kub * lambda.cwiseInverse().asDiagonal();
  sigma_m_.noalias() += kub_scaled * kub.transpose();
  VectorXd y(static_cast<Eigen::Index>(pts.size()));
  for (size_t j = 0; j < pts.size(); ++j) {
    y[static_cast<Eigen::Index>(j)] = train_.Y[first_row + j];
  }
  b_m_.noalias() += kub_scaled * y;
}

double GpEngine::refresh() const {
  if (!dirty_) return 0.0;
  const double t0 = now_seconds();
  v_all_ready_ = false;
  if (kind_ == InferenceKind::Exact) {
    const auto n = static_cast<Eigen::Index>(train_.size());
    if (n == 0) {
      // nothing to factorize
    } else {
      MatrixXd a = kernel_matrix(train_.X, train_.X, hyper_);
      for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) += train_.noise[static_cast<size_t>(i)] + hyper_.jitter();
      }
      llt_.compute(a);
      if (llt_.info() != Eigen::Success) {
        throw std::runtime_error(
            "kernel matrix factorization failed (degenerate training set)");
      }
    }
  } else {
    // 0.5*(S + S^T) guards against drift from repeated rank updates.
    const MatrixXd sym = 0.5 * (sigma_m_ + sigma_m_.transpose());
    llt_sigma_.compute(sym);
    if (llt_sigma_.info() != Eigen::Success) {
      throw std::runtime_error("sparse inducing system factorization failed");
    }
    w_m_ = llt_sigma_.solve(b_m_);
  }
  dirty_ = false;
  const double dt = now_seconds() - t0;
  gp_seconds_ += dt;
  return dt;
}

MatrixXd GpEngine::test_kernel(const std::vector<int>& test_idx,
                               const std::vector<Vec2>& against) const {
  std::vector<Vec2> pts;
  pts.reserve(test_idx.size());
  for (int i : test_idx) pts.push_back(test_points_.at(static_cast<size_t>(i)));
  return kernel_matrix(against, pts, hyper_);
}

const MatrixXd& GpEngine::exact_v_all() const {
  if (!v_all_ready_) {
    v_all_ = llt_.matrixL().solve(kernel_matrix(train_.X, test_points_, hyper_));
    v_all_ready_ = true;
  }
  return v_all_;
}

const MatrixXd& GpEngine::prior_block(const std::vector<int>& test_idx) const {
  auto it = prior_blocks_.find(test_idx);
  if (it == prior_blocks_.end()) {
    std::vector<Vec2> pts;
    pts.reserve(test_idx.size());
    for (int i : test_idx) pts.push_back(test_points_.at(static_cast<size_t>(i)));
    it = prior_blocks_.emplace(test_idx, kernel_matrix(pts, pts, hyper_)).first;
  }
  return it->second;
}

VectorXd GpEngine::mean(const std::vector<int>& test_idx) const {
  refresh();
  const double t0 = now_seconds();
  VectorXd out;
  if (kind_ == InferenceKind::Exact) {
    if (train_.size() == 0) {
      out = VectorXd::Zero(static_cast<Eigen::Index>(test_idx.size()));
    } else {
      // mu = K(T,X) alpha = (L^-1 K(X,T))^T (L^-1 y)
      const MatrixXd& v_all = exact_v_all();
      const VectorXd w = llt_.matrixL().solve(
          Eigen::Map<const VectorXd>(train_.Y.data(),
                                     static_cast<Eigen::Index>(train_.Y.size())));
      out.resize(static_cast<Eigen::Index>(test_idx.size()));
      for (size_t i = 0; i < test_idx.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = v_all.col(test_idx[i]).dot(w);
      }
    }
  } else {
    out = test_kernel(test_idx, inducing_).transpose() * w_m_;
  }
  gp_seconds_ += now_seconds() - t0;
  return out;
}

VectorXd GpEngine::mean_all() const {
  std::vector<int> idx(test_points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  return mean(idx);
}

VectorXd GpEngine::variance(const std::vector<int>& test_idx) const {
  refresh();
  const double t0 = now_seconds();
  VectorXd out;
  if (kind_ == InferenceKind::Exact) {
    if (train_.size() == 0) {
      out = VectorXd::Constant(static_cast<Eigen::Index>(test_idx.size()),
                               hyper_.signal_variance);
    } else {
      const MatrixXd& v = exact_v_all();
      out.resize(static_cast<Eigen::Index>(test_idx.size()));
      for (size_t i = 0; i < test_idx.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] =
            hyper_.signal_variance - v.col(test_idx[i]).squaredNorm();
      }
    }
  } else {
    const MatrixXd kut = test_kernel(test_idx, inducing_);
    const MatrixXd a = llt_kuu_.matrixL().solve(kut);
    const MatrixXd b = llt_sigma_.matrixL().solve(kut);
    out = hyper_.signal_variance - a.colwise().squaredNorm().transpose().array() +
          b.colwise().squaredNorm().transpose().array();
  }
  gp_seconds_ += now_seconds() - t0;
  return clamp_variance(std::move(out));
}

MatrixXd GpEngine::covariance_block(const std::vector<int>& test_idx) const {
  refresh();
  const double t0 = now_seconds();
  MatrixXd cov = prior_block(test_idx);
  if (kind_ == InferenceKind::Exact) {
    if (train_.size() > 0) {
      const MatrixXd& v_all = exact_v_all();
      MatrixXd v(v_all.rows(), static_cast<Eigen::Index>(test_idx.size()));
      for (size_t i = 0; i < test_idx.size(); ++i) {
        v.col(static_cast<Eigen::Index>(i)) = v_all.col(test_idx[i]);
      }
      cov.noalias() -= v.transpose() * v;
    }
  } else {
    std::vector<Vec2> pts;
    pts.reserve(test_idx.size());
    for (int i : test_idx) pts.push_back(test_points_.at(static_cast<size_t>(i)));
    const MatrixXd kut = kernel_matrix(inducing_, pts, hyper_);
    const MatrixXd a = llt_kuu_.matrixL().solve(kut);
    const MatrixXd b = llt_sigma_.matrixL().solve(kut);
    cov.noalias() -= a.transpose() * a;
    cov.noalias() += b.transpose() * b;
  }
  gp_seconds_ += now_seconds() - t0;
  return cov;
}

VectorXd GpEngine::cpv_diag(const std::vector<int>& test_idx,
                            double observation_noise) const {
  MatrixXd cov = covariance_block(test_idx);
  const double t0 = now_seconds();
  MatrixXd conditioned = cov;
  conditioned.diagonal().array() += observation_noise + hyper_.jitter();
  Eigen::LLT<MatrixXd> llt(conditioned);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("conditional variance factorization failed");
  }
  const MatrixXd w = llt.matrixL().solve(cov);
  VectorXd out = cov.diagonal() - w.colwise().squaredNorm().transpose();
  gp_seconds_ += now_seconds() - t0;
  return clamp_variance(std::move(out));
}

Posterior posterior(const TrainingSet& train, const std::vector<Vec2>& test_points,
                    const Hyperparams& hyper) {
  if (test_points.empty()) {
    throw std::invalid_argument("posterior requires at least one test point");
  }
  GpEngine engine(test_points, hyper);
  engine.set_training(train);
  std::vector<int> idx(test_points.size());
  std::iota(idx.begin(), idx.end(), 0);
  return {engine.mean(idx), engine.variance(idx)};
}

VectorXd conditional_predictive_variance(const TrainingSet& train, const Arm& arm,
                                         const ArmGrid& grid,
                                         const Hyperparams& hyper) {
  if (arm.level < 0 ||
      arm.level >= static_cast<int>(hyper.noise_variances.size())) {
    throw std::invalid_argument("arm level has no noise variance hyperparameter");
  }
  GpEngine engine(grid.test_points(), hyper);
  engine.set_training(train);
  return engine.cpv_diag(arm.test_indices,
                         hyper.noise_variances[static_cast<size_t>(arm.level)]);
}

Posterior sparse_posterior(const TrainingSet& train,
                           const std::vector<Vec2>& test_points,
                           const std::vector<Vec2>& inducing,
                           const Hyperparams& hyper) {
  if (inducing.empty()) {
    throw std::invalid_argument("sparse posterior requires inducing points");
  }
  GpEngine engine(test_points, hyper, InferenceKind::Sparse, inducing);
  engine.set_training(train);
  std::vector<int> idx(test_points.size());
  std::iota(idx.begin(), idx.end(), 0);
  return {engine.mean(idx), engine.variance(idx)};
}

std::vector<Vec2> select_inducing_lattice(const Rect& extent, int count) {
  if (count < 1) {
    throw std::invalid_argument("inducing point count must be positive");
  }
  const double aspect = extent.width / extent.height;
  int nx = std::max(1, static_cast<int>(std::lround(std::sqrt(count * aspect))));
  int ny = std::max(1, static_cast<int>(std::lround(static_cast<double>(count) / nx)));
  std::vector<Vec2> pts;
  pts.reserve(static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      pts.push_back({extent.x0 + (ix + 0.5) * extent.width / nx,
                     extent.y0 + (iy + 0.5) * extent.height / ny});
    }
  }
  return pts;
}

std::vector<Vec2> select_inducing_kmeans(const std::vector<Vec2>& points, int count,
                                         uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("inducing point count must be positive");
  }
  if (static_cast<size_t>(count) >= points.size()) {
    return points;
  }
  Rng rng = make_rng(seed);
  std::vector<size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Vec2> centers;
  centers.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) centers.push_back(points[order[static_cast<size_t>(i)]]);

  std::vector<size_t> assign(points.size(), 0);
  for (int iter = 0; iter < 25; ++iter) {
    bool changed = false;
    for (size_t p = 0; p < points.size(); ++p) {
      size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < centers.size(); ++c) {
        const double d = sq_dist(points[p], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[p] != best) {
        assign[p] = best;
        changed = true;
      }
    }
    std::vector<Vec2> sums(centers.size());
    std::vector<int> counts(centers.size(), 0);
    for (size_t p = 0; p < points.size(); ++p) {
      sums[assign[p]].x += points[p].x;
      sums[assign[p]].y += points[p].y;
      ++counts[assign[p]];
    }
    for (size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] > 0) {
        centers[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
      }
    }
    if (!changed) break;
  }
  return centers;
}

double log_marginal_likelihood(const TrainingSet& train, const Hyperparams& hyper) {
  check_hyper(hyper);
  const auto n = static_cast<Eigen::Index>(train.size());
  if (n == 0) return 0.0;
  MatrixXd a = kernel_matrix(train.X, train.X, hyper);
  for (Eigen::Index i = 0; i < n; ++i) {
    const size_t row = static_cast<size_t>(i);
    double q;
    if (!hyper.noise_variances.empty() && row < train.level.size()) {
      q = hyper.noise_variances.at(static_cast<size_t>(train.level[row]));
    } else {
      q = train.noise[row];
    }
    a(i, i) += q + hyper.jitter();
  }
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    return -std::numeric_limits<double>::infinity();
  }
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = train.Y[static_cast<size_t>(i)];
  const VectorXd alpha = llt.solve(y);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * y.dot(alpha) - logdet - 0.5 * n * std::log(2.0 * M_PI);
}

Hyperparams fit_hyperparams(const TrainingSet& train, int num_levels) {
  if (train.size() < 3) {
    throw std::invalid_argument("hyperparameter fit needs at least 3 observations");
  }
  if (num_levels < 1) {
    throw std::invalid_argument("num_levels must be positive");
  }
  std::vector<int> per_level(static_cast<size_t>(num_levels), 0);
  for (size_t i = 0; i < train.size(); ++i) {
    const int lv = train.level.at(i);
    if (lv < 0 || lv >= num_levels) {
      throw std::invalid_argument("training level label out of range");
    }
    ++per_level[static_cast<size_t>(lv)];
  }
  for (int lv = 0; lv < num_levels; ++lv) {
    if (per_level[static_cast<size_t>(lv)] == 0) {
      throw std::invalid_argument("every level needs at least one observation");
    }
  }

  const double mean_y =
      std::accumulate(train.Y.begin(), train.Y.end(), 0.0) / train.size();
  double var_y = 0.0;
  for (double y : train.Y) var_y += (y - mean_y) * (y - mean_y);
  var_y /= std::max<size_t>(1, train.size() - 1);

  double min_x = train.X[0].x, max_x = min_x, min_y = train.X[0].y, max_y = min_y;
  for (const Vec2& p : train.X) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double diag = std::max(
      1e-6, std::hypot(max_x - min_x, max_y - min_y));

  Hyperparams best;
  best.noise_variances.assign(static_cast<size_t>(num_levels), 1e-6);
  if (var_y < 1e-12) {
    best.signal_variance = 1e-6;
    best.length_scale = 0.25 * diag;
    return best;
  }

  const int dims = 2 + num_levels;
  double best_lml = -std::numeric_limits<double>::infinity();
  const double start_scales[] = {0.10, 0.30};
  const double start_noise[] = {0.05, 0.5};

  for (double ls0 : start_scales) {
    for (double nf0 : start_noise) {
      std::vector<double> theta(static_cast<size_t>(dims));
      theta[0] = std::log(ls0 * diag);
      theta[1] = std::log(var_y);
      for (int lv = 0; lv < num_levels; ++lv) {
        theta[static_cast<size_t>(2 + lv)] = std::log(nf0 * var_y);
      }

      auto to_hyper = [&](const std::vector<double>& t) {
        Hyperparams h;
        h.length_scale = std::exp(t[0]);
        h.signal_variance = std::exp(t[1]);
        h.noise_variances.resize(static_cast<size_t>(num_levels));
        std::vector<double> logs(t.begin() + 2, t.end());
        logs = isotonic(std::move(logs));
        for (int lv = 0; lv < num_levels; ++lv) {
          h.noise_variances[static_cast<size_t>(lv)] =
              std::exp(logs[static_cast<size_t>(lv)]);
        }
        return h;
      };

      double cur = log_marginal_likelihood(train, to_hyper(theta));
      std::vector<double> step(static_cast<size_t>(dims), 0.6);
      for (int sweep = 0; sweep < 14; ++sweep) {
        for (int d = 0; d < dims; ++d) {
          const size_t sd = static_cast<size_t>(d);
          bool improved = false;
          for (double sign : {+1.0, -1.0}) {
            std::vector<double> cand = theta;
            cand[sd] += sign * step[sd];
            const double lml = log_marginal_likelihood(train, to_hyper(cand));
            if (lml > cur) {
              cur = lml;
              theta = std::move(cand);
              improved = true;
              break;
            }
          }
          if (!improved) step[sd] *= 0.5;
        }
      }
      if (cur > best_lml) {
        best_lml = cur;
        best = to_hyper(theta);
      }
    }
  }
  best.signal_variance = std::max(best.signal_variance, 1e-6);
  return best;
}

}  // namespace hotspot
