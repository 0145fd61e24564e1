#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "hotspot/common.hpp"
#include "hotspot/sensing.hpp"

namespace hotspot {

struct Hyperparams {
  double length_scale = 2.0;
  double signal_variance = 100.0;
  std::vector<double> noise_variances;  // one per altitude level, low to high
  double jitter_scale = 1e-8;           // jitter = jitter_scale * signal_variance

  double jitter() const { return jitter_scale * signal_variance; }
};

struct TrainingSet {
  std::vector<Vec2> X;
  std::vector<double> Y;
  std::vector<double> noise;  // per-point variance, the diagonal of Q(X)
  std::vector<int> level;     // altitude level labels, used for fitting

  size_t size() const { return X.size(); }
  void append(const MeasurementBatch& batch, int level_index);
};

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // negative values are clamped to zero
};

double se_kernel(const Vec2& a, const Vec2& b, const Hyperparams& hyper);

Eigen::MatrixXd kernel_matrix(const std::vector<Vec2>& a,
                              const std::vector<Vec2>& b,
                              const Hyperparams& hyper);

// Exact heteroscedastic posterior at the test points, via Cholesky of
// (K(X,X) + Q + jitter I). With no data it returns the zero-mean prior.
Posterior posterior(const TrainingSet& train, const std::vector<Vec2>& test_points,
                    const Hyperparams& hyper);

// Predictive variance at the arm's test points as if they were additionally
// observed from the arm's altitude: the training set is augmented with the
// arm's test points carrying that level's noise, existing points keep theirs.
Eigen::VectorXd conditional_predictive_variance(const TrainingSet& train,
                                                const Arm& arm, const ArmGrid& grid,
                                                const Hyperparams& hyper);

// FITC approximation through the given inducing points.
Posterior sparse_posterior(const TrainingSet& train,
                           const std::vector<Vec2>& test_points,
                           const std::vector<Vec2>& inducing,
                           const Hyperparams& hyper);

std::vector<Vec2> select_inducing_lattice(const Rect& extent, int count);
std::vector<Vec2> select_inducing_kmeans(const std::vector<Vec2>& points, int count,
                                         uint64_t seed);

double log_marginal_likelihood(const TrainingSet& train, const Hyperparams& hyper);

// Maximizes the log marginal likelihood over (length scale, signal variance,
// per-level noise) by multi-start coordinate search in log space. Noise
// monotonicity across levels is enforced by isotonic projection.
Hyperparams fit_hyperparams(const TrainingSet& train, int num_levels);

enum class InferenceKind { Exact, Sparse };

// Per-episode inference state over a fixed test-point set. Batches are
// appended as images arrive; queries address test points by index. Exact
// mode refactorizes from scratch each step; sparse mode accumulates the
// S x S inducing system incrementally and only refactorizes that.
class GpEngine {
 public:
  GpEngine(std::vector<Vec2> test_points, Hyperparams hyper,
           InferenceKind kind = InferenceKind::Exact,
           std::vector<Vec2> inducing = {});

  void set_training(TrainingSet train);
  void add_batch(const MeasurementBatch& batch, int level_index);

  Eigen::VectorXd mean(const std::vector<int>& test_idx) const;
  Eigen::VectorXd mean_all() const;
  Eigen::VectorXd variance(const std::vector<int>& test_idx) const;
  // Posterior covariance block over the given test points.
  Eigen::MatrixXd covariance_block(const std::vector<int>& test_idx) const;
  // Variance at the given test points as if additionally observed with the
  // given per-point noise (the decomposed conditional predictive variance).
  Eigen::VectorXd cpv_diag(const std::vector<int>& test_idx,
                           double observation_noise) const;

  const TrainingSet& train() const { return train_; }
  const std::vector<Vec2>& test_points() const { return test_points_; }
  const Hyperparams& hyper() const { return hyper_; }
  InferenceKind kind() const { return kind_; }
  const std::vector<Vec2>& inducing() const { return inducing_; }

  // Forces factorization of pending data; returns the wall time it took.
  double refresh() const;
  // Accumulated wall time spent on factorizations and queries.
  double gp_seconds() const { return gp_seconds_; }

 private:
  void accumulate_sparse(size_t first_row);
  Eigen::MatrixXd test_kernel(const std::vector<int>& test_idx,
                              const std::vector<Vec2>& against) const;

  std::vector<Vec2> test_points_;
  Hyperparams hyper_;
  InferenceKind kind_;
  std::vector<Vec2> inducing_;
  TrainingSet train_;

  Eigen::LLT<Eigen::MatrixXd> llt_kuu_;  // sparse: chol(Kuu + jit), fixed
  Eigen::MatrixXd sigma_m_;              // sparse: Kuu + sum Kub Lb^-1 Kbu
  Eigen::VectorXd b_m_;                  // sparse: sum Kub Lb^-1 yb

  const Eigen::MatrixXd& exact_v_all() const;  // L^-1 K(X, X*), per refresh
  const Eigen::MatrixXd& prior_block(const std::vector<int>& test_idx) const;

  // rebuilt lazily after appends
  mutable bool dirty_ = true;
  mutable Eigen::LLT<Eigen::MatrixXd> llt_;      // exact: chol(K + Q + jit)
  mutable Eigen::MatrixXd v_all_;                // exact: L^-1 K(X, X*)
  mutable bool v_all_ready_ = false;
  mutable Eigen::LLT<Eigen::MatrixXd> llt_sigma_;
  mutable Eigen::VectorXd w_m_;                  // sparse: Sigma^-1 b
  // K(T, T) prior blocks reused across steps, keyed by the index set
  mutable std::map<std::vector<int>, Eigen::MatrixXd> prior_blocks_;
  mutable double gp_seconds_ = 0.0;
};

}  // namespace hotspot
