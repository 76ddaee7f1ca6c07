#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rpol/kernel.hpp"

namespace rpol {

struct PosteriorValue {
  double mean = 0.0;
  double std = 1.0;
};

enum class TargetKind { Reward, Cost };

// Solves L z = b in place for lower-triangular L (leading n x n block).
inline void forward_substitute_in_place(const Eigen::MatrixXd& chol, Eigen::VectorXd& b) {
  const Eigen::Index n = b.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = b(i);
    if (i > 0) s -= chol.row(i).head(i).dot(b.head(i));
    b(i) = s / chol(i, i);
  }
}

// Solves L^T z = b in place.
inline void back_substitute_in_place(const Eigen::MatrixXd& chol, Eigen::VectorXd& b) {
  const Eigen::Index n = b.size();
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    if (i + 1 < n) s -= chol.col(i).segment(i + 1, n - i - 1).dot(b.segment(i + 1, n - i - 1));
    b(i) = s / chol(i, i);
  }
}

// Row of the Cholesky factor produced by one append; the grid cache consumes it
// to extend its own solves without refactorizing.
struct AppendInfo {
  Eigen::VectorXd solved_cross;  // L^{-1} k_new over the previous points
  double pivot = 0.0;            // new diagonal entry of L
};

// Exact GP posterior state over observed (point, target) pairs, holding the
// lower Cholesky factor of K + lambda*I. Appends extend the factor by one row;
// the factor is never recomputed, so an incrementally grown state and a state
// rebuilt by replaying the same appends agree bit for bit.
class GpState {
public:
  GpState() = default;
  GpState(KernelSpec kernel, double lambda, TargetKind target_kind)
      : kernel_(kernel), lambda_(lambda), target_kind_(target_kind) {
    if (!(lambda > 0.0)) throw std::invalid_argument("GpState: lambda must be positive");
    if (!(kernel.lengthscale > 0.0)) throw std::invalid_argument("GpState: lengthscale must be positive");
  }

  int size() const { return static_cast<int>(points_.size()); }
  const KernelSpec& kernel() const { return kernel_; }
  double lambda() const { return lambda_; }
  TargetKind target_kind() const { return target_kind_; }
  const std::vector<Point>& points() const { return points_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  Eigen::MatrixXd chol() const { return chol_.topLeftCorner(size(), size()); }

  Eigen::VectorXd kernel_vector(const Point& x) const {
    Eigen::VectorXd k(size());
    for (int i = 0; i < size(); ++i) k(i) = kernel_eval(kernel_, points_[i], x);
    return k;
  }

  AppendInfo append_observation(const Point& x, double y) {
    if (!x.allFinite() || !std::isfinite(y)) {
      throw std::invalid_argument("append_observation: non-finite input");
    }
    if (size() > 0 && x.size() != points_.front().size()) {
      throw std::invalid_argument("append_observation: dimension mismatch");
    }
    const int n = size();
    Eigen::VectorXd l = kernel_vector(x);
    forward_substitute_in_place(chol_, l);
    const double kxx = kernel_eval(kernel_, x, x);
    double pivot_sq = kxx + lambda_ - l.squaredNorm();
    if (pivot_sq < kPivotFloor) pivot_sq += kJitter;  // one retry with extra diagonal jitter
    if (pivot_sq < kPivotFloor) {
      throw std::runtime_error("append_observation: Cholesky breakdown at observation " +
                               std::to_string(n + 1));
    }
    const double pivot = std::sqrt(pivot_sq);

    if (chol_.rows() <= n) {
      const int cap = std::max(8, 2 * n);
      Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
      grown.topLeftCorner(n, n) = chol_.topLeftCorner(n, n);
      chol_ = std::move(grown);
      Eigen::VectorXd ty = Eigen::VectorXd::Zero(cap);
      ty.head(n) = targets_.head(n);
      targets_storage_ = std::move(ty);
    }
    chol_.row(n).head(n) = l.transpose();
    chol_(n, n) = pivot;
    targets_storage_(n) = y;
    points_.push_back(x);
    targets_ = targets_storage_.head(n + 1);
    solves_dirty_ = true;
    return {std::move(l), pivot};
  }

  // Replaces the target vector (the design points and factor are untouched).
  // Used by the censored variant, whose targets change retroactively.
  void set_targets(const Eigen::VectorXd& y) {
    if (y.size() != size()) throw std::invalid_argument("set_targets: size mismatch");
    targets_storage_.head(size()) = y;
    targets_ = targets_storage_.head(size());
    solves_dirty_ = true;
  }

  // L^{-1} targets, cached until the targets change.
  const Eigen::VectorXd& whitened_targets() const {
    refresh_solves();
    return whitened_;
  }

  // (K + lambda*I)^{-1} targets, cached until the targets change.
  const Eigen::VectorXd& alpha() const {
    refresh_solves();
    return alpha_;
  }

  PosteriorValue posterior(const Point& x) const {
    if (!x.allFinite()) throw std::invalid_argument("posterior: non-finite query point");
    const double kxx = kernel_eval(kernel_, x, x);
    if (size() == 0) return {0.0, std::sqrt(kxx)};
    Eigen::VectorXd l = kernel_vector(x);
    forward_substitute_in_place(chol_, l);
    const double var = kxx - l.squaredNorm();
    return {l.dot(whitened_targets()), std::sqrt(std::max(var, 0.0))};
  }

  // Realized-design information gain 0.5 * ln det(I + lambda^{-1} K).
  double plugin_info_gain() const {
    const int n = size();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::log(chol_(i, i));
    return acc - 0.5 * n * std::log(lambda_);
  }

private:
  void refresh_solves() const {
    if (!solves_dirty_) return;
    whitened_ = targets_;
    forward_substitute_in_place(chol_, whitened_);
    alpha_ = whitened_;
    back_substitute_in_place(chol_, alpha_);
    solves_dirty_ = false;
  }

  static constexpr double kPivotFloor = 1e-12;
  static constexpr double kJitter = 1e-10;

  KernelSpec kernel_{};
  double lambda_ = 1.0;
  TargetKind target_kind_ = TargetKind::Reward;
  std::vector<Point> points_;
  Eigen::MatrixXd chol_;             // capacity block; leading size() x size() is live
  Eigen::VectorXd targets_storage_;  // capacity block
  Eigen::VectorXd targets_;          // live view copy, head(size())
  mutable Eigen::VectorXd whitened_;
  mutable Eigen::VectorXd alpha_;
  mutable bool solves_dirty_ = true;
};

// GP state over the trailing window of a (point, target) history: rounds
// t0..t-1 with t0 = max(1, t - W). history[i] holds the round-(i+1) pair.
inline GpState windowed_state(const std::vector<std::pair<Point, double>>& history, int t, int W,
                              const KernelSpec& kernel, double lambda,
                              TargetKind kind = TargetKind::Reward) {
  if (W < 1) throw std::invalid_argument("windowed_state: W must be >= 1");
  if (t < 1) throw std::invalid_argument("windowed_state: t must be >= 1");
  if (static_cast<int>(history.size()) < t - 1) {
    throw std::invalid_argument("windowed_state: history does not cover rounds 1..t-1");
  }
  GpState state(kernel, lambda, kind);
  const int t0 = std::max(1, t - W);
  for (int s = t0; s <= t - 1; ++s) {
    state.append_observation(history[s - 1].first, history[s - 1].second);
  }
  return state;
}

// Batched posterior evaluation over a fixed candidate set. One column is
// appended per observation, in lockstep with GpState::append_observation, so
// cached values equal the pointwise posterior and are reproducible across
// incremental and replayed states.
class GridPosteriorCache {
public:
  explicit GridPosteriorCache(std::shared_ptr<const std::vector<Point>> candidates)
      : candidates_(std::move(candidates)) {
    const auto m = static_cast<Eigen::Index>(candidates_->size());
    sqnorm_ = Eigen::VectorXd::Zero(m);
  }

  int observation_count() const { return n_; }
  const std::vector<Point>& candidates() const { return *candidates_; }

  void append(const KernelSpec& kernel, const Point& x_new, const AppendInfo& info) {
    const auto& cands = *candidates_;
    const auto m = static_cast<Eigen::Index>(cands.size());
    Eigen::VectorXd k_new(m);
    for (Eigen::Index j = 0; j < m; ++j) k_new(j) = kernel_eval(kernel, cands[j], x_new);

    Eigen::VectorXd s_new = k_new;
    if (n_ > 0) s_new.noalias() -= smat_.leftCols(n_) * info.solved_cross;
    s_new /= info.pivot;

    if (kmat_.cols() <= n_) {
      const Eigen::Index cap = std::max<Eigen::Index>(8, 2 * n_);
      Eigen::MatrixXd grown(m, cap);
      grown.leftCols(n_) = kmat_.leftCols(n_);
      kmat_ = std::move(grown);
      grown = Eigen::MatrixXd(m, cap);
      grown.leftCols(n_) = smat_.leftCols(n_);
      smat_ = std::move(grown);
    }
    kmat_.col(n_) = k_new;
    smat_.col(n_) = s_new;
    sqnorm_ += s_new.cwiseProduct(s_new);
    ++n_;
  }

  // Posterior means over the candidate set for the given state (which must be
  // the state this cache was grown alongside).
  Eigen::VectorXd means(const GpState& gp) const {
    const auto m = static_cast<Eigen::Index>(candidates_->size());
    if (n_ == 0) return Eigen::VectorXd::Zero(m);
    return kmat_.leftCols(n_) * gp.alpha();
  }

  Eigen::VectorXd stds() const {
    return (Eigen::VectorXd::Ones(sqnorm_.size()) - sqnorm_).cwiseMax(0.0).cwiseSqrt();
  }

  double std_at(Eigen::Index j) const { return std::sqrt(std::max(0.0, 1.0 - sqnorm_(j))); }

private:
  std::shared_ptr<const std::vector<Point>> candidates_;
  Eigen::MatrixXd kmat_;   // M x capacity, col i = k(grid, x_i)
  Eigen::MatrixXd smat_;   // M x capacity, col i = component i of L^{-1} k(grid)
  Eigen::VectorXd sqnorm_; // row-wise squared norm of the live part of smat_
  int n_ = 0;
};

}  // namespace rpol
