#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rpol/domain.hpp"
#include "rpol/estimators.hpp"
#include "rpol/feedback.hpp"
#include "rpol/gp.hpp"
#include "rpol/penalty.hpp"

namespace rpol {

enum class VariantKind { RpolUcb, RpolCensoredUcb, RpolSwUcb };

struct PolicyVariant {
  VariantKind kind = VariantKind::RpolUcb;
  int m = 25;  // censor cap (censored variant)
  int W = 1;   // window size (sliding-window variant)

  void validate() const {
    if (kind == VariantKind::RpolCensoredUcb && m < 1) {
      throw std::invalid_argument("PolicyVariant: m must be >= 1 for the censored variant");
    }
    if (kind == VariantKind::RpolSwUcb && W < 1) {
      throw std::invalid_argument("PolicyVariant: W must be >= 1 for the sliding-window variant");
    }
  }
};

// Which confidence-scaler family to apply. Auto matches the variant; the
// other values exist so one variant can be run under another's scalers when
// comparing degenerate configurations.
enum class ScalerProfile { Auto, Ucb, Censored, SlidingWindow };

// How the constraint estimate enters the acquisition. RectifiedPenalty is the
// RPOL rule; DualLinear is the labeled primal-dual stand-in baseline.
enum class DecisionRule { RectifiedPenalty, DualLinear };

// Rectified penalty-based decision: argmax of f_hat(x) - Q * max(g_check(x), 0)
// over the optimizer's candidates, ties broken toward the lowest index.
inline Point select_action(const EstimatorPair& pair, double Q, const DomainOptimizer& optimizer) {
  if (Q < 1.0) throw std::invalid_argument("select_action: Q must be >= 1");
  auto [index, value] = optimizer.argmax([&](const Point& x) {
    return pair.f_hat(x) - Q * std::max(pair.g_check(x), 0.0);
  });
  return optimizer.candidates()[index];
}

// Revealed-feedback view handed to policy code. It deliberately has no access
// to the environment: only events whose delay has elapsed are visible.
class ObservationLog {
public:
  void push(const FeedbackEvent& e) { events_.push_back(e); }
  const std::vector<FeedbackEvent>& events() const { return events_; }
  int rounds() const { return static_cast<int>(events_.size()); }

  std::vector<const FeedbackEvent*> revealed_at_round(int t, TargetKind which) const {
    return revealed_at(events_, t, which);
  }

private:
  std::vector<FeedbackEvent> events_;
};

// Per-run decision engine. decide(t) produces the round-t action from
// information revealed before round t; ingest(e, t) folds in the round's
// feedback, updates the penalty and the posterior state of the variant.
class PolicyRunner {
public:
  struct Settings {
    PolicyVariant variant;
    ScalerProfile profile = ScalerProfile::Auto;
    DecisionRule rule = DecisionRule::RectifiedPenalty;
    ConfidenceParams params;
    KernelSpec kernel;
    double lambda = 1.0;
    double gamma_cap = 20.0;
    double dual_step = 0.0;  // DualLinear only
    // Window-summed drift norms (reward, cost) over rounds [from, to]; only
    // consulted by the sliding-window scalers.
    std::function<std::pair<double, double>(int, int)> variation_sum;
  };

  struct Decision {
    int t = 0;
    std::size_t grid_index = 0;
    Point x;
    EstimatorDiagnostics diag;
    double sigma_f = 1.0;
    double sigma_g = 1.0;
    double penalty = 1.0;  // Q_t (or the dual variable for DualLinear)
  };

  PolicyRunner(Settings settings, std::shared_ptr<const std::vector<Point>> candidates)
      : settings_(std::move(settings)),
        candidates_(std::move(candidates)),
        gp_f_(settings_.kernel, settings_.lambda, TargetKind::Reward),
        gp_g_(settings_.kernel, settings_.lambda, TargetKind::Cost),
        cache_f_(candidates_),
        cache_g_(candidates_) {
    settings_.variant.validate();
    settings_.params.validate();
    if (candidates_->empty()) throw std::invalid_argument("PolicyRunner: empty candidate set");
    if (settings_.rule == DecisionRule::DualLinear) penalty_ = 0.0;  // dual variable starts at 0
    if (settings_.profile == ScalerProfile::Auto) {
      switch (settings_.variant.kind) {
        case VariantKind::RpolUcb: settings_.profile = ScalerProfile::Ucb; break;
        case VariantKind::RpolCensoredUcb: settings_.profile = ScalerProfile::Censored; break;
        case VariantKind::RpolSwUcb: settings_.profile = ScalerProfile::SlidingWindow; break;
      }
    }
  }

  const ObservationLog& log() const { return log_; }
  double penalty() const { return penalty_; }

  Decision decide(int t) {
    if (t != static_cast<int>(chosen_indices_.size()) + 1) {
      throw std::logic_error("PolicyRunner::decide: rounds must be stepped in order");
    }
    const GpState* gp_f = &gp_f_;
    const GpState* gp_g = &gp_g_;
    const GridPosteriorCache* cache_f = &cache_f_;
    const GridPosteriorCache* cache_g = &cache_g_;
    if (settings_.variant.kind == VariantKind::RpolSwUcb) {
      rebuild_window(t);
      gp_f = &sw_gp_f_->state;
      gp_g = &sw_gp_g_->state;
      cache_f = &sw_gp_f_->cache;
      cache_g = &sw_gp_g_->cache;
    }

    const EstimatorDiagnostics diag = round_scalers(*gp_f, *gp_g, *cache_f, *cache_g, t);

    const auto m_count = static_cast<Eigen::Index>(candidates_->size());
    Eigen::VectorXd f_hat = cache_f->means(*gp_f) + diag.scale_f * cache_f->stds();
    if (diag.shift_f != 0.0) f_hat.array() += diag.shift_f;
    Eigen::VectorXd g_check = cache_g->means(*gp_g) - diag.scale_g * cache_g->stds();
    if (diag.shift_g != 0.0) g_check.array() -= diag.shift_g;

    Eigen::VectorXd surrogate(m_count);
    if (settings_.rule == DecisionRule::RectifiedPenalty) {
      surrogate = f_hat - penalty_ * g_check.cwiseMax(0.0);
    } else {
      surrogate = f_hat - penalty_ * g_check;
    }

    DomainOptimizer optimizer(candidates_);
    const auto [index, value] = optimizer.argmax_values(surrogate);

    Decision d;
    d.t = t;
    d.grid_index = index;
    d.x = (*candidates_)[index];
    d.diag = diag;
    d.sigma_f = cache_f->std_at(static_cast<Eigen::Index>(index));
    d.sigma_g = cache_g->std_at(static_cast<Eigen::Index>(index));
    d.penalty = penalty_;
    chosen_indices_.push_back(index);
    return d;
  }

  void ingest(const FeedbackEvent& e, int t) {
    if (e.issued_round != t || t != static_cast<int>(chosen_indices_.size())) {
      throw std::logic_error("PolicyRunner::ingest: feedback out of order");
    }
    log_.push(e);

    // Penalty update from the costs revealed this round.
    std::vector<double> revealed;
    for (const FeedbackEvent* r : log_.revealed_at_round(t, TargetKind::Cost)) {
      revealed.push_back(r->cost_obs);
    }
    if (settings_.rule == DecisionRule::RectifiedPenalty) {
      penalty_ = update_penalty_delayed(penalty_, revealed, t);
    } else {
      double total = 0.0;
      for (double c : revealed) total += c;
      penalty_ = std::max(penalty_ + settings_.dual_step * total, 0.0);
    }

    // Posterior model update.
    switch (settings_.variant.kind) {
      case VariantKind::RpolUcb: {
        for (const FeedbackEvent* r : log_.revealed_at_round(t, TargetKind::Reward)) {
          const AppendInfo info = gp_f_.append_observation(r->point, r->reward_obs);
          cache_f_.append(settings_.kernel, r->point, info);
        }
        for (const FeedbackEvent* r : log_.revealed_at_round(t, TargetKind::Cost)) {
          const AppendInfo info = gp_g_.append_observation(r->point, r->cost_obs);
          cache_g_.append(settings_.kernel, r->point, info);
        }
        break;
      }
      case VariantKind::RpolCensoredUcb: {
        const AppendInfo info_f = gp_f_.append_observation(e.point, 0.0);
        cache_f_.append(settings_.kernel, e.point, info_f);
        const AppendInfo info_g = gp_g_.append_observation(e.point, 0.0);
        cache_g_.append(settings_.kernel, e.point, info_g);
        gp_f_.set_targets(censored_targets(log_.events(), t + 1, settings_.variant.m,
                                           TargetKind::Reward));
        gp_g_.set_targets(censored_targets(log_.events(), t + 1, settings_.variant.m,
                                           TargetKind::Cost));
        break;
      }
      case VariantKind::RpolSwUcb:
        break;  // windowed states are rebuilt lazily at decide()
    }
  }

private:
  struct WindowedModel {
    GpState state;
    GridPosteriorCache cache;
    WindowedModel(const KernelSpec& kernel, double lambda, TargetKind kind,
                  std::shared_ptr<const std::vector<Point>> candidates)
        : state(kernel, lambda, kind), cache(std::move(candidates)) {}
  };

  void rebuild_window(int t) {
    const int W = settings_.variant.W;
    const int t0 = std::max(1, t - W);
    sw_gp_f_.emplace(settings_.kernel, settings_.lambda, TargetKind::Reward, candidates_);
    sw_gp_g_.emplace(settings_.kernel, settings_.lambda, TargetKind::Cost, candidates_);
    const auto& events = log_.events();
    for (int s = t0; s <= t - 1; ++s) {
      const FeedbackEvent& e = events[s - 1];
      AppendInfo info = sw_gp_f_->state.append_observation(e.point, e.reward_obs);
      sw_gp_f_->cache.append(settings_.kernel, e.point, info);
      info = sw_gp_g_->state.append_observation(e.point, e.cost_obs);
      sw_gp_g_->cache.append(settings_.kernel, e.point, info);
    }
  }

  EstimatorDiagnostics round_scalers(const GpState& gp_f, const GpState& gp_g,
                                     const GridPosteriorCache& cache_f,
                                     const GridPosteriorCache& cache_g, int t) const {
    const ConfidenceParams& cp = settings_.params;
    EstimatorDiagnostics diag;
    switch (settings_.profile) {
      case ScalerProfile::Ucb: {
        diag.beta_f = beta(cp.B_f, cp.R_f, gp_f.plugin_info_gain(), cp.p);
        diag.beta_g = beta(cp.B_g, cp.R_g, gp_g.plugin_info_gain(), cp.p);
        diag.scale_f = diag.beta_f;
        diag.scale_g = diag.beta_g;
        break;
      }
      case ScalerProfile::Censored: {
        diag.obs_bound_r = observation_bound(cp.B_f, cp.R_f, cp.T);
        diag.obs_bound_c = observation_bound(cp.B_g, cp.R_g, cp.T);
        diag.beta_f = censored_beta(cp.B_f, cp.R_f, diag.obs_bound_r, gp_f.plugin_info_gain(), cp.p);
        diag.beta_g = censored_beta(cp.B_g, cp.R_g, diag.obs_bound_c, gp_g.plugin_info_gain(), cp.p);
        const int m = settings_.variant.m;
        const int from = std::max(0, static_cast<int>(chosen_indices_.size()) - m);
        double sig_f = 0.0;
        double sig_g = 0.0;
        for (std::size_t i = from; i < chosen_indices_.size(); ++i) {
          sig_f += cache_f.std_at(static_cast<Eigen::Index>(chosen_indices_[i]));
          sig_g += cache_g.std_at(static_cast<Eigen::Index>(chosen_indices_[i]));
        }
        diag.scale_f = censored_scale(diag.obs_bound_r, sig_f, diag.beta_f);
        diag.scale_g = censored_scale(diag.obs_bound_c, sig_g, diag.beta_g);
        break;
      }
      case ScalerProfile::SlidingWindow: {
        const double gamma_f = gp_f.plugin_info_gain();
        const double gamma_g = gp_g.plugin_info_gain();
        diag.beta_f = sw_beta(cp.B_f, cp.R_f, gp_f.lambda(), gamma_f, cp.T, cp.p);
        diag.beta_g = sw_beta(cp.B_g, cp.R_g, gp_g.lambda(), gamma_g, cp.T, cp.p);
        diag.scale_f = diag.beta_f;
        diag.scale_g = diag.beta_g;
        const int W = settings_.variant.W;
        diag.drift_coeff_f = sw_drift_coeff(gp_f.lambda(), W, std::min(gamma_f, settings_.gamma_cap));
        diag.drift_coeff_g = sw_drift_coeff(gp_g.lambda(), W, std::min(gamma_g, settings_.gamma_cap));
        std::pair<double, double> variation{0.0, 0.0};
        if (settings_.variation_sum) {
          const int t0 = std::max(1, t - W);
          variation = settings_.variation_sum(t0, t - 1);
        }
        diag.shift_f = diag.drift_coeff_f * variation.first;
        diag.shift_g = diag.drift_coeff_g * variation.second;
        break;
      }
      case ScalerProfile::Auto:
        throw std::logic_error("PolicyRunner: unresolved scaler profile");
    }
    return diag;
  }

  Settings settings_;
  std::shared_ptr<const std::vector<Point>> candidates_;
  ObservationLog log_;
  GpState gp_f_;
  GpState gp_g_;
  GridPosteriorCache cache_f_;
  GridPosteriorCache cache_g_;
  std::optional<WindowedModel> sw_gp_f_;
  std::optional<WindowedModel> sw_gp_g_;
  std::vector<std::size_t> chosen_indices_;
  double penalty_ = 1.0;
};

}  // namespace rpol
