#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>

#include "rpol/gp.hpp"
#include "rpol/kernel.hpp"

namespace rpol {

// Known regularity and noise bounds; the confidence scalers are built from
// these plus the realized information gain.
struct ConfidenceParams {
  double B_f = 2.0;  // RKHS norm bound, reward
  double B_g = 2.0;  // RKHS norm bound, constraint
  double R_f = 0.0;  // sub-Gaussian noise scale, reward
  double R_g = 0.0;  // sub-Gaussian noise scale, cost
  double p = 0.05;   // failure probability
  int T = 1;         // horizon

  void validate() const {
    if (!(B_f > 0.0)) throw std::invalid_argument("ConfidenceParams: B_f must be positive");
    if (!(B_g > 0.0)) throw std::invalid_argument("ConfidenceParams: B_g must be positive");
    if (R_f < 0.0) throw std::invalid_argument("ConfidenceParams: R_f must be nonnegative");
    if (R_g < 0.0) throw std::invalid_argument("ConfidenceParams: R_g must be nonnegative");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ConfidenceParams: p must lie in (0,1)");
    if (T < 1) throw std::invalid_argument("ConfidenceParams: T must be >= 1");
  }
};

// Improved GP-UCB width: beta = B + R * sqrt(2 (gamma + 1 + ln(2/p))).
inline double beta(double B, double R, double gamma_hat, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("beta: p must lie in (0,1)");
  if (!(B > 0.0) || R < 0.0 || gamma_hat < 0.0) {
    throw std::invalid_argument("beta: B must be positive, R and gamma_hat nonnegative");
  }
  return B + R * std::sqrt(2.0 * (gamma_hat + 1.0 + std::log(2.0 / p)));
}

// High-probability bound on an observation magnitude: B + R * sqrt(2 ln T).
inline double observation_bound(double B, double R, int T) {
  return B + R * std::sqrt(2.0 * std::log(static_cast<double>(T)));
}

// Censored-feedback width: beta = B + (R + B_obs) * sqrt(2 (gamma + 1 + ln(4/p))).
inline double censored_beta(double B, double R, double B_obs, double gamma_hat, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("censored_beta: p must lie in (0,1)");
  return B + (R + B_obs) * std::sqrt(2.0 * (gamma_hat + 1.0 + std::log(4.0 / p)));
}

inline double censored_scale(double B_obs, double recent_sigma_sum, double beta_value) {
  return B_obs * recent_sigma_sum + beta_value;
}

// Sliding-window width: beta = B + (R/sqrt(lambda)) * sqrt(2 gamma_window + 2 ln(2T/p)).
inline double sw_beta(double B, double R, double lambda, double gamma_window, int T, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("sw_beta: p must lie in (0,1)");
  return B + R / std::sqrt(lambda) *
                 std::sqrt(2.0 * gamma_window + 2.0 * std::log(2.0 * static_cast<double>(T) / p));
}

// Drift coefficient C = (1/lambda) * sqrt(2 W (1+lambda) gamma).
inline double sw_drift_coeff(double lambda, int W, double gamma) {
  return std::sqrt(2.0 * W * (1.0 + lambda) * gamma) / lambda;
}

// Per-round scalers of the active variant; recorded in the trace so the
// replay checks can be rerun from stored files.
struct EstimatorDiagnostics {
  double beta_f = 0.0;
  double beta_g = 0.0;
  double scale_f = 0.0;  // multiplier on sigma: beta (UCB/SW) or v (censored)
  double scale_g = 0.0;
  double shift_f = 0.0;  // additive widening (sliding-window drift term)
  double shift_g = 0.0;
  double obs_bound_r = 0.0;  // censored only
  double obs_bound_c = 0.0;
  double drift_coeff_f = 0.0;  // sliding-window only
  double drift_coeff_g = 0.0;
};

// Optimistic reward / pessimistic constraint estimators for one round:
//   f_hat(x)   = mu_f(x) + scale_f * sigma_f(x) + shift_f
//   g_check(x) = mu_g(x) - scale_g * sigma_g(x) - shift_g
// Evaluation is lazy; the pair borrows the GP states of the round.
class EstimatorPair {
public:
  EstimatorPair(const GpState& gp_f, const GpState& gp_g, EstimatorDiagnostics diag)
      : gp_f_(&gp_f), gp_g_(&gp_g), diag_(diag) {}

  double f_hat(const Point& x) const {
    const PosteriorValue post = gp_f_->posterior(x);
    return post.mean + diag_.scale_f * post.std + diag_.shift_f;
  }

  double g_check(const Point& x) const {
    const PosteriorValue post = gp_g_->posterior(x);
    return post.mean - diag_.scale_g * post.std - diag_.shift_g;
  }

  const EstimatorDiagnostics& diagnostics() const { return diag_; }
  const GpState& gp_f() const { return *gp_f_; }
  const GpState& gp_g() const { return *gp_g_; }

private:
  const GpState* gp_f_;
  const GpState* gp_g_;
  EstimatorDiagnostics diag_;
};

// GP-UCB/LCB pair on full-history states.
inline EstimatorPair ucb_pair(const GpState& gp_f, const GpState& gp_g,
                              const ConfidenceParams& params) {
  params.validate();
  EstimatorDiagnostics diag;
  diag.beta_f = beta(params.B_f, params.R_f, gp_f.plugin_info_gain(), params.p);
  diag.beta_g = beta(params.B_g, params.R_g, gp_g.plugin_info_gain(), params.p);
  diag.scale_f = diag.beta_f;
  diag.scale_g = diag.beta_g;
  return {gp_f, gp_g, diag};
}

// Censored GP-UCB/LCB pair. The states carry censored targets; the widened
// scale v accounts for the at-most-m observations that may still be in flight.
inline EstimatorPair censored_pair(const GpState& gp_f, const GpState& gp_g,
                                   std::span<const Point> recent_points,
                                   const ConfidenceParams& params, int m) {
  params.validate();
  if (m < 1) throw std::invalid_argument("censored_pair: m must be >= 1");
  if (static_cast<int>(recent_points.size()) > m) {
    throw std::invalid_argument("censored_pair: recent_points holds more than m points");
  }
  EstimatorDiagnostics diag;
  diag.obs_bound_r = observation_bound(params.B_f, params.R_f, params.T);
  diag.obs_bound_c = observation_bound(params.B_g, params.R_g, params.T);
  diag.beta_f = censored_beta(params.B_f, params.R_f, diag.obs_bound_r,
                              gp_f.plugin_info_gain(), params.p);
  diag.beta_g = censored_beta(params.B_g, params.R_g, diag.obs_bound_c,
                              gp_g.plugin_info_gain(), params.p);
  double sig_sum_f = 0.0;
  double sig_sum_g = 0.0;
  for (const Point& x : recent_points) {
    sig_sum_f += gp_f.posterior(x).std;
    sig_sum_g += gp_g.posterior(x).std;
  }
  diag.scale_f = censored_scale(diag.obs_bound_r, sig_sum_f, diag.beta_f);
  diag.scale_g = censored_scale(diag.obs_bound_c, sig_sum_g, diag.beta_g);
  return {gp_f, gp_g, diag};
}

// Sliding-window GP-UCB/LCB pair on windowed states. variation_in_window is
// the pair of window-summed drift norms (reward, constraint); the horizon
// information gain inside the drift coefficient is replaced by the running
// plug-in value capped at gamma_cap.
inline EstimatorPair sw_pair(const GpState& gp_f, const GpState& gp_g,
                             std::pair<double, double> variation_in_window,
                             const ConfidenceParams& params, int W, double gamma_cap) {
  params.validate();
  if (W < 1) throw std::invalid_argument("sw_pair: W must be >= 1");
  if (variation_in_window.first < 0.0 || variation_in_window.second < 0.0) {
    throw std::invalid_argument("sw_pair: variation norms must be nonnegative");
  }
  EstimatorDiagnostics diag;
  const double gamma_f = gp_f.plugin_info_gain();
  const double gamma_g = gp_g.plugin_info_gain();
  diag.beta_f = sw_beta(params.B_f, params.R_f, gp_f.lambda(), gamma_f, params.T, params.p);
  diag.beta_g = sw_beta(params.B_g, params.R_g, gp_g.lambda(), gamma_g, params.T, params.p);
  diag.drift_coeff_f = sw_drift_coeff(gp_f.lambda(), W, std::min(gamma_f, gamma_cap));
  diag.drift_coeff_g = sw_drift_coeff(gp_g.lambda(), W, std::min(gamma_g, gamma_cap));
  diag.scale_f = diag.beta_f;
  diag.scale_g = diag.beta_g;
  diag.shift_f = diag.drift_coeff_f * variation_in_window.first;
  diag.shift_g = diag.drift_coeff_g * variation_in_window.second;
  return {gp_f, gp_g, diag};
}

}  // namespace rpol
