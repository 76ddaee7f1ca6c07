#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "rpol/gp.hpp"
#include "rpol/kernel.hpp"

namespace rpol {

// One round of noisy bandit feedback together with its (possibly zero) delays.
struct FeedbackEvent {
  int issued_round = 0;
  Point point;
  double reward_obs = 0.0;
  double cost_obs = 0.0;
  int reward_delay = 0;
  int cost_delay = 0;
};

inline int event_delay(const FeedbackEvent& e, TargetKind which) {
  return which == TargetKind::Reward ? e.reward_delay : e.cost_delay;
}

inline double event_value(const FeedbackEvent& e, TargetKind which) {
  return which == TargetKind::Reward ? e.reward_obs : e.cost_obs;
}

// Censored target vector for the round-t posterior: entry s (1-based) carries
// the raw observation of round s when its delay is within min(m, t - s), and
// zero otherwise. Observations older than the cap m stay censored forever.
inline Eigen::VectorXd censored_targets(const std::vector<FeedbackEvent>& events, int t, int m,
                                        TargetKind which) {
  if (m < 1) throw std::invalid_argument("censored_targets: m must be >= 1");
  if (t < 1) throw std::invalid_argument("censored_targets: t must be >= 1");
  if (static_cast<int>(events.size()) < t - 1) {
    throw std::invalid_argument("censored_targets: events do not cover rounds 1..t-1");
  }
  Eigen::VectorXd out(t - 1);
  for (int s = 1; s <= t - 1; ++s) {
    const FeedbackEvent& e = events[s - 1];
    const int window = std::min(m, t - s);
    out(s - 1) = event_delay(e, which) <= window ? event_value(e, which) : 0.0;
  }
  return out;
}

// Observations of the given channel that become visible exactly at round t,
// i.e. issued at s with s + delay == t, in issue order.
inline std::vector<const FeedbackEvent*> revealed_at(const std::vector<FeedbackEvent>& events,
                                                     int t, TargetKind which) {
  std::vector<const FeedbackEvent*> out;
  for (const FeedbackEvent& e : events) {
    if (e.issued_round + event_delay(e, which) == t) out.push_back(&e);
  }
  return out;
}

}  // namespace rpol
