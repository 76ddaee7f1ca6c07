#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace rpol {

// Rectified cumulative penalty. Q starts at 1, grows by the positive part of
// each observed cost, and is floored at sqrt(t) after round t.
struct PenaltyState {
  double Q = 1.0;
  int round = 1;
};

inline double penalty_floor(int t) { return std::sqrt(static_cast<double>(t)); }

// Q_{t+1} = max(Q_t + c_t^+, sqrt(t)). The caller rectifies the cost.
inline double update_penalty(double Q, double c_plus, int t) {
  if (c_plus < 0.0) {
    throw std::invalid_argument("update_penalty: c_plus must be nonnegative (rectify upstream)");
  }
  return std::max(Q + c_plus, penalty_floor(t));
}

// Delayed variant: every cost revealed at round t is rectified individually
// before the sum. An empty revelation degenerates to update_penalty(Q, 0, t).
inline double update_penalty_delayed(double Q, std::span<const double> revealed_costs, int t) {
  double total = 0.0;
  for (double c : revealed_costs) total += std::max(c, 0.0);
  return std::max(Q + total, penalty_floor(t));
}

}  // namespace rpol
