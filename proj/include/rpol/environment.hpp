#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rpol/domain.hpp"
#include "rpol/feedback.hpp"
#include "rpol/kernel.hpp"
#include "rpol/rng.hpp"

namespace rpol {

struct NoiseSpec {
  double reward_noise_var = 0.05;
  double cost_noise_var = 0.05;

  void validate() const {
    if (reward_noise_var < 0.0 || cost_noise_var < 0.0) {
      throw std::invalid_argument("NoiseSpec: variances must be nonnegative");
    }
  }
};

struct DelaySpec {
  enum class Kind { None, Poisson, Fixed };
  Kind kind = Kind::None;
  double mean = 15.0;  // Poisson
  int fixed = 0;       // Fixed

  void validate() const {
    if (kind == Kind::Poisson && !(mean > 0.0)) {
      throw std::invalid_argument("DelaySpec: Poisson mean must be positive");
    }
    if (kind == Kind::Fixed && fixed < 0) {
      throw std::invalid_argument("DelaySpec: fixed delay must be nonnegative");
    }
  }
};

// Serializable description of one schedule segment. All built-in functions are
// drawn from two parametric families on 2-D boxes:
//   f(x) = -sin(x1 + f_shift) - x2
//   g(x) = sin(x1 + g_shift_x1) * sin(x2 + g_shift_x2) + g_offset
struct SegmentSpec {
  int start_round = 1;
  double f_shift = 0.0;
  double g_shift_x1 = 0.0;
  double g_shift_x2 = 0.0;
  double g_offset = 0.0;
  double variation_f_norm = 0.0;  // ||f_prev - f_this|| at the entry change, 0 for the first segment
  double variation_g_norm = 0.0;
};

// Piecewise-constant reward/constraint schedule with the drift norms of each
// change point. Norms are zero everywhere except at change rounds.
struct FunctionSchedule {
  struct Segment {
    int start_round = 1;
    std::function<double(const Point&)> f;
    std::function<double(const Point&)> g;
    double variation_f_norm = 0.0;
    double variation_g_norm = 0.0;
  };

  std::vector<Segment> segments;

  void validate() const {
    if (segments.empty()) throw std::invalid_argument("FunctionSchedule: no segments");
    if (segments.front().start_round != 1) {
      throw std::invalid_argument("FunctionSchedule: first segment must start at round 1");
    }
    for (std::size_t i = 1; i < segments.size(); ++i) {
      if (segments[i].start_round <= segments[i - 1].start_round) {
        throw std::invalid_argument("FunctionSchedule: start rounds must be strictly increasing");
      }
    }
  }

  const Segment& at(int t) const {
    if (t < 1) throw std::invalid_argument("FunctionSchedule: round must be >= 1");
    const Segment* seg = &segments.front();
    for (const Segment& s : segments) {
      if (s.start_round <= t) seg = &s;
    }
    return *seg;
  }

  // Sum over s in [s_begin, s_end] of ||f_s - f_{s+1}||: picks up the entry
  // norm of every segment starting at a round c with s_begin < c <= s_end + 1.
  double variation_sum_f(int s_begin, int s_end) const {
    double acc = 0.0;
    for (const Segment& s : segments) {
      const int change = s.start_round;  // change between rounds change-1 and change
      if (change - 1 >= s_begin && change - 1 <= s_end) acc += s.variation_f_norm;
    }
    return acc;
  }

  double variation_sum_g(int s_begin, int s_end) const {
    double acc = 0.0;
    for (const Segment& s : segments) {
      const int change = s.start_round;
      if (change - 1 >= s_begin && change - 1 <= s_end) acc += s.variation_g_norm;
    }
    return acc;
  }
};

inline FunctionSchedule build_schedule(const std::vector<SegmentSpec>& specs) {
  FunctionSchedule schedule;
  for (const SegmentSpec& s : specs) {
    FunctionSchedule::Segment seg;
    seg.start_round = s.start_round;
    seg.f = [a = s.f_shift](const Point& x) { return -std::sin(x(0) + a) - x(1); };
    seg.g = [a = s.g_shift_x1, b = s.g_shift_x2, c = s.g_offset](const Point& x) {
      return std::sin(x(0) + a) * std::sin(x(1) + b) + c;
    };
    seg.variation_f_norm = s.variation_f_norm;
    seg.variation_g_norm = s.variation_g_norm;
    schedule.segments.push_back(std::move(seg));
  }
  schedule.validate();
  return schedule;
}

// RKHS-norm upper bounds (SE kernel, unit lengthscale) for the two change
// points of the non-stationary schedule, rounded up from dense-quadrature
// estimates of the difference functions.
inline constexpr double kVariationF100 = 30.0;
inline constexpr double kVariationG100 = 40.0;
inline constexpr double kVariationF300 = 30.0;
inline constexpr double kVariationG300 = 40.0;

// Synthetic black-box environment: schedule + noise + delays. Policies never
// see this object; they only receive FeedbackEvents through the harness.
class Environment {
public:
  Environment(FunctionSchedule schedule, BoxDomain domain, NoiseSpec noise, DelaySpec delay,
              std::vector<SegmentSpec> specs = {})
      : schedule_(std::move(schedule)),
        domain_(std::move(domain)),
        noise_(noise),
        delay_(delay),
        specs_(std::move(specs)) {
    schedule_.validate();
    domain_.validate();
    noise_.validate();
    delay_.validate();
  }

  static std::vector<std::string> registry() {
    return {"scbwc", "scbwc-delayed", "scbwc-nonstationary"};
  }

  static Environment builtin(const std::string& name) {
    const BoxDomain box = make_box({0.0, 0.0}, {6.0, 6.0});
    const NoiseSpec noise{0.05, 0.05};
    if (name == "scbwc") {
      std::vector<SegmentSpec> specs = {{1, 0.0, 0.0, 0.0, 0.95, 0.0, 0.0}};
      return Environment(build_schedule(specs), box, noise, DelaySpec{}, specs);
    }
    if (name == "scbwc-delayed") {
      std::vector<SegmentSpec> specs = {{1, 0.0, 0.0, 0.0, 0.95, 0.0, 0.0}};
      DelaySpec delay;
      delay.kind = DelaySpec::Kind::Poisson;
      delay.mean = 15.0;
      return Environment(build_schedule(specs), box, noise, delay, specs);
    }
    if (name == "scbwc-nonstationary") {
      std::vector<SegmentSpec> specs = {
          {1, 0.0, 0.0, 0.0, 0.95, 0.0, 0.0},
          {101, -5.0, 0.0, 5.0, 0.5, kVariationF100, kVariationG100},
          {301, 4.0, 5.0, 0.0, 0.95, kVariationF300, kVariationG300},
      };
      return Environment(build_schedule(specs), box, noise, DelaySpec{}, specs);
    }
    std::ostringstream os;
    os << "unknown environment '" << name << "'; registry:";
    for (const auto& n : registry()) os << " " << n;
    throw std::invalid_argument(os.str());
  }

  const BoxDomain& domain() const { return domain_; }
  const FunctionSchedule& schedule() const { return schedule_; }
  const NoiseSpec& noise() const { return noise_; }
  const DelaySpec& delay() const { return delay_; }
  const std::vector<SegmentSpec>& segment_specs() const { return specs_; }

  NoiseSpec& noise() { return noise_; }
  DelaySpec& delay() { return delay_; }

  // Noisy, possibly delayed feedback for playing x at round t.
  FeedbackEvent step(const Point& x, int t, const CounterRng& rng) const {
    if (!domain_.contains(x)) {
      throw std::invalid_argument("Environment::step: point outside domain");
    }
    if (t < 1) throw std::invalid_argument("Environment::step: round must be >= 1");
    const auto& seg = schedule_.at(t);
    FeedbackEvent e;
    e.issued_round = t;
    e.point = x;
    const auto counter = static_cast<std::uint64_t>(t);
    e.reward_obs = seg.f(x) + std::sqrt(noise_.reward_noise_var) * rng.gaussian(Stream::RewardNoise, counter);
    e.cost_obs = seg.g(x) + std::sqrt(noise_.cost_noise_var) * rng.gaussian(Stream::CostNoise, counter);
    switch (delay_.kind) {
      case DelaySpec::Kind::None:
        break;
      case DelaySpec::Kind::Fixed:
        e.reward_delay = delay_.fixed;
        e.cost_delay = delay_.fixed;
        break;
      case DelaySpec::Kind::Poisson:
        e.reward_delay = rng.poisson(Stream::RewardDelay, counter, delay_.mean);
        e.cost_delay = rng.poisson(Stream::CostDelay, counter, delay_.mean);
        break;
    }
    return e;
  }

  // Noise-free access, for metrics only. Policies must never reach this.
  std::pair<double, double> true_values(const Point& x, int t) const {
    if (!domain_.contains(x)) {
      throw std::invalid_argument("Environment::true_values: point outside domain");
    }
    const auto& seg = schedule_.at(t);
    return {seg.f(x), seg.g(x)};
  }

private:
  FunctionSchedule schedule_;
  BoxDomain domain_;
  NoiseSpec noise_;
  DelaySpec delay_;
  std::vector<SegmentSpec> specs_;
};

}  // namespace rpol
