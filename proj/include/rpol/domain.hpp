#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rpol/kernel.hpp"

namespace rpol {

struct BoxDomain {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }

  bool contains(const Point& x) const {
    if (x.size() != lower.size()) return false;
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }

  void validate() const {
    if (lower.size() != upper.size() || lower.size() < 1) {
      throw std::invalid_argument("BoxDomain: lower/upper must share dimension d >= 1");
    }
    if (!((lower.array() < upper.array()).all())) {
      throw std::invalid_argument("BoxDomain: lower[i] < upper[i] required for all axes");
    }
  }
};

inline BoxDomain make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  BoxDomain d;
  d.lower = Eigen::Map<const Eigen::VectorXd>(std::data(lo), static_cast<Eigen::Index>(lo.size()));
  d.upper = Eigen::Map<const Eigen::VectorXd>(std::data(hi), static_cast<Eigen::Index>(hi.size()));
  d.validate();
  return d;
}

struct GridSpec {
  int resolution = 100;   // points per axis, including both endpoints
  int refine_steps = 0;   // max step-halving levels of local refinement; 0 disables

  void validate() const {
    if (resolution < 2) throw std::invalid_argument("GridSpec: resolution must be >= 2");
    if (refine_steps < 0) throw std::invalid_argument("GridSpec: refine_steps must be >= 0");
  }
};

// Regular lattice, enumerated row-major with the last axis fastest, so index 0
// is the lower corner of the box.
inline std::vector<Point> make_grid(const BoxDomain& domain, int resolution) {
  domain.validate();
  GridSpec{resolution, 0}.validate();
  const int d = domain.dim();
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(resolution);

  std::vector<Point> points;
  points.reserve(total);
  std::vector<int> idx(d, 0);
  Point x(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int k = 0; k < d; ++k) {
      x(k) = domain.lower(k) +
             (domain.upper(k) - domain.lower(k)) * static_cast<double>(idx[k]) / (resolution - 1);
    }
    points.push_back(x);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < resolution) break;
      idx[k] = 0;
    }
  }
  return points;
}

namespace detail {

inline std::string format_point(const Point& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

// Argmax scan with lowest-index tie-breaking; rejects non-finite values.
inline std::pair<std::size_t, double> argmax_scan(const std::vector<Point>& candidates,
                                                  const Eigen::VectorXd& values) {
  if (candidates.empty()) throw std::runtime_error("argmax: empty candidate set");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const double v = values(static_cast<Eigen::Index>(j));
    if (!std::isfinite(v)) {
      throw std::runtime_error("argmax: non-finite objective at point " +
                               format_point(candidates[j]));
    }
    if (!have || v > best_value) {
      best = j;
      best_value = v;
      have = true;
    }
  }
  return {best, best_value};
}

// Coordinate descent from a start point, with per-axis steps halved whenever a
// full sweep fails to improve; stops once every step is below 1e-4 of its axis
// length (or after max_levels halvings). Never leaves the box and never
// decreases the objective. An optional feasibility predicate restricts
// accepted moves.
inline std::pair<Point, double> refine(const std::function<double(const Point&)>& objective,
                                       const BoxDomain& domain, Point x, double value,
                                       const Eigen::VectorXd& initial_step, int max_levels,
                                       const std::function<bool(const Point&)>& feasible = {}) {
  const int d = domain.dim();
  Eigen::VectorXd step = initial_step;
  const Eigen::VectorXd floor_step = (domain.upper - domain.lower) * 1e-4;
  for (int level = 0; level < max_levels; ++level) {
    bool sweep_improved = true;
    while (sweep_improved) {
      sweep_improved = false;
      for (int k = 0; k < d; ++k) {
        for (double dir : {+1.0, -1.0}) {
          Point cand = x;
          cand(k) = std::clamp(cand(k) + dir * step(k), domain.lower(k), domain.upper(k));
          if (feasible && !feasible(cand)) continue;
          const double v = objective(cand);
          if (std::isfinite(v) && v > value) {
            x = cand;
            value = v;
            sweep_improved = true;
          }
        }
      }
    }
    step *= 0.5;
    if ((step.array() < floor_step.array()).all()) break;
  }
  return {x, value};
}

inline Eigen::VectorXd grid_spacing(const BoxDomain& domain, int resolution) {
  return (domain.upper - domain.lower) / static_cast<double>(resolution - 1);
}

}  // namespace detail

// Maximizes a black-box objective over the lattice, with optional local
// refinement. Ties break toward the lowest flat index.
inline Point grid_argmax(const std::function<double(const Point&)>& objective,
                         const BoxDomain& domain, const GridSpec& grid) {
  grid.validate();
  const std::vector<Point> candidates = make_grid(domain, grid.resolution);
  Eigen::VectorXd values(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    values(static_cast<Eigen::Index>(j)) = objective(candidates[j]);
  }
  auto [best, best_value] = detail::argmax_scan(candidates, values);
  if (grid.refine_steps > 0) {
    auto [x, v] = detail::refine(objective, domain, candidates[best], best_value,
                                 detail::grid_spacing(domain, grid.resolution), grid.refine_steps);
    return x;
  }
  return candidates[best];
}

// Offline constrained baseline: best grid point of f subject to g(x) <= 0,
// refined within the feasible set when refinement is enabled.
inline std::pair<Point, double> constrained_oracle(const std::function<double(const Point&)>& f,
                                                   const std::function<double(const Point&)>& g,
                                                   const BoxDomain& domain, const GridSpec& grid) {
  grid.validate();
  const std::vector<Point> candidates = make_grid(domain, grid.resolution);
  bool have = false;
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (g(candidates[j]) > 0.0) continue;
    const double v = f(candidates[j]);
    if (!std::isfinite(v)) {
      throw std::runtime_error("constrained_oracle: non-finite objective at point " +
                               detail::format_point(candidates[j]));
    }
    if (!have || v > best_value) {
      best = j;
      best_value = v;
      have = true;
    }
  }
  if (!have) {
    throw std::runtime_error("constrained_oracle: no feasible grid point (environment misconfigured)");
  }
  if (grid.refine_steps > 0) {
    return detail::refine(f, domain, candidates[best], best_value,
                          detail::grid_spacing(domain, grid.resolution), grid.refine_steps,
                          [&](const Point& x) { return g(x) <= 0.0; });
  }
  return {candidates[best], best_value};
}

// Candidate set for per-round surrogate maximization. The policy path is
// grid-only (no refinement) so action traces are deterministic.
class DomainOptimizer {
public:
  DomainOptimizer(const BoxDomain& domain, const GridSpec& grid)
      : candidates_(std::make_shared<std::vector<Point>>(make_grid(domain, grid.resolution))) {}

  explicit DomainOptimizer(std::vector<Point> candidates)
      : candidates_(std::make_shared<std::vector<Point>>(std::move(candidates))) {
    if (candidates_->empty()) throw std::invalid_argument("DomainOptimizer: empty candidate set");
  }

  const std::vector<Point>& candidates() const { return *candidates_; }
  std::shared_ptr<const std::vector<Point>> shared_candidates() const { return candidates_; }

  std::pair<std::size_t, double> argmax_values(const Eigen::VectorXd& values) const {
    return detail::argmax_scan(*candidates_, values);
  }

  std::pair<std::size_t, double> argmax(const std::function<double(const Point&)>& objective) const {
    Eigen::VectorXd values(static_cast<Eigen::Index>(candidates_->size()));
    for (std::size_t j = 0; j < candidates_->size(); ++j) {
      values(static_cast<Eigen::Index>(j)) = objective((*candidates_)[j]);
    }
    return argmax_values(values);
  }

private:
  std::shared_ptr<const std::vector<Point>> candidates_;
};

}  // namespace rpol
