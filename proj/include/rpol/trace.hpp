#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpol/kernel.hpp"

namespace rpol {

// One row per round. r_obs / c_obs stay empty until the observation has been
// revealed within the horizon.
struct TraceRow {
  int t = 0;
  Point x;
  double f_true = 0.0;
  double g_true = 0.0;
  std::optional<double> r_obs;
  std::optional<double> c_obs;
  double Q = 1.0;  // penalty used for the round's decision (dual variable for baselines)
  double beta_f = 0.0;
  double beta_g = 0.0;
  double extra_scaler = 0.0;  // v^f (censored) or Gamma^f (sliding window), else 0
  double sigma_f = 1.0;
  double sigma_g = 1.0;
};

struct TraceMeta {
  std::string variant;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct Trace {
  TraceMeta meta;
  std::vector<TraceRow> rows;

  int horizon() const { return static_cast<int>(rows.size()); }
  int dim() const { return rows.empty() ? 0 : static_cast<int>(rows.front().x.size()); }
};

namespace detail {

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_trace_csv(const Trace& trace, std::ostream& os) {
  const int d = trace.dim();
  os << "t";
  for (int k = 1; k <= d; ++k) os << ",x_" << k;
  os << ",f_true,g_true,r_obs,c_obs,Q,beta_f,beta_g,extra_scaler,sigma_f,sigma_g\n";
  for (const TraceRow& row : trace.rows) {
    os << row.t;
    for (int k = 0; k < d; ++k) os << "," << detail::format_full(row.x(k));
    os << "," << detail::format_full(row.f_true);
    os << "," << detail::format_full(row.g_true);
    os << "," << (row.r_obs ? detail::format_full(*row.r_obs) : std::string());
    os << "," << (row.c_obs ? detail::format_full(*row.c_obs) : std::string());
    os << "," << detail::format_full(row.Q);
    os << "," << detail::format_full(row.beta_f);
    os << "," << detail::format_full(row.beta_g);
    os << "," << detail::format_full(row.extra_scaler);
    os << "," << detail::format_full(row.sigma_f);
    os << "," << detail::format_full(row.sigma_g);
    os << "\n";
  }
}

inline Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_trace_csv: empty stream");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int d = 0;
  while (1 + d < static_cast<int>(header.size()) && header[1 + d].rfind("x_", 0) == 0) ++d;
  if (d < 1 || header.size() != static_cast<std::size_t>(d) + 11) {
    throw std::runtime_error("read_trace_csv: unexpected header layout");
  }

  Trace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < header.size()) cells.push_back("");  // trailing blanks
    if (cells.size() != header.size()) {
      throw std::runtime_error("read_trace_csv: ragged row");
    }
    TraceRow row;
    std::size_t c = 0;
    row.t = std::stoi(cells[c++]);
    row.x = Point(d);
    for (int k = 0; k < d; ++k) row.x(k) = std::stod(cells[c++]);
    row.f_true = std::stod(cells[c++]);
    row.g_true = std::stod(cells[c++]);
    if (!cells[c].empty()) row.r_obs = std::stod(cells[c]);
    ++c;
    if (!cells[c].empty()) row.c_obs = std::stod(cells[c]);
    ++c;
    row.Q = std::stod(cells[c++]);
    row.beta_f = std::stod(cells[c++]);
    row.beta_g = std::stod(cells[c++]);
    row.extra_scaler = std::stod(cells[c++]);
    row.sigma_f = std::stod(cells[c++]);
    row.sigma_g = std::stod(cells[c++]);
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

// Rectified-penalty trajectory invariants: the Q column never decreases and
// the round-(t+1) value respects the sqrt(t) floor. Returns a description of
// the first violating round, if any. Applies to RPOL variants only; baseline
// traces carry a dual variable in the Q column.
inline std::optional<std::string> check_penalty_invariants(const Trace& trace) {
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    if (i == 0) {
      if (row.Q < 1.0) return "Q below 1 at round " + std::to_string(row.t);
      continue;
    }
    const TraceRow& prev = trace.rows[i - 1];
    if (row.Q < prev.Q) {
      return "Q decreased at round " + std::to_string(row.t);
    }
    if (row.Q < std::sqrt(static_cast<double>(prev.t))) {
      return "Q below sqrt(t) floor at round " + std::to_string(row.t);
    }
  }
  return std::nullopt;
}

}  // namespace rpol
