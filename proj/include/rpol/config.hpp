#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpol/environment.hpp"
#include "rpol/estimators.hpp"
#include "rpol/policy.hpp"

namespace rpol {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inline environment description: segments of the built-in function families
// plus a box domain. Noise and delay come from the top-level config keys.
struct InlineEnvironment {
  std::vector<SegmentSpec> segments;
  std::vector<double> lower{0.0, 0.0};
  std::vector<double> upper{6.0, 6.0};
};

// Fully resolved experiment description. Every key has a documented default;
// the persisted form is self-contained.
struct ExperimentConfig {
  std::string environment = "scbwc";
  std::optional<InlineEnvironment> inline_env;
  int T = 500;
  std::string variant = "rpol-ucb";  // rpol-ucb | rpol-censored-ucb | rpol-sw-ucb | primal-dual
  double B_f = 2.0;
  double B_g = 2.0;
  std::optional<double> R_f;  // default: sqrt(reward noise variance)
  std::optional<double> R_g;
  double p = 0.05;
  double lengthscale = 1.0;
  std::optional<double> lambda_override;
  int grid_resolution = 100;
  int oracle_resolution = 1001;
  int oracle_refine_steps = 32;
  int m = 25;
  std::optional<int> W;
  bool W_theorem5 = false;
  std::optional<double> P_T;
  std::optional<double> gamma_hat_estimate;
  double gamma_cap = 20.0;
  std::string variation_mode = "zero";     // zero | supplied
  std::string scaler_profile = "auto";     // auto | ucb | censored | sliding-window
  std::optional<double> reward_noise_var;  // default: environment's value
  std::optional<double> cost_noise_var;
  bool noise_is_std = false;
  std::optional<DelaySpec> delay_override;
  double dual_step = 0.0;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir;
  std::string run_name;
  std::optional<std::string> oracle_fixture;

  double lambda() const {
    return lambda_override ? *lambda_override : 1.0 + 2.0 / static_cast<double>(T);
  }
};

inline VariantKind variant_kind(const std::string& name) {
  if (name == "rpol-ucb" || name == "primal-dual") return VariantKind::RpolUcb;
  if (name == "rpol-censored-ucb") return VariantKind::RpolCensoredUcb;
  if (name == "rpol-sw-ucb") return VariantKind::RpolSwUcb;
  throw ConfigError("variant: unknown value '" + name + "'");
}

inline ScalerProfile scaler_profile_from(const std::string& name) {
  if (name == "auto") return ScalerProfile::Auto;
  if (name == "ucb") return ScalerProfile::Ucb;
  if (name == "censored") return ScalerProfile::Censored;
  if (name == "sliding-window") return ScalerProfile::SlidingWindow;
  throw ConfigError("scaler_profile: unknown value '" + name + "'");
}

// Window size from the configured value or from W = gamma^{1/4} (T / P_T)^{1/2}.
inline int resolve_window(const ExperimentConfig& cfg) {
  if (cfg.W_theorem5) {
    if (!cfg.P_T || !(*cfg.P_T > 0.0)) {
      throw ConfigError("P_T: required and positive when W is \"theorem5\"");
    }
    if (!cfg.gamma_hat_estimate || !(*cfg.gamma_hat_estimate > 0.0)) {
      throw ConfigError("gamma_hat_estimate: required and positive when W is \"theorem5\"");
    }
    const double w = std::pow(*cfg.gamma_hat_estimate, 0.25) *
                     std::sqrt(static_cast<double>(cfg.T) / *cfg.P_T);
    return std::max(1, static_cast<int>(std::llround(w)));
  }
  if (!cfg.W) throw ConfigError("W: required for the sliding-window variant");
  return *cfg.W;
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.T < 1) throw ConfigError("T: must be >= 1");
  variant_kind(cfg.variant);
  scaler_profile_from(cfg.scaler_profile);
  if (!(cfg.B_f > 0.0)) throw ConfigError("B_f: must be positive");
  if (!(cfg.B_g > 0.0)) throw ConfigError("B_g: must be positive");
  if (cfg.R_f && *cfg.R_f < 0.0) throw ConfigError("R_f: must be nonnegative");
  if (cfg.R_g && *cfg.R_g < 0.0) throw ConfigError("R_g: must be nonnegative");
  if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw ConfigError("p: must lie in (0,1)");
  if (!(cfg.lengthscale > 0.0)) throw ConfigError("lengthscale: must be positive");
  if (cfg.lambda_override && !(*cfg.lambda_override > 0.0)) {
    throw ConfigError("lambda: must be positive");
  }
  if (cfg.grid_resolution < 2) throw ConfigError("grid_resolution: must be >= 2");
  if (cfg.oracle_resolution < 2) throw ConfigError("oracle_resolution: must be >= 2");
  if (cfg.oracle_refine_steps < 0) throw ConfigError("oracle_refine_steps: must be >= 0");
  if (cfg.m < 1) throw ConfigError("m: must be >= 1");
  if (cfg.W && *cfg.W < 1) throw ConfigError("W: must be >= 1");
  if (cfg.variant == "rpol-sw-ucb") resolve_window(cfg);
  if (!(cfg.gamma_cap > 0.0)) throw ConfigError("gamma_cap: must be positive");
  if (cfg.variation_mode != "zero" && cfg.variation_mode != "supplied") {
    throw ConfigError("variation_mode: must be \"zero\" or \"supplied\"");
  }
  if (cfg.reward_noise_var && *cfg.reward_noise_var < 0.0) {
    throw ConfigError("reward_noise_var: must be nonnegative");
  }
  if (cfg.cost_noise_var && *cfg.cost_noise_var < 0.0) {
    throw ConfigError("cost_noise_var: must be nonnegative");
  }
  if (cfg.seeds.empty()) throw ConfigError("seeds: at least one seed required");
  if (cfg.environment != "inline" && cfg.inline_env) {
    throw ConfigError("schedule: only allowed when environment is \"inline\"");
  }
  if (cfg.environment == "inline" && !cfg.inline_env) {
    throw ConfigError("schedule: required when environment is \"inline\"");
  }
}

// Environment with config-level noise/delay overrides applied, and with
// variation norms zeroed when variation_mode is "zero".
inline Environment build_environment(const ExperimentConfig& cfg) {
  Environment env = [&] {
    if (cfg.environment == "inline") {
      const InlineEnvironment& ie = *cfg.inline_env;
      BoxDomain box;
      box.lower = Eigen::Map<const Eigen::VectorXd>(ie.lower.data(),
                                                    static_cast<Eigen::Index>(ie.lower.size()));
      box.upper = Eigen::Map<const Eigen::VectorXd>(ie.upper.data(),
                                                    static_cast<Eigen::Index>(ie.upper.size()));
      return Environment(build_schedule(ie.segments), box, NoiseSpec{}, DelaySpec{}, ie.segments);
    }
    return Environment::builtin(cfg.environment);
  }();

  std::vector<SegmentSpec> specs = env.segment_specs();
  if (cfg.variation_mode == "zero") {
    for (auto& s : specs) {
      s.variation_f_norm = 0.0;
      s.variation_g_norm = 0.0;
    }
  }
  NoiseSpec noise = env.noise();
  if (cfg.reward_noise_var) {
    noise.reward_noise_var =
        cfg.noise_is_std ? (*cfg.reward_noise_var) * (*cfg.reward_noise_var) : *cfg.reward_noise_var;
  }
  if (cfg.cost_noise_var) {
    noise.cost_noise_var =
        cfg.noise_is_std ? (*cfg.cost_noise_var) * (*cfg.cost_noise_var) : *cfg.cost_noise_var;
  }
  DelaySpec delay = cfg.delay_override ? *cfg.delay_override : env.delay();
  return Environment(build_schedule(specs), env.domain(), noise, delay, specs);
}

inline ConfidenceParams confidence_params(const ExperimentConfig& cfg) {
  const Environment env = build_environment(cfg);
  ConfidenceParams params;
  params.B_f = cfg.B_f;
  params.B_g = cfg.B_g;
  params.R_f = cfg.R_f ? *cfg.R_f : std::sqrt(env.noise().reward_noise_var);
  params.R_g = cfg.R_g ? *cfg.R_g : std::sqrt(env.noise().cost_noise_var);
  params.p = cfg.p;
  params.T = cfg.T;
  return params;
}

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key + ": expected a number");
  return j.get<double>();
}

inline int require_int(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key + ": expected an integer");
  return j.get<int>();
}

inline std::string require_string(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key + ": expected a string");
  return j.get<std::string>();
}

inline DelaySpec parse_delay(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("delay: expected an object with a \"kind\" key");
  DelaySpec d;
  const std::string kind = require_string(j.at("kind"), "delay.kind");
  if (kind == "none") {
    d.kind = DelaySpec::Kind::None;
  } else if (kind == "poisson") {
    d.kind = DelaySpec::Kind::Poisson;
    d.mean = require_number(j.at("mean"), "delay.mean");
  } else if (kind == "fixed") {
    d.kind = DelaySpec::Kind::Fixed;
    d.fixed = require_int(j.at("d"), "delay.d");
  } else {
    throw ConfigError("delay.kind: unknown value '" + kind + "'");
  }
  d.validate();
  return d;
}

inline nlohmann::json delay_to_json(const DelaySpec& d) {
  switch (d.kind) {
    case DelaySpec::Kind::None: return {{"kind", "none"}};
    case DelaySpec::Kind::Poisson: return {{"kind", "poisson"}, {"mean", d.mean}};
    case DelaySpec::Kind::Fixed: return {{"kind", "fixed"}, {"d", d.fixed}};
  }
  return {};
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> known = {
      "environment", "schedule", "domain_lower", "domain_upper", "T", "variant",
      "B_f", "B_g", "R_f", "R_g", "p", "lengthscale", "lambda", "grid_resolution",
      "oracle_resolution", "oracle_refine_steps", "m", "W", "P_T", "gamma_hat_estimate",
      "gamma_cap", "variation_mode", "scaler_profile", "reward_noise_var", "cost_noise_var",
      "noise_is_std", "delay", "dual_step", "seed", "seeds", "output_dir", "run_name",
      "oracle_fixture"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  ExperimentConfig cfg;
  if (doc.contains("environment")) cfg.environment = detail::require_string(doc["environment"], "environment");
  if (doc.contains("T")) cfg.T = detail::require_int(doc["T"], "T");
  if (doc.contains("variant")) cfg.variant = detail::require_string(doc["variant"], "variant");
  if (doc.contains("B_f")) cfg.B_f = detail::require_number(doc["B_f"], "B_f");
  if (doc.contains("B_g")) cfg.B_g = detail::require_number(doc["B_g"], "B_g");
  if (doc.contains("R_f")) cfg.R_f = detail::require_number(doc["R_f"], "R_f");
  if (doc.contains("R_g")) cfg.R_g = detail::require_number(doc["R_g"], "R_g");
  if (doc.contains("p")) cfg.p = detail::require_number(doc["p"], "p");
  if (doc.contains("lengthscale")) cfg.lengthscale = detail::require_number(doc["lengthscale"], "lengthscale");
  if (doc.contains("lambda") && !doc["lambda"].is_null()) {
    cfg.lambda_override = detail::require_number(doc["lambda"], "lambda");
  }
  if (doc.contains("grid_resolution")) {
    cfg.grid_resolution = detail::require_int(doc["grid_resolution"], "grid_resolution");
  }
  if (doc.contains("oracle_resolution")) {
    cfg.oracle_resolution = detail::require_int(doc["oracle_resolution"], "oracle_resolution");
  }
  if (doc.contains("oracle_refine_steps")) {
    cfg.oracle_refine_steps = detail::require_int(doc["oracle_refine_steps"], "oracle_refine_steps");
  }
  if (doc.contains("m")) cfg.m = detail::require_int(doc["m"], "m");
  if (doc.contains("W")) {
    if (doc["W"].is_string()) {
      if (doc["W"].get<std::string>() != "theorem5") {
        throw ConfigError("W: must be an integer or \"theorem5\"");
      }
      cfg.W_theorem5 = true;
    } else {
      cfg.W = detail::require_int(doc["W"], "W");
    }
  }
  if (doc.contains("P_T")) cfg.P_T = detail::require_number(doc["P_T"], "P_T");
  if (doc.contains("gamma_hat_estimate")) {
    cfg.gamma_hat_estimate = detail::require_number(doc["gamma_hat_estimate"], "gamma_hat_estimate");
  }
  if (doc.contains("gamma_cap")) cfg.gamma_cap = detail::require_number(doc["gamma_cap"], "gamma_cap");
  if (doc.contains("variation_mode")) {
    cfg.variation_mode = detail::require_string(doc["variation_mode"], "variation_mode");
  }
  if (doc.contains("scaler_profile")) {
    cfg.scaler_profile = detail::require_string(doc["scaler_profile"], "scaler_profile");
  }
  if (doc.contains("reward_noise_var")) {
    cfg.reward_noise_var = detail::require_number(doc["reward_noise_var"], "reward_noise_var");
  }
  if (doc.contains("cost_noise_var")) {
    cfg.cost_noise_var = detail::require_number(doc["cost_noise_var"], "cost_noise_var");
  }
  if (doc.contains("noise_is_std")) {
    if (!doc["noise_is_std"].is_boolean()) throw ConfigError("noise_is_std: expected a boolean");
    cfg.noise_is_std = doc["noise_is_std"].get<bool>();
  }
  if (doc.contains("delay")) cfg.delay_override = detail::parse_delay(doc["delay"]);
  if (doc.contains("dual_step")) cfg.dual_step = detail::require_number(doc["dual_step"], "dual_step");
  if (doc.contains("seed") && doc.contains("seeds")) {
    throw ConfigError("seed: give either \"seed\" or \"seeds\", not both");
  }
  if (doc.contains("seed")) {
    cfg.seeds = {static_cast<std::uint64_t>(detail::require_int(doc["seed"], "seed"))};
  }
  if (doc.contains("seeds")) {
    if (!doc["seeds"].is_array()) throw ConfigError("seeds: expected an array of integers");
    cfg.seeds.clear();
    for (const auto& s : doc["seeds"]) {
      cfg.seeds.push_back(static_cast<std::uint64_t>(detail::require_int(s, "seeds")));
    }
  }
  if (doc.contains("output_dir")) cfg.output_dir = detail::require_string(doc["output_dir"], "output_dir");
  if (doc.contains("run_name")) cfg.run_name = detail::require_string(doc["run_name"], "run_name");
  if (doc.contains("oracle_fixture")) {
    cfg.oracle_fixture = detail::require_string(doc["oracle_fixture"], "oracle_fixture");
  }
  if (doc.contains("schedule")) {
    if (!doc["schedule"].is_array()) throw ConfigError("schedule: expected an array of segments");
    InlineEnvironment ie;
    for (const auto& seg : doc["schedule"]) {
      SegmentSpec s;
      s.start_round = detail::require_int(seg.at("start_round"), "schedule.start_round");
      if (seg.contains("f_shift")) s.f_shift = detail::require_number(seg["f_shift"], "schedule.f_shift");
      if (seg.contains("g_shift_x1")) s.g_shift_x1 = detail::require_number(seg["g_shift_x1"], "schedule.g_shift_x1");
      if (seg.contains("g_shift_x2")) s.g_shift_x2 = detail::require_number(seg["g_shift_x2"], "schedule.g_shift_x2");
      if (seg.contains("g_offset")) s.g_offset = detail::require_number(seg["g_offset"], "schedule.g_offset");
      if (seg.contains("variation_f_norm")) {
        s.variation_f_norm = detail::require_number(seg["variation_f_norm"], "schedule.variation_f_norm");
      }
      if (seg.contains("variation_g_norm")) {
        s.variation_g_norm = detail::require_number(seg["variation_g_norm"], "schedule.variation_g_norm");
      }
      ie.segments.push_back(s);
    }
    if (doc.contains("domain_lower")) ie.lower = doc["domain_lower"].get<std::vector<double>>();
    if (doc.contains("domain_upper")) ie.upper = doc["domain_upper"].get<std::vector<double>>();
    cfg.inline_env = std::move(ie);
  } else if (doc.contains("domain_lower") || doc.contains("domain_upper")) {
    throw ConfigError("domain_lower: only allowed together with an inline schedule");
  }

  validate(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config_json(doc);
}

// Fully resolved form: every default is materialized so the persisted config
// is self-contained.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  const ConfidenceParams params = confidence_params(cfg);
  const Environment env = build_environment(cfg);
  nlohmann::json doc;
  doc["environment"] = cfg.environment;
  if (cfg.inline_env) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : cfg.inline_env->segments) {
      segs.push_back({{"start_round", s.start_round},
                      {"f_shift", s.f_shift},
                      {"g_shift_x1", s.g_shift_x1},
                      {"g_shift_x2", s.g_shift_x2},
                      {"g_offset", s.g_offset},
                      {"variation_f_norm", s.variation_f_norm},
                      {"variation_g_norm", s.variation_g_norm}});
    }
    doc["schedule"] = segs;
    doc["domain_lower"] = cfg.inline_env->lower;
    doc["domain_upper"] = cfg.inline_env->upper;
  }
  doc["T"] = cfg.T;
  doc["variant"] = cfg.variant;
  doc["B_f"] = cfg.B_f;
  doc["B_g"] = cfg.B_g;
  doc["R_f"] = params.R_f;
  doc["R_g"] = params.R_g;
  doc["p"] = cfg.p;
  doc["lengthscale"] = cfg.lengthscale;
  doc["lambda"] = cfg.lambda();
  doc["grid_resolution"] = cfg.grid_resolution;
  doc["oracle_resolution"] = cfg.oracle_resolution;
  doc["oracle_refine_steps"] = cfg.oracle_refine_steps;
  doc["m"] = cfg.m;
  if (cfg.variant == "rpol-sw-ucb") doc["W"] = resolve_window(cfg);
  if (cfg.P_T) doc["P_T"] = *cfg.P_T;
  if (cfg.gamma_hat_estimate) doc["gamma_hat_estimate"] = *cfg.gamma_hat_estimate;
  doc["gamma_cap"] = cfg.gamma_cap;
  doc["variation_mode"] = cfg.variation_mode;
  doc["scaler_profile"] = cfg.scaler_profile;
  doc["reward_noise_var"] = env.noise().reward_noise_var;
  doc["cost_noise_var"] = env.noise().cost_noise_var;
  doc["delay"] = detail::delay_to_json(env.delay());
  doc["dual_step"] = cfg.dual_step;
  doc["seeds"] = cfg.seeds;
  doc["output_dir"] = cfg.output_dir;
  doc["run_name"] = cfg.run_name;
  if (cfg.oracle_fixture) doc["oracle_fixture"] = *cfg.oracle_fixture;
  return doc;
}

// Stable 64-bit FNV-1a over the canonical dump, excluding seed/output fields
// so runs differing only in seed share a hash.
inline std::string config_hash(const ExperimentConfig& cfg) {
  nlohmann::json doc = config_to_json(cfg);
  doc.erase("seeds");
  doc.erase("output_dir");
  doc.erase("run_name");
  const std::string dump = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace rpol
