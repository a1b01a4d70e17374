// Copyright 2026 The idmpf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON configuration. Every reader rejects unknown keys and reports type errors as ConfigError;
// every writer emits the fully resolved form used in run manifests.

#ifndef IDMPF__CONFIG_HPP_
#define IDMPF__CONFIG_HPP_

#include "idmpf/adapters.hpp"
#include "idmpf/errors.hpp"
#include "idmpf/filter.hpp"
#include "idmpf/models.hpp"
#include "idmpf/pipeline.hpp"
#include "idmpf/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

namespace idmpf::config
{

using Json = nlohmann::json;

namespace detail
{

inline void require_object(const Json & j, const std::string & where)
{
  if (!j.is_object()) {
    throw ConfigError(where + ": expected a JSON object");
  }
}

inline void check_keys(const Json & j, const std::string & where, std::initializer_list<const char *> allowed)
{
  require_object(j, where);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto & item : j.items()) {
    if (ok.count(item.key()) == 0) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <class T>
void read(const Json & j, const char * key, T & out, const std::string & where)
{
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception &) {
      throw ConfigError(where + "." + key + ": wrong type");
    }
  }
}

template <class Enum>
Enum read_enum(
  const Json & j, const char * key, Enum fallback, const std::string & where,
  std::initializer_list<std::pair<const char *, Enum>> names)
{
  auto it = j.find(key);
  if (it == j.end()) {
    return fallback;
  }
  if (!it->is_string()) {
    throw ConfigError(where + "." + key + ": expected a string");
  }
  const auto value = it->get<std::string>();
  std::string choices;
  for (const auto & [n, e] : names) {
    if (value == n) {
      return e;
    }
    choices += choices.empty() ? n : std::string("|") + n;
  }
  throw ConfigError(where + "." + key + ": '" + value + "' is not one of " + choices);
}

}  // namespace detail

inline Json read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

// ---- grid / presets ----

inline GridAxis grid_from_json(const Json & j, GridAxis axis, const std::string & where)
{
  detail::check_keys(j, where, {"lo", "hi", "resolution"});
  detail::read(j, "lo", axis.lo, where);
  detail::read(j, "hi", axis.hi, where);
  detail::read(j, "resolution", axis.resolution, where);
  return axis;
}

inline Json to_json(const GridAxis & g) { return {{"lo", g.lo}, {"hi", g.hi}, {"resolution", g.resolution}}; }

inline Json to_json(const IdmParams & p)
{
  return {{"v_des", p.v_des()}, {"d_min", p.d_min()}, {"tau", p.tau()}, {"a_max", p.a_max()}, {"b_pref", p.b_pref()}};
}

/// "default" / "nonlinear_fit", or an object {"base": name, <field overrides>}.
inline IdmParams preset_from_json(const Json & j, const std::string & where = "preset")
{
  if (j.is_string()) {
    return builtin_preset(j.get<std::string>());
  }
  detail::check_keys(j, where, {"base", "v_des", "d_min", "tau", "a_max", "b_pref"});
  std::string base = "default";
  detail::read(j, "base", base, where);
  const IdmParams p = builtin_preset(base);
  double v = p.v_des(), d = p.d_min(), t = p.tau(), a = p.a_max(), b = p.b_pref();
  detail::read(j, "v_des", v, where);
  detail::read(j, "d_min", d, where);
  detail::read(j, "tau", t, where);
  detail::read(j, "a_max", a, where);
  detail::read(j, "b_pref", b, where);
  try {
    return IdmParams(v, d, t, a, b);
  } catch (const DomainError & e) {
    throw ConfigError(where + ": " + e.what());
  }
}

// ---- filter ----

namespace detail
{
inline std::vector<int> offsets_to_steps(const Json & j, double resolution, const std::string & where)
{
  std::vector<double> offsets;
  try {
    offsets = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception &) {
    throw ConfigError(where + ": expected an array of numbers");
  }
  std::vector<int> steps;
  for (double o : offsets) {
    const double s = o / resolution;
    if (!std::isfinite(s) || std::abs(s - std::round(s)) > 1e-9) {
      throw ConfigError(where + ": offset " + std::to_string(o) + " is not a multiple of the grid resolution");
    }
    steps.push_back(static_cast<int>(std::lround(s)));
  }
  return steps;
}
}  // namespace detail

inline FilterConfig filter_from_json(const Json & j, FilterConfig cfg = {})
{
  const std::string w = "filter";
  detail::check_keys(
    j, w,
    {"particle_count", "v_des", "sigma", "dither_fraction", "v_des_dither", "sigma_dither", "proposal", "noise_model",
     "kinematics"});
  detail::read(j, "particle_count", cfg.particle_count, w);
  if (j.contains("v_des")) {
    cfg.v_des = grid_from_json(j["v_des"], cfg.v_des, w + ".v_des");
  }
  if (j.contains("sigma")) {
    cfg.sigma = grid_from_json(j["sigma"], cfg.sigma, w + ".sigma");
  }
  detail::read(j, "dither_fraction", cfg.dither_fraction, w);
  if (j.contains("v_des_dither")) {
    cfg.v_des_dither_steps = detail::offsets_to_steps(j["v_des_dither"], cfg.v_des.resolution, w + ".v_des_dither");
  }
  if (j.contains("sigma_dither")) {
    cfg.sigma_dither_steps = detail::offsets_to_steps(j["sigma_dither"], cfg.sigma.resolution, w + ".sigma_dither");
  }
  cfg.proposal = detail::read_enum(
    j, "proposal", cfg.proposal, w, {{"literal", ProposalMode::literal}, {"sweep", ProposalMode::sweep}});
  cfg.noise = detail::read_enum(
    j, "noise_model", cfg.noise, w, {{"kinematic", NoiseModel::kinematic}, {"dt_squared", NoiseModel::dt_squared}});
  cfg.kinematics =
    detail::read_enum(j, "kinematics", cfg.kinematics, w, {{"full", Kinematics::full}, {"no_drift", Kinematics::no_drift}});
  cfg.validate();
  return cfg;
}

inline Json to_json(const FilterConfig & c)
{
  auto offsets = [](const std::vector<int> & steps, double res) {
    Json a = Json::array();
    for (int s : steps) {
      a.push_back(s * res);
    }
    return a;
  };
  return {
    {"particle_count", c.particle_count},
    {"v_des", to_json(c.v_des)},
    {"sigma", to_json(c.sigma)},
    {"dither_fraction", c.dither_fraction},
    {"v_des_dither", offsets(c.v_des_dither_steps, c.v_des.resolution)},
    {"sigma_dither", offsets(c.sigma_dither_steps, c.sigma.resolution)},
    {"proposal", c.proposal == ProposalMode::literal ? "literal" : "sweep"},
    {"noise_model", c.noise == NoiseModel::kinematic ? "kinematic" : "dt_squared"},
    {"kinematics", c.kinematics == Kinematics::full ? "full" : "no_drift"},
  };
}

// ---- synthetic spec ----

inline LeadProfile lead_from_json(const Json & j, LeadProfile p = {})
{
  const std::string w = "synth.lead";
  detail::check_keys(j, w, {"kind", "speed", "high", "low", "half_period", "accel", "decel"});
  p.kind = detail::read_enum(
    j, "kind", p.kind, w, {{"constant", LeadProfile::Kind::constant}, {"stop_and_go", LeadProfile::Kind::stop_and_go}});
  detail::read(j, "speed", p.speed, w);
  detail::read(j, "high", p.high, w);
  detail::read(j, "low", p.low, w);
  detail::read(j, "half_period", p.half_period, w);
  detail::read(j, "accel", p.accel, w);
  detail::read(j, "decel", p.decel, w);
  if (!(p.speed >= 0.0) || !(p.low >= 0.0) || !(p.high >= p.low) || !(p.half_period > 0.0) || !(p.accel > 0.0) ||
      !(p.decel > 0.0)) {
    throw ConfigError(w + ": speeds must be non-negative and rates positive");
  }
  return p;
}

inline Json to_json(const LeadProfile & p)
{
  return {
    {"kind", p.kind == LeadProfile::Kind::constant ? "constant" : "stop_and_go"},
    {"speed", p.speed},
    {"high", p.high},
    {"low", p.low},
    {"half_period", p.half_period},
    {"accel", p.accel},
    {"decel", p.decel},
  };
}

inline SynthSpec synth_from_json(const Json & j, SynthSpec s = {})
{
  const std::string w = "synth";
  detail::check_keys(
    j, w,
    {"scenario_prefix", "scenario_count", "vehicle_count", "gap_min", "gap_max", "vehicle_length", "v_des", "sigma",
     "start_at_desired_speed", "speed_min", "speed_max", "lead", "lead_vehicle", "horizon", "dt", "preset", "lane", "seed"});
  detail::read(j, "scenario_prefix", s.scenario_prefix, w);
  detail::read(j, "scenario_count", s.scenario_count, w);
  detail::read(j, "vehicle_count", s.vehicle_count, w);
  detail::read(j, "gap_min", s.gap_min, w);
  detail::read(j, "gap_max", s.gap_max, w);
  detail::read(j, "vehicle_length", s.vehicle_length, w);
  if (j.contains("v_des")) {
    s.v_des = grid_from_json(j["v_des"], s.v_des, w + ".v_des");
  }
  if (j.contains("sigma")) {
    s.sigma = grid_from_json(j["sigma"], s.sigma, w + ".sigma");
  }
  detail::read(j, "start_at_desired_speed", s.start_at_desired_speed, w);
  detail::read(j, "speed_min", s.speed_min, w);
  detail::read(j, "speed_max", s.speed_max, w);
  if (j.contains("lead")) {
    s.lead = lead_from_json(j["lead"], s.lead);
  }
  detail::read(j, "lead_vehicle", s.lead_vehicle, w);
  detail::read(j, "horizon", s.horizon, w);
  detail::read(j, "dt", s.dt, w);
  if (j.contains("preset")) {
    s.base = preset_from_json(j["preset"], w + ".preset");
  }
  detail::read(j, "lane", s.lane, w);
  detail::read(j, "seed", s.seed, w);
  s.validate();
  return s;
}

inline Json to_json(const SynthSpec & s)
{
  return {
    {"scenario_prefix", s.scenario_prefix},
    {"scenario_count", s.scenario_count},
    {"vehicle_count", s.vehicle_count},
    {"gap_min", s.gap_min},
    {"gap_max", s.gap_max},
    {"vehicle_length", s.vehicle_length},
    {"v_des", to_json(s.v_des)},
    {"sigma", to_json(s.sigma)},
    {"start_at_desired_speed", s.start_at_desired_speed},
    {"speed_min", s.speed_min},
    {"speed_max", s.speed_max},
    {"lead", to_json(s.lead)},
    {"lead_vehicle", s.lead_vehicle},
    {"horizon", s.horizon},
    {"dt", s.dt},
    {"preset", to_json(s.base)},
    {"lane", s.lane},
    {"seed", s.seed},
  };
}

// ---- column maps ----

inline ColumnMap column_map_from_json(const Json & j)
{
  const std::string w = "column_map";
  detail::check_keys(
    j, w,
    {"format", "columns", "delimiter", "has_header", "column_names", "position_scale", "length_scale",
     "velocity_scale", "dt", "scenario_id", "direction", "anchor", "description"});
  ColumnMap m;
  if (!j.contains("columns")) {
    throw ConfigError(w + ": missing 'columns'");
  }
  const Json & c = j["columns"];
  detail::check_keys(c, w + ".columns", {"vehicle_id", "frame", "lane", "position", "length", "velocity", "scenario"});
  detail::read(c, "vehicle_id", m.vehicle_id, w);
  detail::read(c, "frame", m.frame, w);
  detail::read(c, "lane", m.lane, w);
  detail::read(c, "position", m.position, w);
  detail::read(c, "length", m.length, w);
  if (c.contains("velocity")) {
    std::string v;
    detail::read(c, "velocity", v, w);
    m.velocity = v;
  }
  if (c.contains("scenario")) {
    std::string v;
    detail::read(c, "scenario", v, w);
    m.scenario = v;
  }
  detail::read(j, "delimiter", m.delimiter, w);
  detail::read(j, "has_header", m.has_header, w);
  detail::read(j, "column_names", m.columns, w);
  detail::read(j, "position_scale", m.position_scale, w);
  detail::read(j, "length_scale", m.length_scale, w);
  detail::read(j, "velocity_scale", m.velocity_scale, w);
  detail::read(j, "dt", m.dt, w);
  detail::read(j, "scenario_id", m.scenario_id, w);
  m.direction = detail::read_enum(
    j, "direction", m.direction, w,
    {{"positive", ColumnMap::Direction::positive},
     {"negative", ColumnMap::Direction::negative},
     {"from_velocity", ColumnMap::Direction::from_velocity}});
  m.anchor = detail::read_enum(
    j, "anchor", m.anchor, w,
    {{"front", ColumnMap::Anchor::front}, {"rear", ColumnMap::Anchor::rear}, {"bbox_min", ColumnMap::Anchor::bbox_min}});
  if (!m.has_header && m.columns.empty()) {
    throw ConfigError(w + ": headerless input needs 'column_names'");
  }
  if (!(m.position_scale > 0.0) || !(m.length_scale > 0.0) || !(m.velocity_scale > 0.0) || m.dt < 0.0) {
    throw ConfigError(w + ": scales must be positive and dt non-negative");
  }
  return m;
}

// ---- benchmark ----

inline BenchmarkSettings benchmark_from_json(const Json & j, BenchmarkSettings b = {})
{
  const std::string w = "benchmark";
  detail::check_keys(
    j, w,
    {"models", "targets", "target_count", "horizon", "start_sample", "nontarget_mode", "mean_only", "brake_threshold",
     "constant_acceleration"});
  detail::read(j, "models", b.models, w);
  detail::read(j, "targets", b.targets, w);
  detail::read(j, "target_count", b.target_count, w);
  detail::read(j, "horizon", b.horizon, w);
  detail::read(j, "start_sample", b.start_sample, w);
  b.nontarget_mode = detail::read_enum(
    j, "nontarget_mode", b.nontarget_mode, w,
    {{"replay", NonTargetMode::replay}, {"deterministic_idm", NonTargetMode::deterministic_idm}});
  detail::read(j, "mean_only", b.mean_only, w);
  detail::read(j, "brake_threshold", b.brake_threshold, w);
  detail::read(j, "constant_acceleration", b.constant_acceleration, w);
  b.validate();
  return b;
}

inline Json to_json(const BenchmarkSettings & b)
{
  return {
    {"models", b.models},
    {"targets", b.targets},
    {"target_count", b.target_count},
    {"horizon", b.horizon},
    {"start_sample", b.start_sample},
    {"nontarget_mode", b.nontarget_mode == NonTargetMode::replay ? "replay" : "deterministic_idm"},
    {"mean_only", b.mean_only},
    {"brake_threshold", b.brake_threshold},
    {"constant_acceleration", b.constant_acceleration},
  };
}

/// Top-level run configuration shared by estimate / benchmark / rollout.
struct RunConfig
{
  std::uint64_t seed = 0;
  IdmParams preset = default_preset();
  std::string preset_name = "default";
  FilterConfig filter;
  BenchmarkSettings benchmark;
};

inline RunConfig run_config_from_json(const Json & j)
{
  detail::check_keys(j, "config", {"seed", "preset", "filter", "benchmark"});
  RunConfig rc;
  detail::read(j, "seed", rc.seed, "config");
  if (j.contains("preset")) {
    rc.preset = preset_from_json(j["preset"]);
    rc.preset_name = j["preset"].is_string() ? j["preset"].get<std::string>() : "custom";
  }
  if (j.contains("filter")) {
    rc.filter = filter_from_json(j["filter"]);
  }
  if (j.contains("benchmark")) {
    rc.benchmark = benchmark_from_json(j["benchmark"]);
  }
  rc.benchmark.base = rc.preset;
  return rc;
}

/// Loadable by run_config_from_json; built-in presets are written by name.
inline Json to_json(const RunConfig & rc)
{
  return {
    {"seed", rc.seed},
    {"preset", rc.preset_name == "custom" ? to_json(rc.preset) : Json(rc.preset_name)},
    {"filter", to_json(rc.filter)},
    {"benchmark", to_json(rc.benchmark)},
  };
}

}  // namespace idmpf::config

#endif  // IDMPF__CONFIG_HPP_
