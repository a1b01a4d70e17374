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

// Canonical trajectory CSV and its conversion into scenes and trajectory sets.
//
//   scenario_id,frame,time,vehicle_id,lane,position,velocity,length
//
// Units are meters, seconds and m/s. `velocity` may be empty, in which case it is
// derived by central differences (one-sided at the ends of each vehicle's window).
// The sampling interval lives in a sidecar JSON file next to the CSV
// (`trace.csv` -> `trace.meta.json`, {"dt": 0.04}).

#ifndef IDMPF__DATA_HPP_
#define IDMPF__DATA_HPP_

#include "idmpf/csv.hpp"
#include "idmpf/errors.hpp"
#include "idmpf/models.hpp"
#include "idmpf/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace idmpf
{

inline constexpr const char * kCanonicalHeader =
  "scenario_id,frame,time,vehicle_id,lane,position,velocity,length";

struct CanonicalRow
{
  std::string scenario_id;
  std::int64_t frame = 0;
  double time = 0.0;
  VehicleId vehicle_id = 0;
  LaneId lane = 0;
  double position = 0.0;
  std::optional<double> velocity;
  double length = 5.0;

  friend bool operator==(const CanonicalRow &, const CanonicalRow &) = default;
};

struct CanonicalTrace
{
  double dt = 0.1;
  std::vector<CanonicalRow> rows;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path & csv_path)
{
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

inline void write_canonical(const CanonicalTrace & trace, const std::filesystem::path & csv_path)
{
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + csv_path.string());
  }
  out << kCanonicalHeader << '\n';
  for (const auto & r : trace.rows) {
    out << r.scenario_id << ',' << r.frame << ',' << csv::format_double(r.time) << ',' << r.vehicle_id
        << ',' << r.lane << ',' << csv::format_double(r.position) << ','
        << (r.velocity ? csv::format_double(*r.velocity) : std::string()) << ','
        << csv::format_double(r.length) << '\n';
  }
  std::ofstream meta(sidecar_path(csv_path), std::ios::binary);
  const nlohmann::ordered_json j = {{"format", "canonical-trace"}, {"version", 1}, {"dt", trace.dt}};
  meta << j.dump(2) << '\n';
}

/// Checks per-vehicle contiguity, a uniform time base and non-decreasing positions.
inline void validate_trace(const CanonicalTrace & trace)
{
  if (!(trace.dt > 0.0) || !std::isfinite(trace.dt)) {
    throw InputError("trace dt must be positive");
  }
  std::map<std::pair<std::string, VehicleId>, std::vector<const CanonicalRow *>> groups;
  std::map<std::string, double> epoch;  // time - frame * dt per scenario
  for (const auto & r : trace.rows) {
    groups[{r.scenario_id, r.vehicle_id}].push_back(&r);
    const double e = r.time - static_cast<double>(r.frame) * trace.dt;
    auto [it, fresh] = epoch.emplace(r.scenario_id, e);
    if (!fresh && std::abs(it->second - e) > 1e-6 * std::max(1.0, std::abs(r.time))) {
      throw InputError(
        "non-uniform dt: scenario " + r.scenario_id + " frame " + std::to_string(r.frame) +
        " has time " + std::to_string(r.time));
    }
  }
  for (auto & [key, rows] : groups) {
    std::sort(rows.begin(), rows.end(), [](auto * a, auto * b) { return a->frame < b->frame; });
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (rows[k]->frame == rows[k - 1]->frame) {
        throw InputError(
          "vehicle " + std::to_string(key.second) + " has duplicate frame " + std::to_string(rows[k]->frame));
      }
      if (rows[k]->frame != rows[k - 1]->frame + 1) {
        throw InputError(
          "vehicle " + std::to_string(key.second) + " in scenario " + key.first + " is missing frame " +
          std::to_string(rows[k - 1]->frame + 1));
      }
      if (rows[k]->position < rows[k - 1]->position) {
        throw InputError(
          "vehicle " + std::to_string(key.second) + " moves backwards at frame " + std::to_string(rows[k]->frame));
      }
    }
  }
}

inline CanonicalTrace read_canonical(const std::filesystem::path & csv_path)
{
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + csv_path.string());
  }
  CanonicalTrace trace;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError(1, "missing header");
  }
  ++line_no;
  if (csv::trim(line) != kCanonicalHeader) {
    throw ParseError(1, "expected header '" + std::string(kCanonicalHeader) + "'");
  }
  static constexpr const char * names[] = {"scenario_id", "frame",    "time",     "vehicle_id",
                                           "lane",        "position", "velocity", "length"};
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) {
      continue;
    }
    const auto f = csv::split(line, ',');
    if (f.size() != 8) {
      throw ParseError(line_no, "expected 8 fields, got " + std::to_string(f.size()));
    }
    CanonicalRow r;
    if (f[0].empty()) {
      throw ParseError(line_no, "empty scenario_id");
    }
    r.scenario_id = std::string(f[0]);
    r.frame = csv::parse_int(f[1], line_no, names[1]);
    r.time = csv::parse_double(f[2], line_no, names[2]);
    r.vehicle_id = csv::parse_int(f[3], line_no, names[3]);
    r.lane = static_cast<LaneId>(csv::parse_int(f[4], line_no, names[4]));
    r.position = csv::parse_double(f[5], line_no, names[5]);
    if (!f[6].empty()) {
      r.velocity = csv::parse_double(f[6], line_no, names[6]);
    }
    r.length = csv::parse_double(f[7], line_no, names[7]);
    if (!std::isfinite(r.position) || !std::isfinite(r.time) || !(r.length > 0.0)) {
      throw ParseError(line_no, "position/time must be finite and length positive");
    }
    if (r.velocity && (!std::isfinite(*r.velocity) || *r.velocity < 0.0)) {
      throw ParseError(line_no, "velocity must be finite and non-negative");
    }
    trace.rows.push_back(std::move(r));
  }

  const auto meta_path = sidecar_path(csv_path);
  if (std::filesystem::exists(meta_path)) {
    std::ifstream meta(meta_path);
    try {
      trace.dt = nlohmann::json::parse(meta).at("dt").get<double>();
    } catch (const nlohmann::json::exception & e) {
      throw InputError(meta_path.string() + ": " + e.what());
    }
  } else {
    // No sidecar: infer from the first pair of consecutive frames.
    std::map<std::pair<std::string, VehicleId>, const CanonicalRow *> last;
    bool found = false;
    for (const auto & r : trace.rows) {
      auto [it, fresh] = last.emplace(std::pair{r.scenario_id, r.vehicle_id}, &r);
      if (!fresh && r.frame != it->second->frame) {
        trace.dt = (r.time - it->second->time) / static_cast<double>(r.frame - it->second->frame);
        found = true;
        break;
      }
    }
    if (!found && !trace.rows.empty()) {
      throw InputError("no sidecar " + meta_path.string() + " and dt cannot be inferred");
    }
  }
  return trace;
}

/// Central differences inside, one-sided differences at both ends.
inline std::vector<double> difference(const std::vector<double> & x, double dt)
{
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) {
    return d;
  }
  d[0] = (x[1] - x[0]) / dt;
  d[n - 1] = (x[n - 1] - x[n - 2]) / dt;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    d[k] = (x[k + 1] - x[k - 1]) / (2.0 * dt);
  }
  return d;
}

/// One scenario of a canonical trace: a scene per frame plus per-vehicle series.
struct Scenario
{
  std::string id;
  double dt = 0.1;
  std::int64_t first_frame = 0;
  std::vector<Scene> scenes;  ///< scenes[k] is frame first_frame + k
  TrajectorySet truth;        ///< sample k is frame first_frame + k
};

inline std::vector<Scenario> build_scenarios(const CanonicalTrace & trace)
{
  validate_trace(trace);
  std::vector<std::string> order;
  std::map<std::string, std::map<VehicleId, std::vector<const CanonicalRow *>>> grouped;
  for (const auto & r : trace.rows) {
    if (grouped.find(r.scenario_id) == grouped.end()) {
      order.push_back(r.scenario_id);
    }
    grouped[r.scenario_id][r.vehicle_id].push_back(&r);
  }

  std::vector<Scenario> out;
  for (const auto & sid : order) {
    auto & vehicles = grouped[sid];
    Scenario sc;
    sc.id = sid;
    sc.dt = trace.dt;
    std::int64_t f0 = std::numeric_limits<std::int64_t>::max();
    std::int64_t f1 = std::numeric_limits<std::int64_t>::min();
    double t_first = 0.0;
    for (auto & [vid, rows] : vehicles) {
      std::sort(rows.begin(), rows.end(), [](auto * a, auto * b) { return a->frame < b->frame; });
      if (rows.front()->frame < f0) {
        f0 = rows.front()->frame;
        t_first = rows.front()->time;
      }
      f1 = std::max(f1, rows.back()->frame);
    }
    sc.first_frame = f0;
    sc.truth.dt = trace.dt;
    sc.truth.t0 = t_first;

    const auto frames = static_cast<std::size_t>(f1 - f0 + 1);
    std::vector<std::vector<VehicleState>> per_frame(frames);
    for (auto & [vid, rows] : vehicles) {
      VehicleSeries s;
      s.id = vid;
      s.length = rows.front()->length;
      s.first = static_cast<std::size_t>(rows.front()->frame - f0);
      for (const auto * r : rows) {
        s.position.push_back(r->position);
        s.lane.push_back(r->lane);
      }
      const auto derived = difference(s.position, trace.dt);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        s.velocity.push_back(rows[k]->velocity ? *rows[k]->velocity : std::max(0.0, derived[k]));
      }
      s.acceleration = difference(s.velocity, trace.dt);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        per_frame[s.first + k].push_back(
          {vid, s.position[k], s.velocity[k], rows[k]->length, rows[k]->lane});
      }
      sc.truth.series.push_back(std::move(s));
    }
    for (std::size_t k = 0; k < frames; ++k) {
      sc.scenes.emplace_back(sc.truth.t0 + static_cast<double>(k) * trace.dt, std::move(per_frame[k]));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

inline std::vector<Scenario> load_canonical(const std::filesystem::path & csv_path)
{
  return build_scenarios(read_canonical(csv_path));
}

/// Truth restricted to samples [from, from + count), re-based so `from` becomes sample 0.
inline TrajectorySet slice(const TrajectorySet & set, std::size_t from, std::size_t count)
{
  TrajectorySet out;
  out.dt = set.dt;
  out.t0 = set.t0 + static_cast<double>(from) * set.dt;
  for (const auto & s : set.series) {
    const std::size_t lo = std::max(from, s.first);
    const std::size_t hi = std::min(from + count, s.end());
    if (lo >= hi) {
      continue;
    }
    VehicleSeries c;
    c.id = s.id;
    c.length = s.length;
    c.first = lo - from;
    const auto b = static_cast<std::ptrdiff_t>(lo - s.first);
    const auto e = static_cast<std::ptrdiff_t>(hi - s.first);
    c.lane.assign(s.lane.begin() + b, s.lane.begin() + e);
    c.position.assign(s.position.begin() + b, s.position.begin() + e);
    c.velocity.assign(s.velocity.begin() + b, s.velocity.begin() + e);
    c.acceleration.assign(s.acceleration.begin() + b, s.acceleration.begin() + e);
    c.truncated = s.truncated || hi < std::min(from + count, s.end());
    out.series.push_back(std::move(c));
  }
  return out;
}

/// Trajectory set -> canonical rows (velocity column always written).
inline CanonicalTrace to_canonical(const TrajectorySet & set, const std::string & scenario_id, std::int64_t first_frame = 0)
{
  CanonicalTrace trace;
  trace.dt = set.dt;
  const std::size_t samples = set.samples();
  for (std::size_t k = 0; k < samples; ++k) {
    for (const auto & s : set.series) {
      if (!s.covers(k)) {
        continue;
      }
      const std::size_t j = k - s.first;
      CanonicalRow r;
      r.scenario_id = scenario_id;
      r.frame = first_frame + static_cast<std::int64_t>(k);
      r.time = set.t0 + static_cast<double>(k) * set.dt;
      r.vehicle_id = s.id;
      r.lane = s.lane[j];
      r.position = s.position[j];
      r.velocity = s.velocity[j];
      r.length = s.length;
      trace.rows.push_back(std::move(r));
    }
  }
  return trace;
}

}  // namespace idmpf

#endif  // IDMPF__DATA_HPP_
