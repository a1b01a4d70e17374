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

// Converters from NGSIM-style and HighD-style exports to the canonical trace.
//
// A column map (JSON, see config/) names the source columns and declares unit scales,
// the sampling interval and how the raw coordinate maps to a front-bumper position
// along the direction of travel. Vehicles with gaps in their frame sequence are trimmed
// to their longest contiguous window; every trim is reported as a warning.

#ifndef IDMPF__ADAPTERS_HPP_
#define IDMPF__ADAPTERS_HPP_

#include "idmpf/csv.hpp"
#include "idmpf/data.hpp"
#include "idmpf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace idmpf
{

inline constexpr double kFeetToMeters = 0.3048;

struct ColumnMap
{
  enum class Direction
  {
    positive,       ///< travel along +x
    negative,       ///< travel along -x
    from_velocity,  ///< sign of the velocity column decides per row
  };
  enum class Anchor
  {
    front,     ///< raw coordinate is the front bumper
    rear,      ///< raw coordinate is the rear bumper
    bbox_min,  ///< raw coordinate is the bounding-box minimum along x (HighD)
  };

  std::string vehicle_id;
  std::string frame;
  std::string lane;
  std::string position;
  std::string length;
  std::optional<std::string> velocity;
  std::optional<std::string> scenario;  ///< column holding a scenario/recording key

  std::string delimiter = ",";  ///< "," or "whitespace"
  bool has_header = true;
  std::vector<std::string> columns;  ///< column names when the file has no header

  double position_scale = 1.0;
  double length_scale = 1.0;
  double velocity_scale = 1.0;
  double dt = 0.0;  ///< 0: take from recording metadata or the format default
  std::string scenario_id = "scenario";
  Direction direction = Direction::positive;
  Anchor anchor = Anchor::front;
};

struct AdaptResult
{
  CanonicalTrace trace;
  std::vector<std::string> warnings;
};

namespace detail
{

struct Table
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

inline Table read_table(const std::filesystem::path & path, const ColumnMap & map)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string());
  }
  Table t;
  std::string line;
  std::size_t line_no = 0;
  const bool ws = map.delimiter == "whitespace";
  if (!ws && map.delimiter.size() != 1) {
    throw ConfigError("delimiter must be a single character or \"whitespace\"");
  }
  auto split = [&](const std::string & l) {
    std::vector<std::string> out;
    for (auto f : ws ? csv::split_whitespace(l) : csv::split(l, map.delimiter[0])) {
      out.emplace_back(f);
    }
    return out;
  };
  if (map.has_header) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!csv::trim(line).empty()) {
        t.header = split(line);
        break;
      }
    }
  } else {
    t.header = map.columns;
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) {
      continue;
    }
    t.rows.push_back(split(line));
    t.line_numbers.push_back(line_no);
  }
  return t;
}

inline std::size_t column_index(const Table & t, const std::string & name, const char * role)
{
  if (name.empty()) {
    throw ConfigError(std::string("column map does not name the '") + role + "' column");
  }
  auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) {
    throw ConfigError(std::string("column '") + name + "' (" + role + ") not found in the input");
  }
  return static_cast<std::size_t>(it - t.header.begin());
}

struct RawRow
{
  std::int64_t frame;
  LaneId lane;
  double position;
  std::optional<double> velocity;
  double length;
};

inline AdaptResult adapt_table(const Table & table, const ColumnMap & map, double dt, std::vector<std::string> warnings)
{
  AdaptResult result;
  result.warnings = std::move(warnings);
  result.trace.dt = dt;
  if (table.rows.empty()) {
    result.warnings.push_back("input has no data rows; trace is empty");
    return result;
  }
  const std::size_t c_id = column_index(table, map.vehicle_id, "vehicle_id");
  const std::size_t c_frame = column_index(table, map.frame, "frame");
  const std::size_t c_lane = column_index(table, map.lane, "lane");
  const std::size_t c_pos = column_index(table, map.position, "position");
  const std::size_t c_len = column_index(table, map.length, "length");
  std::optional<std::size_t> c_vel;
  if (map.velocity) {
    c_vel = column_index(table, *map.velocity, "velocity");
  }
  if (map.direction == ColumnMap::Direction::from_velocity && !c_vel) {
    throw ConfigError("direction 'from_velocity' needs a velocity column");
  }
  std::optional<std::size_t> c_scn;
  if (map.scenario) {
    c_scn = column_index(table, *map.scenario, "scenario");
  }

  std::map<std::pair<std::string, VehicleId>, std::vector<RawRow>> groups;
  std::vector<std::pair<std::string, VehicleId>> order;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto & f = table.rows[i];
    const std::size_t ln = table.line_numbers[i];
    if (f.size() != table.header.size()) {
      throw ParseError(ln, "expected " + std::to_string(table.header.size()) + " fields, got " + std::to_string(f.size()));
    }
    const VehicleId vid = csv::parse_int(f[c_id], ln, map.vehicle_id);
    const std::string sid = c_scn ? map.scenario_id + "_" + f[*c_scn] : map.scenario_id;
    RawRow r{};
    r.frame = csv::parse_int(f[c_frame], ln, map.frame);
    r.lane = static_cast<LaneId>(csv::parse_int(f[c_lane], ln, map.lane));
    r.length = csv::parse_double(f[c_len], ln, map.length) * map.length_scale;
    const double raw_x = csv::parse_double(f[c_pos], ln, map.position) * map.position_scale;
    double sign = map.direction == ColumnMap::Direction::negative ? -1.0 : 1.0;
    if (c_vel) {
      const double raw_v = csv::parse_double(f[*c_vel], ln, *map.velocity) * map.velocity_scale;
      if (map.direction == ColumnMap::Direction::from_velocity) {
        sign = raw_v < 0.0 ? -1.0 : 1.0;
      }
      r.velocity = std::max(0.0, sign * raw_v);
    }
    double s = sign * raw_x;
    if (map.anchor == ColumnMap::Anchor::rear) {
      s += r.length;
    } else if (map.anchor == ColumnMap::Anchor::bbox_min && sign > 0.0) {
      s += r.length;
    }
    r.position = s;
    if (!std::isfinite(r.position) || !(r.length > 0.0)) {
      throw ParseError(ln, "position must be finite and length positive");
    }
    auto key = std::pair{sid, vid};
    if (groups.find(key) == groups.end()) {
      order.push_back(key);
    }
    groups[key].push_back(r);
  }

  for (const auto & key : order) {
    auto & rows = groups[key];
    std::sort(rows.begin(), rows.end(), [](const RawRow & a, const RawRow & b) { return a.frame < b.frame; });
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (rows[k].frame == rows[k - 1].frame) {
        throw InputError("vehicle " + std::to_string(key.second) + " has duplicate frame " + std::to_string(rows[k].frame));
      }
    }
    // Longest contiguous window.
    std::size_t best_lo = 0, best_hi = 1, lo = 0;
    for (std::size_t k = 1; k <= rows.size(); ++k) {
      if (k == rows.size() || rows[k].frame != rows[k - 1].frame + 1) {
        if (k - lo > best_hi - best_lo) {
          best_lo = lo;
          best_hi = k;
        }
        lo = k;
      }
    }
    if (best_hi - best_lo != rows.size()) {
      result.warnings.push_back(
        "vehicle " + std::to_string(key.second) + ": kept frames " + std::to_string(rows[best_lo].frame) + ".." +
        std::to_string(rows[best_hi - 1].frame) + ", dropped " + std::to_string(rows.size() - (best_hi - best_lo)) +
        " frames outside the longest contiguous window");
    }
    for (std::size_t k = best_lo; k < best_hi; ++k) {
      const auto & r = rows[k];
      CanonicalRow c;
      c.scenario_id = key.first;
      c.frame = r.frame;
      c.time = static_cast<double>(r.frame) * dt;
      c.vehicle_id = key.second;
      c.lane = r.lane;
      c.position = r.position;
      c.velocity = r.velocity;
      c.length = r.length;
      result.trace.rows.push_back(std::move(c));
    }
  }
  validate_trace(result.trace);
  return result;
}

}  // namespace detail

/// NGSIM-style export (10 Hz unless the map says otherwise).
inline AdaptResult adapt_ngsim(const std::filesystem::path & path, const ColumnMap & map)
{
  const double dt = map.dt > 0.0 ? map.dt : 0.1;
  return detail::adapt_table(detail::read_table(path, map), map, dt, {});
}

/// HighD-style tracks file; the optional recording metadata supplies `frameRate`.
inline AdaptResult adapt_highd(
  const std::filesystem::path & tracks, const std::optional<std::filesystem::path> & recording_meta,
  const ColumnMap & map)
{
  std::vector<std::string> warnings;
  double dt = map.dt > 0.0 ? map.dt : 0.04;
  if (recording_meta) {
    ColumnMap meta_map;
    meta_map.delimiter = ",";
    const auto meta = detail::read_table(*recording_meta, meta_map);
    const std::size_t c_rate = detail::column_index(meta, "frameRate", "frameRate");
    if (meta.rows.empty()) {
      throw InputError(recording_meta->string() + ": no metadata row");
    }
    const double rate = csv::parse_double(meta.rows.front()[c_rate], meta.line_numbers.front(), "frameRate");
    if (!(rate > 0.0)) {
      throw InputError("frameRate must be positive");
    }
    dt = 1.0 / rate;
  }
  return detail::adapt_table(detail::read_table(tracks, map), map, dt, std::move(warnings));
}

}  // namespace idmpf

#endif  // IDMPF__ADAPTERS_HPP_
