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

#ifndef IDMPF__METRICS_HPP_
#define IDMPF__METRICS_HPP_

#include "idmpf/errors.hpp"
#include "idmpf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace idmpf
{

struct RmseSeries
{
  std::vector<double> position;  ///< m
  std::vector<double> velocity;  ///< m/s
};

/// Per-timestep RMSE over the targets. pred and truth must share t0 and dt; truth is read
/// from its own sample offset so a longer recording can be scored against a rollout.
inline RmseSeries rmse_series(
  const TrajectorySet & pred, const TrajectorySet & truth, std::span<const VehicleId> targets)
{
  if (std::abs(pred.dt - truth.dt) > 1e-9) {
    throw InputError("rmse_series: prediction and truth have different dt");
  }
  const double shift = (pred.t0 - truth.t0) / truth.dt;
  if (std::abs(shift - std::round(shift)) > 1e-6 || shift < -1e-6) {
    throw InputError("rmse_series: prediction does not start on the truth time base");
  }
  if (targets.empty()) {
    throw InputError("rmse_series: no targets");
  }
  const auto offset = static_cast<std::size_t>(std::llround(shift));

  std::size_t length = std::numeric_limits<std::size_t>::max();
  for (VehicleId id : targets) {
    const auto & p = pred.at(id);
    if (p.first != 0) {
      throw InputError("rmse_series: predicted series must start at sample 0");
    }
    length = std::min(length, p.size());
  }
  for (VehicleId id : targets) {
    const auto & t = truth.at(id);
    if (!t.covers(offset) || t.end() < offset + length) {
      throw InputError("rmse_series: truth for vehicle " + std::to_string(id) + " does not cover the prediction");
    }
  }

  RmseSeries out;
  out.position.resize(length);
  out.velocity.resize(length);
  const auto n = static_cast<double>(targets.size());
  for (std::size_t k = 0; k < length; ++k) {
    double sp = 0.0;
    double sv = 0.0;
    for (VehicleId id : targets) {
      const auto & p = pred.at(id);
      const auto & t = truth.at(id);
      const std::size_t j = offset + k - t.first;
      const double ep = p.position[k] - t.position[j];
      const double ev = p.velocity[k] - t.velocity[j];
      sp += ep * ep;
      sv += ev * ev;
    }
    out.position[k] = std::sqrt(sp / n);
    out.velocity[k] = std::sqrt(sv / n);
  }
  return out;
}

struct EventCounts
{
  std::size_t collisions = 0;
  std::size_t hard_brakes = 0;
  std::vector<std::size_t> cumulative_collisions;   ///< per sample
  std::vector<std::size_t> cumulative_hard_brakes;  ///< per sample
};

inline constexpr double kDefaultBrakeThreshold = 3.0;

/// Collisions: first sample at which two same-lane vehicles overlap, once per vehicle pair.
/// Hard brakes: one per vehicle per sample with acceleration < -brake_threshold.
/// With `targets`, only pairs involving a target and brakes of targets are counted.
inline EventCounts count_events(
  const TrajectorySet & traj, double brake_threshold = kDefaultBrakeThreshold,
  std::optional<std::span<const VehicleId>> targets = std::nullopt)
{
  std::set<VehicleId> target_set;
  if (targets) {
    target_set.insert(targets->begin(), targets->end());
  }
  auto counted = [&](VehicleId id) { return !targets || target_set.count(id) != 0; };

  const std::size_t samples = traj.samples();
  EventCounts out;
  out.cumulative_collisions.resize(samples, 0);
  out.cumulative_hard_brakes.resize(samples, 0);
  std::set<std::pair<VehicleId, VehicleId>> collided;

  for (std::size_t k = 0; k < samples; ++k) {
    for (const auto & s : traj.series) {
      if (s.covers(k) && counted(s.id) && s.acceleration[k - s.first] < -brake_threshold) {
        ++out.hard_brakes;
      }
    }
    for (std::size_t a = 0; a < traj.series.size(); ++a) {
      const auto & sa = traj.series[a];
      if (!sa.covers(k)) {
        continue;
      }
      for (std::size_t b = a + 1; b < traj.series.size(); ++b) {
        const auto & sb = traj.series[b];
        if (!sb.covers(k) || (!counted(sa.id) && !counted(sb.id))) {
          continue;
        }
        if (sa.lane[k - sa.first] != sb.lane[k - sb.first]) {
          continue;
        }
        const double xa = sa.position[k - sa.first];
        const double xb = sb.position[k - sb.first];
        // Rear vehicle's front bumper at or past the front vehicle's rear bumper.
        const bool contact = xa <= xb ? xb - sb.length - xa <= 0.0 : xa - sa.length - xb <= 0.0;
        if (contact) {
          const auto key = std::minmax(sa.id, sb.id);
          if (collided.insert({key.first, key.second}).second) {
            ++out.collisions;
          }
        }
      }
    }
    out.cumulative_collisions[k] = out.collisions;
    out.cumulative_hard_brakes[k] = out.hard_brakes;
  }
  return out;
}

struct MeanStd
{
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population standard deviation.
inline MeanStd mean_std(std::span<const double> values)
{
  if (values.empty()) {
    throw InputError("aggregate: need at least one scenario");
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) {
    sq += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

struct ScenarioScore
{
  std::string scenario_id;
  double position_rmse = 0.0;  ///< at the end of the horizon
  double velocity_rmse = 0.0;
  double collisions = 0.0;
  double hard_brakes = 0.0;
};

struct EvalReport
{
  std::vector<ScenarioScore> scenarios;
  MeanStd position_rmse;
  MeanStd velocity_rmse;
  MeanStd collisions;
  MeanStd hard_brakes;
};

inline EvalReport aggregate(std::vector<ScenarioScore> scores)
{
  if (scores.empty()) {
    throw InputError("aggregate: need at least one scenario");
  }
  auto column = [&](auto member) {
    std::vector<double> v;
    v.reserve(scores.size());
    for (const auto & s : scores) {
      v.push_back(s.*member);
    }
    return mean_std(v);
  };
  EvalReport r;
  r.position_rmse = column(&ScenarioScore::position_rmse);
  r.velocity_rmse = column(&ScenarioScore::velocity_rmse);
  r.collisions = column(&ScenarioScore::collisions);
  r.hard_brakes = column(&ScenarioScore::hard_brakes);
  r.scenarios = std::move(scores);
  return r;
}

}  // namespace idmpf

#endif  // IDMPF__METRICS_HPP_
