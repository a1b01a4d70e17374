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

#ifndef IDMPF__SIM_HPP_
#define IDMPF__SIM_HPP_

#include "idmpf/errors.hpp"
#include "idmpf/models.hpp"
#include "idmpf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace idmpf
{

/// Vehicles at one instant, indexed per lane in ascending position.
class Scene
{
public:
  Scene() = default;

  Scene(double time, std::vector<VehicleState> vehicles) : time_(time), vehicles_(std::move(vehicles))
  {
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      if (!by_id_.emplace(vehicles_[i].id, i).second) {
        throw InputError("scene has duplicate vehicle id " + std::to_string(vehicles_[i].id));
      }
      lanes_[vehicles_[i].lane].push_back(i);
    }
    for (auto & [lane, members] : lanes_) {
      std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return vehicles_[a].position < vehicles_[b].position;
      });
    }
  }

  double time() const noexcept { return time_; }
  const std::vector<VehicleState> & vehicles() const noexcept { return vehicles_; }
  const std::map<LaneId, std::vector<std::size_t>> & lanes() const noexcept { return lanes_; }

  bool contains(VehicleId id) const { return by_id_.count(id) != 0; }

  const VehicleState & at(VehicleId id) const
  {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
      throw LookupError("vehicle " + std::to_string(id) + " is not in the scene");
    }
    return vehicles_[it->second];
  }

  /// Strict ordering and no overlapping bumper intervals within every lane.
  void validate() const
  {
    for (const auto & v : vehicles_) {
      idmpf::validate(v);
    }
    for (const auto & [lane, members] : lanes_) {
      for (std::size_t k = 1; k < members.size(); ++k) {
        const auto & rear = vehicles_[members[k - 1]];
        const auto & front = vehicles_[members[k]];
        if (!(front.position - front.length > rear.position)) {
          throw InputError(
            "vehicles " + std::to_string(rear.id) + " and " + std::to_string(front.id) +
            " overlap in lane " + std::to_string(lane));
        }
      }
    }
  }

private:
  double time_ = 0.0;
  std::vector<VehicleState> vehicles_;
  std::unordered_map<VehicleId, std::size_t> by_id_;
  std::map<LaneId, std::vector<std::size_t>> lanes_;
};

struct LeaderInfo
{
  std::optional<VehicleId> leader;
  double gap = 0.0;             ///< leader rear bumper - ego front bumper, m
  double relative_speed = 0.0;  ///< leader speed - ego speed, m/s
};

/// Nearest same-lane vehicle strictly ahead of `id`.
inline LeaderInfo leader_of(const Scene & scene, VehicleId id)
{
  const VehicleState & ego = scene.at(id);
  const auto & members = scene.lanes().at(ego.lane);
  const auto & vehicles = scene.vehicles();
  for (std::size_t idx : members) {
    const VehicleState & other = vehicles[idx];
    if (other.position > ego.position) {
      return {other.id, other.position - other.length - ego.position, other.velocity - ego.velocity};
    }
  }
  return {};
}

/// Gap assumed when a vehicle is already in contact with its leader: the IDM then brakes to a stop.
inline constexpr double kContactGap = 1e-3;

inline EgoObservation ego_observation(const Scene & scene, VehicleId id)
{
  const VehicleState & ego = scene.at(id);
  const LeaderInfo info = leader_of(scene, id);
  if (!info.leader) {
    return EgoObservation::free_road(ego.velocity);
  }
  return EgoObservation::following(ego.velocity, info.relative_speed, std::max(info.gap, kContactGap));
}

/// Per-vehicle series on a shared time base t0 + k * dt, starting at sample `first`.
struct VehicleSeries
{
  VehicleId id = 0;
  double length = 5.0;
  std::size_t first = 0;
  std::vector<LaneId> lane;
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> acceleration;
  bool truncated = false;

  std::size_t size() const noexcept { return position.size(); }
  std::size_t end() const noexcept { return first + position.size(); }
  bool covers(std::size_t k) const noexcept { return k >= first && k < end(); }
};

struct TrajectorySet
{
  double t0 = 0.0;
  double dt = 0.1;
  std::vector<VehicleSeries> series;

  const VehicleSeries * find(VehicleId id) const
  {
    for (const auto & s : series) {
      if (s.id == id) {
        return &s;
      }
    }
    return nullptr;
  }

  const VehicleSeries & at(VehicleId id) const
  {
    if (const auto * s = find(id)) {
      return *s;
    }
    throw LookupError("vehicle " + std::to_string(id) + " has no trajectory");
  }

  std::size_t samples() const
  {
    std::size_t n = 0;
    for (const auto & s : series) {
      n = std::max(n, s.end());
    }
    return n;
  }
};

enum class NonTargetMode
{
  replay,
  deterministic_idm,
};

struct RolloutConfig
{
  double horizon = 5.0;
  double dt = 0.1;
  std::vector<VehicleId> targets;
  std::map<VehicleId, DriverModel> models;  ///< per-target models; falls back to default_model
  std::optional<DriverModel> default_model;
  NonTargetMode nontarget_mode = NonTargetMode::replay;
  IdmParams nontarget_params = default_preset();
  std::uint64_t seed = 0;
  bool mean_only = false;
  Kinematics kinematics = Kinematics::full;

  std::size_t steps() const
  {
    if (!(dt > 0.0) || !(horizon > 0.0)) {
      throw ConfigError("rollout: horizon and dt must be positive");
    }
    const double n = horizon / dt;
    if (std::abs(n - std::round(n)) > 1e-9) {
      throw ConfigError("rollout: horizon is not an integer number of steps");
    }
    return static_cast<std::size_t>(std::llround(n));
  }

  const DriverModel & model_for(VehicleId id) const
  {
    if (auto it = models.find(id); it != models.end()) {
      return it->second;
    }
    if (default_model) {
      return *default_model;
    }
    throw ConfigError("no driver model assigned to target " + std::to_string(id));
  }
};

/// Salt separating rollout noise streams from filter streams under the same root seed.
inline constexpr std::uint64_t kRolloutSalt = 0x524f4c4cULL;

/// Forward-simulates scene0. Accelerations come from the frozen scene at t; all vehicles then
/// move together. Replayed vehicles snap to `data` sample k, where sample 0 aligns with scene0.
inline TrajectorySet rollout(const Scene & scene0, const TrajectorySet * data, const RolloutConfig & cfg)
{
  const std::size_t steps = cfg.steps();
  scene0.validate();
  const std::set<VehicleId> targets(cfg.targets.begin(), cfg.targets.end());
  for (VehicleId id : targets) {
    if (!scene0.contains(id)) {
      throw LookupError("target " + std::to_string(id) + " is not in the starting scene");
    }
    (void)cfg.model_for(id);
  }

  const bool replay = cfg.nontarget_mode == NonTargetMode::replay;
  std::vector<const VehicleSeries *> recorded(scene0.vehicles().size(), nullptr);
  if (replay) {
    const bool has_nontargets = targets.size() < scene0.vehicles().size();
    if (has_nontargets) {
      if (data == nullptr) {
        throw InputError("replay mode needs recorded trajectories");
      }
      if (std::abs(data->dt - cfg.dt) > 1e-9) {
        throw InputError("replay data dt does not match the rollout dt");
      }
      if (data->samples() < steps + 1) {
        throw InputError(
          "replay data covers " + std::to_string(data->samples()) + " samples, horizon needs " +
          std::to_string(steps + 1));
      }
      for (std::size_t i = 0; i < scene0.vehicles().size(); ++i) {
        const VehicleId id = scene0.vehicles()[i].id;
        if (targets.count(id) == 0) {
          recorded[i] = &data->at(id);
          if (!recorded[i]->covers(0)) {
            throw InputError("replay data for vehicle " + std::to_string(id) + " starts after scene0");
          }
        }
      }
    }
  }

  std::vector<DriverModel> models;
  std::vector<Rng> streams;
  std::vector<bool> is_target(scene0.vehicles().size(), false);
  const DriverModel nontarget_model = DriverModel::deterministic_idm(cfg.nontarget_params);
  for (std::size_t i = 0; i < scene0.vehicles().size(); ++i) {
    const VehicleId id = scene0.vehicles()[i].id;
    is_target[i] = targets.count(id) != 0;
    if (is_target[i]) {
      models.push_back(cfg.mean_only ? cfg.model_for(id).mean_only() : cfg.model_for(id));
    } else {
      models.push_back(nontarget_model);
    }
    streams.emplace_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(id), kRolloutSalt));
  }

  TrajectorySet out;
  out.t0 = scene0.time();
  out.dt = cfg.dt;
  for (const auto & v : scene0.vehicles()) {
    VehicleSeries s;
    s.id = v.id;
    s.length = v.length;
    s.lane.reserve(steps + 1);
    s.position.reserve(steps + 1);
    s.velocity.reserve(steps + 1);
    s.acceleration.reserve(steps + 1);
    out.series.push_back(std::move(s));
  }

  std::vector<VehicleState> state = scene0.vehicles();
  std::vector<bool> active(state.size(), true);
  std::vector<double> accel(state.size(), 0.0);

  for (std::size_t k = 0; k <= steps; ++k) {
    std::vector<VehicleState> present;
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (active[i]) {
        present.push_back(state[i]);
      }
    }
    const Scene frozen(out.t0 + static_cast<double>(k) * cfg.dt, present);

    for (std::size_t i = 0; i < state.size(); ++i) {
      if (!active[i]) {
        continue;
      }
      if (recorded[i] != nullptr) {
        accel[i] = recorded[i]->acceleration[k - recorded[i]->first];
      } else {
        accel[i] = models[i].act(ego_observation(frozen, state[i].id), streams[i]);
      }
      auto & s = out.series[i];
      s.lane.push_back(state[i].lane);
      s.position.push_back(state[i].position);
      s.velocity.push_back(state[i].velocity);
      s.acceleration.push_back(accel[i]);
    }
    if (k == steps) {
      break;
    }

    for (std::size_t i = 0; i < state.size(); ++i) {
      if (!active[i]) {
        continue;
      }
      if (recorded[i] != nullptr) {
        const VehicleSeries & rec = *recorded[i];
        if (!rec.covers(k + 1)) {
          active[i] = false;
          out.series[i].truncated = true;
          continue;
        }
        const std::size_t j = k + 1 - rec.first;
        state[i].position = rec.position[j];
        state[i].velocity = rec.velocity[j];
        state[i].lane = rec.lane[j];
      } else {
        state[i] = propagate(state[i], accel[i], cfg.dt, cfg.kinematics);
      }
    }
  }
  return out;
}

}  // namespace idmpf

#endif  // IDMPF__SIM_HPP_
