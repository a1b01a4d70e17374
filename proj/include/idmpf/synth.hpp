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

// Synthetic single-lane platoons with known per-driver parameters.
//
// An optional lead vehicle (id 0) follows a scripted speed profile; followers 1..n run stochastic
// IDM with their own (v_des, sigma_idm) drawn on a grid. The generated trace plus the
// parameter table serve as ground truth for estimation and benchmarking.

#ifndef IDMPF__SYNTH_HPP_
#define IDMPF__SYNTH_HPP_

#include "idmpf/data.hpp"
#include "idmpf/errors.hpp"
#include "idmpf/grid.hpp"
#include "idmpf/models.hpp"
#include "idmpf/rng.hpp"
#include "idmpf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace idmpf
{

struct LeadProfile
{
  enum class Kind
  {
    constant,
    stop_and_go,
  };

  Kind kind = Kind::constant;
  double speed = 30.0;       ///< constant profile speed, m/s
  double high = 25.0;        ///< stop-and-go upper speed, m/s
  double low = 5.0;          ///< stop-and-go lower speed, m/s
  double half_period = 4.0;  ///< time spent targeting each speed, s
  double accel = 1.5;        ///< m/s^2 used to reach the target speed
  double decel = 2.5;        ///< m/s^2

  double initial_speed() const { return kind == Kind::constant ? speed : high; }

  /// Acceleration at time t for a lead currently at speed v.
  double acceleration(double t, double v, double dt) const
  {
    double target = speed;
    if (kind == Kind::stop_and_go) {
      const auto phase = static_cast<long long>(std::floor(t / half_period + 1e-9));
      target = phase % 2 == 0 ? high : low;
    }
    return std::clamp((target - v) / dt, -decel, accel);
  }
};

struct SynthSpec
{
  std::string scenario_prefix = "synth";
  std::size_t scenario_count = 1;
  std::size_t vehicle_count = 20;  ///< followers; the lead is extra
  double gap_min = 20.0;           ///< initial bumper-to-bumper gap range, m
  double gap_max = 40.0;
  double vehicle_length = 5.0;
  GridAxis v_des{15.0, 35.0, 0.5};
  GridAxis sigma{0.1, 1.0, 0.1};
  bool start_at_desired_speed = true;  ///< otherwise uniform in [speed_min, speed_max]
  double speed_min = 10.0;
  double speed_max = 20.0;
  LeadProfile lead;
  bool lead_vehicle = true;  ///< false: the first follower drives on an open road
  double horizon = 5.0;
  double dt = 0.04;
  IdmParams base = default_preset();  ///< d_min, tau, a_max, b_pref for every follower
  LaneId lane = 1;
  std::uint64_t seed = 1;

  std::size_t steps() const
  {
    const double n = horizon / dt;
    if (!(dt > 0.0) || !(horizon > 0.0) || std::abs(n - std::round(n)) > 1e-9) {
      throw ConfigError("synthetic spec: horizon must be a positive multiple of dt");
    }
    return static_cast<std::size_t>(std::llround(n));
  }

  void validate() const
  {
    (void)steps();
    if (vehicle_count == 0 || scenario_count == 0) {
      throw ConfigError("synthetic spec: need at least one scenario and one follower");
    }
    if (!(gap_min > 0.0) || gap_max < gap_min || !(vehicle_length > 0.0)) {
      throw ConfigError("synthetic spec: bad gap range or vehicle length");
    }
    v_des.validate("v_des");
    sigma.validate("sigma");
    if (!(v_des.lo > 0.0) || sigma.lo < 0.0) {
      throw ConfigError("synthetic spec: v_des must be positive and sigma non-negative");
    }
    if (!start_at_desired_speed && (speed_min < 0.0 || speed_max < speed_min)) {
      throw ConfigError("synthetic spec: bad initial speed range");
    }
  }
};

struct TruthParams
{
  std::string scenario_id;
  VehicleId vehicle_id = 0;
  double v_des = 0.0;
  double sigma_idm = 0.0;
};

struct SynthResult
{
  CanonicalTrace trace;
  std::vector<TruthParams> truth;
};

namespace detail
{
template <class Engine>
double grid_draw(const GridAxis & axis, Engine & rng)
{
  return axis.value(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(axis.cells()))));
}
}  // namespace detail

inline SynthResult generate_synthetic(const SynthSpec & spec)
{
  spec.validate();
  const std::size_t steps = spec.steps();
  SynthResult result;
  result.trace.dt = spec.dt;

  for (std::size_t sc = 0; sc < spec.scenario_count; ++sc) {
    const std::string sid =
      spec.scenario_count == 1 ? spec.scenario_prefix : spec.scenario_prefix + "_" + std::to_string(sc);
    const std::uint64_t scenario_seed = derive_seed(spec.seed, sc);
    Rng setup(scenario_seed);

    std::vector<VehicleState> state;
    std::vector<DriverModel> models;
    std::vector<Rng> streams;
    std::vector<double> gaps(spec.vehicle_count);
    for (auto & g : gaps) {
      g = spec.gap_min + (spec.gap_max - spec.gap_min) * uniform01(setup);
    }
    double lead_position = 0.0;
    for (double g : gaps) {
      lead_position += g + spec.vehicle_length;
    }

    if (spec.lead_vehicle) {
      state.push_back({0, lead_position, spec.lead.initial_speed(), spec.vehicle_length, spec.lane});
      models.push_back(DriverModel::constant_velocity());  // placeholder; the lead follows its profile
      streams.emplace_back(derive_seed(scenario_seed, 0));
    }
    const std::size_t first_follower = state.size();
    double x = lead_position;
    for (std::size_t i = 0; i < spec.vehicle_count; ++i) {
      const auto id = static_cast<VehicleId>(i + 1);
      const double v_des = detail::grid_draw(spec.v_des, setup);
      const double sigma = detail::grid_draw(spec.sigma, setup);
      double v0 = v_des;
      if (!spec.start_at_desired_speed) {
        v0 = spec.speed_min + (spec.speed_max - spec.speed_min) * uniform01(setup);
      }
      x -= spec.vehicle_length + gaps[i];
      state.push_back({id, x, v0, spec.vehicle_length, spec.lane});
      models.push_back(DriverModel::stochastic_idm({spec.base.with_v_des(v_des), sigma}));
      streams.emplace_back(derive_seed(scenario_seed, static_cast<std::uint64_t>(id)));
      result.truth.push_back({sid, id, v_des, sigma});
    }

    std::vector<double> accel(state.size());
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * spec.dt;
      for (const auto & v : state) {
        result.trace.rows.push_back({sid, static_cast<std::int64_t>(k), t, v.id, v.lane, v.position, v.velocity, v.length});
      }
      if (k == steps) {
        break;
      }
      const Scene frozen(t, state);
      if (spec.lead_vehicle) {
        accel[0] = spec.lead.acceleration(t, state[0].velocity, spec.dt);
      }
      for (std::size_t i = first_follower; i < state.size(); ++i) {
        accel[i] = models[i].act(ego_observation(frozen, state[i].id), streams[i]);
      }
      for (std::size_t i = 0; i < state.size(); ++i) {
        state[i] = propagate(state[i], accel[i], spec.dt);
      }
    }
  }
  return result;
}

inline void write_truth_csv(const std::vector<TruthParams> & truth, const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  out << "scenario_id,vehicle_id,v_des,sigma_idm\n";
  for (const auto & t : truth) {
    out << t.scenario_id << ',' << t.vehicle_id << ',' << csv::format_double(t.v_des) << ','
        << csv::format_double(t.sigma_idm) << '\n';
  }
}

}  // namespace idmpf

#endif  // IDMPF__SYNTH_HPP_
