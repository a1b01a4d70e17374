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

// Per-vehicle estimation over a recorded scenario and the model benchmark built on top of it.

#ifndef IDMPF__PIPELINE_HPP_
#define IDMPF__PIPELINE_HPP_

#include "idmpf/data.hpp"
#include "idmpf/errors.hpp"
#include "idmpf/filter.hpp"
#include "idmpf/metrics.hpp"
#include "idmpf/models.hpp"
#include "idmpf/parallel.hpp"
#include "idmpf/rng.hpp"
#include "idmpf/sim.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace idmpf
{

/// Transitions of vehicle `id` between samples [from, from + count). A transition is skipped
/// when the recorded scene shows the vehicle overlapping its leader (no valid gap).
inline std::vector<FilterObservation> build_observations(
  const Scenario & scenario, VehicleId id, std::size_t from = 0,
  std::size_t count = static_cast<std::size_t>(-1))
{
  const VehicleSeries & s = scenario.truth.at(id);
  const std::size_t lo = std::max(from, s.first);
  const std::size_t hi = count > s.end() ? s.end() : std::min(s.end(), from + count);
  std::vector<FilterObservation> out;
  for (std::size_t k = lo; k + 1 < hi; ++k) {
    const std::size_t j = k - s.first;
    const LeaderInfo info = leader_of(scenario.scenes[k], id);
    if (info.leader && !(info.gap > 0.0)) {
      continue;
    }
    const double v = s.velocity[j];
    const EgoObservation ego = info.leader ? EgoObservation::following(v, info.relative_speed, info.gap)
                                           : EgoObservation::free_road(v);
    out.push_back(FilterObservation{ego, s.position[j], v, s.position[j + 1], scenario.dt});
  }
  return out;
}

enum class EstimateStatus
{
  ok,
  skipped,     ///< no usable transitions
  degenerate,  ///< every particle had zero likelihood at some step
};

inline const char * to_string(EstimateStatus s)
{
  switch (s) {
    case EstimateStatus::ok:
      return "ok";
    case EstimateStatus::skipped:
      return "skipped";
    case EstimateStatus::degenerate:
      return "degenerate";
  }
  return "?";
}

struct VehicleEstimate
{
  std::string scenario_id;
  VehicleId vehicle_id = 0;
  EstimateStatus status = EstimateStatus::ok;
  std::string message;
  std::uint64_t seed = 0;
  std::size_t transitions = 0;
  std::optional<FilterResult> result;
};

inline std::uint64_t vehicle_seed(std::uint64_t root, const std::string & scenario_id, VehicleId id)
{
  return derive_seed(derive_seed(root, hash_key(scenario_id)), static_cast<std::uint64_t>(id));
}

inline VehicleEstimate estimate_vehicle(
  const Scenario & scenario, VehicleId id, const FilterConfig & cfg, const IdmParams & base,
  std::uint64_t root_seed, std::size_t from = 0, std::size_t count = static_cast<std::size_t>(-1))
{
  VehicleEstimate e;
  e.scenario_id = scenario.id;
  e.vehicle_id = id;
  e.seed = vehicle_seed(root_seed, scenario.id, id);
  const auto obs = build_observations(scenario, id, from, count);
  e.transitions = obs.size();
  if (obs.empty()) {
    e.status = EstimateStatus::skipped;
    e.message = "no usable transitions (needs at least 2 frames with a valid gap)";
    return e;
  }
  try {
    e.result = run_filter(obs, cfg, base, e.seed);
  } catch (const FilterDegeneracy & ex) {
    e.status = EstimateStatus::degenerate;
    e.message = ex.what();
  }
  return e;
}

/// One filter per vehicle (all vehicles when `ids` is empty), in parallel. Output order follows
/// the vehicle order of the scenario and does not depend on the thread count.
inline std::vector<VehicleEstimate> estimate_scenario(
  const Scenario & scenario, const FilterConfig & cfg, const IdmParams & base, std::uint64_t root_seed,
  std::size_t threads, const std::vector<VehicleId> & ids = {}, std::size_t from = 0,
  std::size_t count = static_cast<std::size_t>(-1))
{
  cfg.validate();
  std::vector<VehicleId> order;
  if (ids.empty()) {
    for (const auto & s : scenario.truth.series) {
      order.push_back(s.id);
    }
  } else {
    order = ids;
  }
  std::vector<VehicleEstimate> out(order.size());
  parallel_for(order.size(), threads, [&](std::size_t i) {
    out[i] = estimate_vehicle(scenario, order[i], cfg, base, root_seed, from, count);
  });
  return out;
}

inline const std::vector<std::string> & benchmark_model_names()
{
  static const std::vector<std::string> names{"estimated", "default", "nonlinear_fit", "const_vel", "const_acc"};
  return names;
}

struct BenchmarkSettings
{
  std::vector<std::string> models = benchmark_model_names();
  std::vector<VehicleId> targets;  ///< explicit ids; empty selects target_count at random
  std::size_t target_count = 20;
  double horizon = 5.0;
  std::size_t start_sample = 0;  ///< scenario sample that becomes scene0
  NonTargetMode nontarget_mode = NonTargetMode::replay;
  bool mean_only = false;
  double brake_threshold = kDefaultBrakeThreshold;
  double constant_acceleration = kConstantAcceleration;
  IdmParams base = default_preset();  ///< filtering preset and non-target IDM parameters

  void validate() const
  {
    for (const auto & m : models) {
      const auto & known = benchmark_model_names();
      if (std::find(known.begin(), known.end(), m) == known.end()) {
        throw ConfigError("unknown model '" + m + "' (expected estimated, default, nonlinear_fit, const_vel, const_acc)");
      }
    }
    if (models.empty()) {
      throw ConfigError("benchmark needs at least one model");
    }
    if (targets.empty() && target_count == 0) {
      throw ConfigError("benchmark needs targets or a positive target_count");
    }
    if (!(brake_threshold >= 0.0)) {
      throw ConfigError("brake_threshold must be non-negative");
    }
  }
};

struct ModelRun
{
  std::string model;
  TrajectorySet trajectory;
  RmseSeries rmse;
  EventCounts events;
  ScenarioScore score;
};

struct ScenarioBenchmark
{
  std::string scenario_id;
  std::vector<VehicleId> targets;
  std::vector<VehicleEstimate> estimates;
  std::vector<ModelRun> runs;
  std::vector<std::string> warnings;
};

/// Vehicles present at `start` whose recording covers the whole horizon.
inline std::vector<VehicleId> eligible_targets(const Scenario & scenario, std::size_t start, std::size_t steps)
{
  std::vector<VehicleId> out;
  for (const auto & s : scenario.truth.series) {
    if (s.covers(start) && s.end() >= start + steps + 1) {
      out.push_back(s.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline constexpr std::uint64_t kTargetSalt = 0x54415247ULL;

/// Picks `count` of the eligible ids uniformly without replacement; result sorted.
inline std::vector<VehicleId> select_targets(
  std::vector<VehicleId> eligible, std::size_t count, std::uint64_t root_seed, const std::string & scenario_id)
{
  Rng rng(derive_seed(root_seed, hash_key(scenario_id), kTargetSalt));
  count = std::min(count, eligible.size());
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(count);
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

/// Rollout configuration and target set for scene `start` of a scenario; models unassigned.
struct RolloutPlan
{
  RolloutConfig config;
  std::vector<VehicleId> targets;
  std::vector<std::string> warnings;
};

inline RolloutPlan plan_rollout(
  const Scenario & scenario, const BenchmarkSettings & settings, const FilterConfig & filter_cfg,
  std::uint64_t root_seed)
{
  settings.validate();
  RolloutPlan plan;
  RolloutConfig & rc = plan.config;
  rc.horizon = settings.horizon;
  rc.dt = scenario.dt;
  rc.nontarget_mode = settings.nontarget_mode;
  rc.nontarget_params = settings.base;
  rc.mean_only = settings.mean_only;
  rc.kinematics = filter_cfg.kinematics;
  rc.seed = derive_seed(root_seed, hash_key(scenario.id));
  const std::size_t steps = rc.steps();

  if (settings.start_sample >= scenario.scenes.size()) {
    throw InputError("scenario " + scenario.id + ": start sample is past the end of the recording");
  }
  const auto eligible = eligible_targets(scenario, settings.start_sample, steps);
  if (settings.targets.empty()) {
    plan.targets = select_targets(eligible, settings.target_count, root_seed, scenario.id);
    if (plan.targets.size() < settings.target_count) {
      plan.warnings.push_back(
        "only " + std::to_string(plan.targets.size()) + " vehicles cover the horizon; requested " +
        std::to_string(settings.target_count));
    }
  } else {
    for (VehicleId id : settings.targets) {
      if (std::binary_search(eligible.begin(), eligible.end(), id)) {
        plan.targets.push_back(id);
      } else {
        plan.warnings.push_back("target " + std::to_string(id) + " does not cover the horizon; dropped");
      }
    }
    std::sort(plan.targets.begin(), plan.targets.end());
    plan.targets.erase(std::unique(plan.targets.begin(), plan.targets.end()), plan.targets.end());
  }
  if (plan.targets.empty()) {
    throw InputError("scenario " + scenario.id + ": no target vehicle covers the horizon");
  }
  rc.targets = plan.targets;
  return plan;
}

/// Assigns `model` to every target. For "estimated", targets with a mean particle get stochastic
/// IDM around it; the rest fall back to deterministic IDM with the base preset (with a warning).
inline void assign_model(
  RolloutConfig & rc, const std::string & model, const BenchmarkSettings & settings,
  const std::map<VehicleId, Particle> & estimated, std::vector<std::string> & warnings)
{
  rc.models.clear();
  rc.default_model.reset();
  if (model == "estimated") {
    for (VehicleId id : rc.targets) {
      if (auto it = estimated.find(id); it != estimated.end()) {
        const Particle & m = it->second;
        rc.models.emplace(id, DriverModel::stochastic_idm({settings.base.with_v_des(m.v_des), m.sigma_idm}));
      } else {
        warnings.push_back("vehicle " + std::to_string(id) + ": no estimate; rolled out with the base preset");
        rc.models.emplace(id, DriverModel::deterministic_idm(settings.base));
      }
    }
  } else if (model == "default") {
    rc.default_model = DriverModel::deterministic_idm(default_preset());
  } else if (model == "nonlinear_fit") {
    rc.default_model = DriverModel::deterministic_idm(nonlinear_fit_preset());
  } else if (model == "const_vel") {
    rc.default_model = DriverModel::constant_velocity();
  } else if (model == "const_acc") {
    rc.default_model = DriverModel::constant_acceleration(settings.constant_acceleration);
  } else {
    throw ConfigError("unknown model '" + model + "'");
  }
}

/// Rolls scene `start` forward under every requested model and scores the targets against the
/// recording. The "estimated" model first filters each target over the same window.
inline ScenarioBenchmark benchmark_scenario(
  const Scenario & scenario, const BenchmarkSettings & settings, const FilterConfig & filter_cfg,
  std::uint64_t root_seed, std::size_t threads)
{
  RolloutPlan plan = plan_rollout(scenario, settings, filter_cfg, root_seed);
  RolloutConfig & rc = plan.config;
  const std::size_t steps = rc.steps();

  ScenarioBenchmark out;
  out.scenario_id = scenario.id;
  out.targets = plan.targets;
  out.warnings = plan.warnings;

  const Scene & scene0 = scenario.scenes[settings.start_sample];
  const TrajectorySet window = slice(scenario.truth, settings.start_sample, steps + 1);

  std::map<VehicleId, Particle> means;
  const bool wants_estimate =
    std::find(settings.models.begin(), settings.models.end(), "estimated") != settings.models.end();
  if (wants_estimate) {
    out.estimates = estimate_scenario(
      scenario, filter_cfg, settings.base, root_seed, threads, out.targets, settings.start_sample, steps + 1);
    for (const auto & e : out.estimates) {
      if (e.status == EstimateStatus::ok) {
        means.emplace(e.vehicle_id, e.result->mean);
      }
    }
  }

  for (const auto & model : settings.models) {
    assign_model(rc, model, settings, means, out.warnings);
    ModelRun run;
    run.model = model;
    run.trajectory = rollout(scene0, &window, rc);
    run.rmse = rmse_series(run.trajectory, window, out.targets);
    run.events = count_events(run.trajectory, settings.brake_threshold, std::span<const VehicleId>(out.targets));
    run.score.scenario_id = scenario.id;
    run.score.position_rmse = run.rmse.position.back();
    run.score.velocity_rmse = run.rmse.velocity.back();
    run.score.collisions = static_cast<double>(run.events.collisions);
    run.score.hard_brakes = static_cast<double>(run.events.hard_brakes);
    out.runs.push_back(std::move(run));
  }
  return out;
}

/// Benchmarks every scenario. Scenarios run in parallel when there are enough of them to keep
/// the workers busy; otherwise the per-vehicle filters inside each scenario do.
inline std::vector<ScenarioBenchmark> benchmark_all(
  const std::vector<Scenario> & scenarios, const BenchmarkSettings & settings, const FilterConfig & filter_cfg,
  std::uint64_t root_seed, std::size_t threads)
{
  std::vector<ScenarioBenchmark> out(scenarios.size());
  const bool outer = scenarios.size() >= threads;
  parallel_for(scenarios.size(), outer ? threads : 1, [&](std::size_t i) {
    out[i] = benchmark_scenario(scenarios[i], settings, filter_cfg, root_seed, outer ? 1 : threads);
  });
  return out;
}

/// Table-style aggregate for one model across scenarios.
inline EvalReport model_report(const std::vector<ScenarioBenchmark> & results, const std::string & model)
{
  std::vector<ScenarioScore> scores;
  for (const auto & r : results) {
    for (const auto & run : r.runs) {
      if (run.model == model) {
        scores.push_back(run.score);
      }
    }
  }
  return aggregate(std::move(scores));
}

}  // namespace idmpf

#endif  // IDMPF__PIPELINE_HPP_
