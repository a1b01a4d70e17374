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

#include "idmpf/metrics.hpp"
#include "idmpf/sim.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace idmpf
{
namespace
{

VehicleSeries series(VehicleId id, std::vector<double> x, std::vector<double> v, double length = 5.0)
{
  VehicleSeries s;
  s.id = id;
  s.length = length;
  s.lane.assign(x.size(), 1);
  s.acceleration.assign(x.size(), 0.0);
  s.position = std::move(x);
  s.velocity = std::move(v);
  return s;
}

TrajectorySet set_of(std::vector<VehicleSeries> s, double dt = 0.1)
{
  TrajectorySet t;
  t.dt = dt;
  t.series = std::move(s);
  return t;
}

TEST(Rmse, IdenticalTrajectoriesGiveZero)
{
  const auto truth = set_of({series(1, {0, 1, 2}, {10, 10, 10}), series(2, {20, 21, 22}, {10, 10, 10})});
  const std::vector<VehicleId> ids{1, 2};
  const auto r = rmse_series(truth, truth, ids);
  ASSERT_EQ(r.position.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.position[k], 0.0);
    EXPECT_EQ(r.velocity[k], 0.0);
  }
}

TEST(Rmse, ConstantOffset)
{
  const auto truth = set_of({series(1, {0, 1, 2}, {10, 10, 10}), series(2, {20, 21, 22}, {10, 10, 10})});
  const auto pred = set_of({series(1, {2, 3, 4}, {10, 10, 10}), series(2, {22, 23, 24}, {10, 10, 10})});
  const std::vector<VehicleId> ids{1, 2};
  for (double e : rmse_series(pred, truth, ids).position) {
    EXPECT_DOUBLE_EQ(e, 2.0);
  }
}

TEST(Rmse, MixedOffsets)
{
  const auto truth = set_of({series(1, {0}, {0}), series(2, {50}, {0})});
  const auto pred = set_of({series(1, {3}, {1}), series(2, {54}, {0})});
  const std::vector<VehicleId> ids{1, 2};
  const auto r = rmse_series(pred, truth, ids);
  EXPECT_NEAR(r.position[0], std::sqrt((9.0 + 16.0) / 2.0), 1e-15);
  EXPECT_NEAR(r.velocity[0], std::sqrt(0.5), 1e-15);
}

TEST(Rmse, InvariantToTargetOrderAndRelabeling)
{
  const auto truth = set_of({series(1, {0, 1}, {1, 2}), series(2, {9, 8}, {3, 4}), series(3, {5, 5}, {0, 0})});
  const auto pred = set_of({series(1, {0.5, 1.2}, {1, 2.5}), series(2, {9, 7}, {3, 3}), series(3, {6, 5}, {1, 0})});
  const std::vector<VehicleId> a{1, 2, 3};
  const std::vector<VehicleId> b{3, 1, 2};
  EXPECT_EQ(rmse_series(pred, truth, a).position, rmse_series(pred, truth, b).position);

  auto relabel = [](TrajectorySet t) {
    for (auto & s : t.series) {
      s.id += 100;
    }
    return t;
  };
  const std::vector<VehicleId> c{101, 102, 103};
  const auto r1 = rmse_series(pred, truth, a);
  const auto r2 = rmse_series(relabel(pred), relabel(truth), c);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(r1.position[k], r2.position[k], 1e-15);
  }
}

TEST(Rmse, ScoresAgainstOffsetTruth)
{
  auto truth = set_of({series(1, {0, 1, 2, 3}, {10, 10, 10, 10})});
  auto pred = set_of({series(1, {2, 3}, {10, 10})});
  pred.t0 = 0.2;
  const std::vector<VehicleId> ids{1};
  const auto r = rmse_series(pred, truth, ids);
  EXPECT_EQ(r.position, (std::vector<double>{0.0, 0.0}));
}

TEST(Rmse, TimeBaseMismatchIsInputError)
{
  const auto truth = set_of({series(1, {0, 1}, {1, 1})});
  const std::vector<VehicleId> ids{1};
  EXPECT_THROW(rmse_series(set_of({series(1, {0, 1}, {1, 1})}, 0.04), truth, ids), InputError);
  auto shifted = set_of({series(1, {0, 1}, {1, 1})});
  shifted.t0 = 0.05;
  EXPECT_THROW(rmse_series(shifted, truth, ids), InputError);
  auto late = set_of({series(1, {0, 1}, {1, 1})});
  late.t0 = 0.1;
  EXPECT_THROW(rmse_series(late, truth, ids), InputError);  // truth ends too soon
  const std::vector<VehicleId> none;
  EXPECT_THROW(rmse_series(truth, truth, none), InputError);
  const std::vector<VehicleId> unknown{4};
  EXPECT_THROW(rmse_series(truth, truth, unknown), LookupError);
}

TEST(Events, ConstantVelocityRunsIntoStoppedLeader)
{
  const Scene s(0.0, {{1, 0.0, 20.0, 5.0, 1}, {2, 15.0, 0.0, 5.0, 1}});  // 10 m gap
  RolloutConfig rc;
  rc.horizon = 0.5;
  rc.dt = 0.1;
  rc.targets = {1, 2};
  rc.default_model = DriverModel::constant_velocity();
  const auto out = rollout(s, nullptr, rc);
  const auto ev = count_events(out);
  EXPECT_GE(ev.collisions, 1u);
  EXPECT_EQ(ev.cumulative_collisions.size(), 6u);
  EXPECT_EQ(ev.cumulative_collisions[4], 0u);  // gap 2 m at 0.4 s
  EXPECT_EQ(ev.cumulative_collisions[5], 1u);  // contact at exactly 0.5 s
}

TEST(Events, SustainedOverlapCountsOnce)
{
  const auto t = set_of({series(1, {0, 8, 9, 10}, {0, 0, 0, 0}), series(2, {10, 10, 10, 10}, {0, 0, 0, 0})});
  const auto ev = count_events(t);
  EXPECT_EQ(ev.collisions, 1u);
  EXPECT_EQ(ev.cumulative_collisions, (std::vector<std::size_t>{0, 1, 1, 1}));
}

TEST(Events, DifferentLanesNeverCollide)
{
  auto a = series(1, {0, 10}, {0, 0});
  auto b = series(2, {10, 10}, {0, 0});
  b.lane = {2, 2};
  EXPECT_EQ(count_events(set_of({a, b})).collisions, 0u);
}

TEST(Events, EachPairCountedSeparately)
{
  const auto t = set_of(
    {series(1, {0, 14}, {0, 0}), series(2, {10, 15}, {0, 0}), series(3, {30, 16}, {0, 0})});
  EXPECT_EQ(count_events(t).collisions, 3u);
}

TEST(Events, HardBrakeThreshold)
{
  auto s = series(1, {0, 1, 2, 3}, {10, 10, 10, 10});
  s.acceleration = {0.0, -3.5, -3.0, -4.0};
  const auto t = set_of({s});
  const auto ev = count_events(t, 3.0);
  EXPECT_EQ(ev.hard_brakes, 2u);
  EXPECT_EQ(ev.cumulative_hard_brakes, (std::vector<std::size_t>{0, 1, 1, 2}));
  EXPECT_EQ(count_events(t, 5.0).hard_brakes, 0u);
}

TEST(Events, TargetFilterIgnoresBystanders)
{
  auto a = series(1, {0, 10}, {0, 0});
  auto b = series(2, {10, 10}, {0, 0});
  auto c = series(3, {100, 110}, {0, 0});
  a.acceleration = {-9, -9};
  const auto t = set_of({a, b, c});
  const std::vector<VehicleId> only3{3};
  const auto ev = count_events(t, 3.0, std::span<const VehicleId>(only3));
  EXPECT_EQ(ev.collisions, 0u);
  EXPECT_EQ(ev.hard_brakes, 0u);
  const std::vector<VehicleId> only2{2};
  EXPECT_EQ(count_events(t, 3.0, std::span<const VehicleId>(only2)).collisions, 1u);
}

TEST(Events, CumulativeSeriesNonDecreasingAndEndAtTotals)
{
  Rng gen(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto vs = fixtures::congested_scene(gen);
    RolloutConfig rc;
    rc.horizon = 5.0;
    rc.dt = 0.1;
    for (const auto & v : vs) {
      rc.targets.push_back(v.id);
    }
    rc.default_model = DriverModel::constant_acceleration(trial % 2 == 0 ? 1.0 : -4.0);
    const auto out = rollout(Scene(0.0, vs), nullptr, rc);
    const auto ev = count_events(out);
    EXPECT_TRUE(std::is_sorted(ev.cumulative_collisions.begin(), ev.cumulative_collisions.end()));
    EXPECT_TRUE(std::is_sorted(ev.cumulative_hard_brakes.begin(), ev.cumulative_hard_brakes.end()));
    EXPECT_EQ(ev.cumulative_collisions.back(), ev.collisions);
    EXPECT_EQ(ev.cumulative_hard_brakes.back(), ev.hard_brakes);
  }
}

TEST(Aggregate, SingleScenarioHasZeroStd)
{
  const auto r = aggregate({{"a", 5.9, 1.0, 0.0, 2.0}});
  EXPECT_DOUBLE_EQ(r.position_rmse.mean, 5.9);
  EXPECT_EQ(r.position_rmse.std, 0.0);
  EXPECT_EQ(r.hard_brakes.std, 0.0);
}

TEST(Aggregate, PopulationStd)
{
  const auto r = aggregate({{"a", 4.0, 0.0, 1.0, 0.0}, {"b", 6.0, 0.0, 1.0, 0.0}});
  EXPECT_DOUBLE_EQ(r.position_rmse.mean, 5.0);
  EXPECT_DOUBLE_EQ(r.position_rmse.std, 1.0);
  EXPECT_EQ(r.collisions.std, 0.0);
  EXPECT_EQ(r.scenarios.size(), 2u);
}

TEST(Aggregate, EmptyIsRejected)
{
  EXPECT_THROW(aggregate({}), InputError);
}

}  // namespace
}  // namespace idmpf
