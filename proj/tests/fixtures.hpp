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

// Scenario builders shared by unit and acceptance tests.

#ifndef IDMPF_TESTS__FIXTURES_HPP_
#define IDMPF_TESTS__FIXTURES_HPP_

#include "idmpf/data.hpp"
#include "idmpf/pipeline.hpp"
#include "idmpf/synth.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fixtures
{

/// Followers start at their own desired speed with 100-140 m gaps behind a 40 m/s lead, so the
/// free-road term dominates and v_des is observable from 5 s of data at 25 Hz.
inline idmpf::SynthSpec recovery_spec(std::uint64_t seed, std::size_t vehicles = 20)
{
  idmpf::SynthSpec s;
  s.scenario_prefix = "recovery";
  s.vehicle_count = vehicles;
  s.gap_min = 100.0;
  s.gap_max = 140.0;
  s.lead.speed = 40.0;
  s.v_des = {15.0, 35.0, 0.5};
  s.sigma = {0.1, 1.0, 0.1};
  s.start_at_desired_speed = true;
  s.horizon = 5.0;
  s.dt = 0.04;
  s.seed = seed;
  return s;
}

/// A single follower with fixed parameters behind a distant 40 m/s lead.
inline idmpf::SynthSpec single_vehicle_spec(double v_des, double sigma, std::uint64_t seed)
{
  auto s = recovery_spec(seed, 1);
  s.v_des = {v_des, v_des, 0.5};
  s.sigma = {sigma, sigma, 0.1};
  return s;
}

/// Dense single-lane queue of 2..10 vehicles, ids 1..n from the back. Gaps are 1-15 m and each
/// follower keeps at least a 0.5 s time headway; tighter states are already past the point where
/// any discrete-time controller can stop.
inline std::vector<idmpf::VehicleState> congested_scene(idmpf::Rng & gen, double length = 5.0)
{
  const std::size_t n = 2 + idmpf::uniform_index(gen, 9);
  std::vector<idmpf::VehicleState> vs(n);
  double x = 500.0;
  double v = 25.0 * idmpf::uniform01(gen);
  for (std::size_t i = n; i-- > 0;) {
    vs[i] = {static_cast<idmpf::VehicleId>(i + 1), x, v, length, 1};
    const double gap = 1.0 + 14.0 * idmpf::uniform01(gen);
    x -= length + gap;
    v = std::min(30.0, gap / 0.5) * idmpf::uniform01(gen);
  }
  return vs;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  TempDir()
  {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("idmpf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  const std::filesystem::path & path() const { return path_; }
  std::filesystem::path operator/(const std::string & name) const { return path_ / name; }

  std::filesystem::path write(const std::string & name, const std::string & content) const
  {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline idmpf::Scenario only_scenario(const idmpf::SynthSpec & spec)
{
  return idmpf::build_scenarios(idmpf::generate_synthetic(spec).trace).front();
}

}  // namespace fixtures

#endif  // IDMPF_TESTS__FIXTURES_HPP_
