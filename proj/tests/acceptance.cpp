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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if
// any criterion fails. The optional dataset criterion runs only when the paths are set:
//   IDMPF_NGSIM_CSV                               NGSIM-style export
//   IDMPF_HIGHD_TRACKS [, IDMPF_HIGHD_META]       HighD-style tracks and recording metadata

#include "idmpf/idmpf.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace idmpf;

struct Outcome
{
  enum class Status
  {
    pass,
    fail,
    skip,
  };
  Status status = Status::fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail)
{
  return {ok ? Outcome::Status::pass : Outcome::Status::fail, std::move(detail)};
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char * f, double x)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

oracle::Idm to_oracle(const IdmParams & p)
{
  return {p.v_des(), p.d_min(), p.tau(), p.a_max(), p.b_pref()};
}

// ---- 1 ----

Outcome idm_closed_form()
{
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20261016);
  double worst_a = 0.0;
  double worst_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const IdmParams p(
      5 + 35 * uniform01(rng), 0.5 + 5 * uniform01(rng), 0.5 + 2 * uniform01(rng), 0.3 + 3 * uniform01(rng),
      0.5 + 4 * uniform01(rng));
    const double v = 40 * uniform01(rng);
    const double r = -10 + 20 * uniform01(rng);
    const double d = 0.5 + 150 * uniform01(rng);
    const bool leader = i % 5 != 0;
    const auto ego = leader ? EgoObservation::following(v, r, d) : EgoObservation::free_road(v);
    worst_a = std::max(worst_a, oracle::relative_error(idm_acceleration(ego, p), oracle::acceleration(v, r, d, leader, to_oracle(p))));
    worst_gap = std::max(worst_gap, oracle::relative_error(desired_gap(v, r, p), oracle::desired_gap(v, r, to_oracle(p))));
  }
  const double example = idm_acceleration(EgoObservation::following(10, -2, 20), default_preset());
  const double elapsed = seconds_since(t0);
  const bool ok = worst_a <= 1e-12 && worst_gap <= 1e-12 && std::fabs(example - 1.023) < 5e-4 && elapsed < 1.0;
  return verdict(
    ok, "max rel err accel " + fmt("%.2e", worst_a) + ", gap " + fmt("%.2e", worst_gap) + "; a(10,-2,20) = " +
          fmt("%.4f", example) + " m/s^2; " + fmt("%.3f", elapsed) + " s (limit 1 s)");
}

// ---- 2 ----

/// Mean particles from a real filter run, used as "estimated" drivers in the congested suite.
std::vector<Particle> estimated_pool()
{
  const auto sc = fixtures::only_scenario(fixtures::recovery_spec(404, 20));
  std::vector<Particle> pool;
  for (const auto & e : estimate_scenario(sc, FilterConfig{}, default_preset(), 404, default_thread_count())) {
    if (e.result) {
      pool.push_back(e.result->mean);
    }
  }
  return pool;
}

Outcome collision_free()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto pool = estimated_pool();
  const FilterConfig grid;
  Rng gen(8080);
  std::size_t collisions = 0;
  std::size_t rollouts = 0;
  std::string first_failure;
  for (int scene = 0; scene < 100; ++scene) {
    const double dt = scene % 2 == 0 ? 0.1 : 0.04;
    auto vs = fixtures::congested_scene(gen);
    const auto head = static_cast<VehicleId>(vs.size());
    const int head_mode = scene % 3;  // 0: drives like the others, 1: stopped, 2: brakes at 4 m/s^2
    if (head_mode == 1) {
      vs.back().velocity = 0.0;
    }
    const Scene s0(0.0, vs);

    std::vector<std::pair<std::string, std::function<DriverModel(VehicleId)>>> variants;
    for (const auto & [name, preset] : {std::pair{"default", default_preset()}, std::pair{"nonlinear_fit", nonlinear_fit_preset()}}) {
      const IdmParams p = preset;
      variants.emplace_back(std::string("deterministic ") + name, [p](VehicleId) { return DriverModel::deterministic_idm(p); });
      std::vector<StochasticParams> drivers;
      for (std::size_t i = 0; i < vs.size(); ++i) {
        const double v_des = grid.v_des.value(static_cast<int>(uniform_index(gen, static_cast<std::uint64_t>(grid.v_des.cells()))));
        const double sigma = grid.sigma.value(static_cast<int>(uniform_index(gen, static_cast<std::uint64_t>(grid.sigma.cells()))));
        drivers.push_back({p.with_v_des(v_des), sigma});
      }
      variants.emplace_back(std::string("stochastic ") + name, [drivers](VehicleId id) {
        return DriverModel::stochastic_idm(drivers[static_cast<std::size_t>(id - 1)]);
      });
    }
    const std::size_t offset = uniform_index(gen, pool.size());
    variants.emplace_back("estimated", [&pool, offset](VehicleId id) {
      const Particle & m = pool[(offset + static_cast<std::size_t>(id)) % pool.size()];
      return DriverModel::stochastic_idm({default_preset().with_v_des(m.v_des), m.sigma_idm});
    });

    for (const auto & [name, make] : variants) {
      RolloutConfig rc;
      rc.horizon = 5.0;
      rc.dt = dt;
      rc.nontarget_mode = NonTargetMode::deterministic_idm;
      rc.seed = derive_seed(8080, static_cast<std::uint64_t>(scene));
      for (const auto & v : vs) {
        rc.targets.push_back(v.id);
        if (v.id == head && head_mode == 1) {
          rc.models.emplace(v.id, DriverModel::constant_velocity());
        } else if (v.id == head && head_mode == 2) {
          rc.models.emplace(v.id, DriverModel::constant_acceleration(-4.0));
        } else {
          rc.models.emplace(v.id, make(v.id));
        }
      }
      const auto ev = count_events(rollout(s0, nullptr, rc));
      ++rollouts;
      if (ev.collisions > 0 && first_failure.empty()) {
        first_failure = "; first: scene " + std::to_string(scene) + " (" + name + ", dt " + fmt("%.2f", dt) + ")";
      }
      collisions += ev.collisions;
    }
  }
  const double elapsed = seconds_since(t0);
  return verdict(
    collisions == 0 && elapsed < 30.0, std::to_string(collisions) + " collisions over " + std::to_string(rollouts) +
                                         " rollouts of 100 scenes" + first_failure + "; " + fmt("%.2f", elapsed) +
                                         " s (limit 30 s)");
}

// ---- 3 ----

Outcome parameter_recovery()
{
  std::size_t vehicles = 0;
  std::size_t within = 0;
  std::size_t shrinking = 0;
  std::size_t worst_seed_within = 20;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto spec = fixtures::recovery_spec(seed, 20);
    const auto synth = generate_synthetic(spec);
    const auto sc = build_scenarios(synth.trace).front();
    std::vector<VehicleId> ids;
    for (const auto & t : synth.truth) {
      ids.push_back(t.vehicle_id);
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto est = estimate_scenario(sc, FilterConfig{}, default_preset(), seed, default_thread_count(), ids);
    slowest = std::max(slowest, seconds_since(t0));
    std::size_t seed_within = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      ++vehicles;
      if (!est[i].result) {
        continue;
      }
      const auto & r = *est[i].result;
      if (std::fabs(r.mean.v_des - synth.truth[i].v_des) <= 1.0) {
        ++within;
        ++seed_within;
      }
      if (r.trace.rms.back() < r.trace.rms.front()) {
        ++shrinking;
      }
    }
    worst_seed_within = std::min(worst_seed_within, seed_within);
  }
  const double frac_within = static_cast<double>(within) / static_cast<double>(vehicles);
  const double frac_shrinking = static_cast<double>(shrinking) / static_cast<double>(vehicles);
  return verdict(
    frac_within >= 0.9 && frac_shrinking >= 0.9 && slowest <= 60.0,
    "v_des within 1 m/s: " + std::to_string(within) + "/" + std::to_string(vehicles) + " (worst seed " +
      std::to_string(worst_seed_within) + "/20); trace shrinks: " + std::to_string(shrinking) + "/" +
      std::to_string(vehicles) + "; slowest 20-vehicle batch " + fmt("%.2f", slowest) + " s (limit 60 s)");
}

// ---- 4 ----

Outcome benchmark_ordering()
{
  const auto t0 = std::chrono::steady_clock::now();
  auto spec = fixtures::recovery_spec(1515, 20);
  spec.scenario_prefix = "hetero";
  spec.scenario_count = 15;
  const auto scenarios = build_scenarios(generate_synthetic(spec).trace);
  BenchmarkSettings settings;
  settings.models = {"estimated", "default"};
  settings.target_count = 20;
  const auto results = benchmark_all(scenarios, settings, FilterConfig{}, 1515, default_thread_count());
  std::size_t wins = 0;
  for (const auto & r : results) {
    if (r.runs[0].score.position_rmse < r.runs[1].score.position_rmse) {
      ++wins;
    }
  }
  const auto est = model_report(results, "estimated");
  const auto def = model_report(results, "default");
  return verdict(
    wins >= 14, "estimated < default in " + std::to_string(wins) + "/15 scenarios; mean end RMSE " +
                  fmt("%.2f", est.position_rmse.mean) + " vs " + fmt("%.2f", def.position_rmse.mean) + " m; " +
                  fmt("%.1f", seconds_since(t0)) + " s");
}

// ---- 5 ----

Outcome baseline_exactness()
{
  CanonicalTrace trace;
  trace.dt = 0.04;
  for (std::int64_t k = 0; k <= 130; ++k) {
    const double t = static_cast<double>(k) * trace.dt;
    for (VehicleId id = 1; id <= 20; ++id) {
      const double v = 20.0 + 0.5 * static_cast<double>(id);
      trace.rows.push_back({"cruise", k, t, id, static_cast<LaneId>(1 + id % 3), 40.0 * static_cast<double>(id) + v * t, v, 4.5});
    }
  }
  const auto sc = build_scenarios(trace).front();
  BenchmarkSettings settings;
  settings.models = {"const_vel"};
  settings.start_sample = 5;
  const auto run = benchmark_scenario(sc, settings, FilterConfig{}, 5, 1).runs.front();
  double worst = 0.0;
  for (std::size_t k = 0; k < run.rmse.position.size(); ++k) {
    worst = std::max({worst, run.rmse.position[k], run.rmse.velocity[k]});
  }

  const Scene s0(0.0, {{1, 0.0, 20.0, 5.0, 1}, {2, 35.0, 15.0, 5.0, 1}});
  RolloutConfig rc;
  rc.horizon = 5.0;
  rc.dt = 0.1;
  rc.targets = {1, 2};
  rc.models.emplace(1, DriverModel::constant_acceleration(kConstantAcceleration));
  rc.models.emplace(2, DriverModel::constant_velocity());
  const auto ev = count_events(rollout(s0, nullptr, rc));
  return verdict(
    worst <= 1e-9 && ev.collisions >= 1,
    "const_vel worst RMSE " + fmt("%.2e", worst) + " over " + std::to_string(run.rmse.position.size()) +
      " samples; const_acc behind slower leader: " + std::to_string(ev.collisions) + " collision(s)");
}

// ---- 6 ----

Outcome filter_mechanics()
{
  std::vector<std::string> problems;

  // Resampling unbiasedness.
  std::size_t outside = 0;
  double worst_z = 0.0;
  {
    const std::size_t n = 40;
    Rng wr(61);
    std::vector<double> w(n);
    for (double & x : w) {
      x = std::pow(uniform01(wr), 3.0);
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const std::size_t trials = 10000;
    std::vector<double> sum(n, 0.0);
    Rng rng(62);
    for (std::size_t t = 0; t < trials; ++t) {
      for (std::size_t a : systematic_resample_indices(std::span<const double>(w), rng)) {
        sum[a] += 1.0;
      }
    }
    // Systematic resampling gives slot i either floor(I w_i) or ceil(I w_i) copies, the latter
    // with probability equal to the fractional part f, so one draw has variance f (1 - f).
    for (std::size_t i = 0; i < n; ++i) {
      const double expected = static_cast<double>(n) * w[i] / total;
      const double f = expected - std::floor(expected);
      const double se = std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
      const double z = std::fabs(sum[i] / static_cast<double>(trials) - expected) / se;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) {
        ++outside;
      }
    }
    if (outside > 0) {
      problems.push_back(std::to_string(outside) + "/40 multiplicities outside 3 SE");
    }
  }

  // Grid preservation, dither count and normalization over full filter runs.
  const FilterConfig cfg;
  const std::size_t expected_dither = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(cfg.particle_count)));
  std::size_t checked = 0;
  double worst_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto sc = fixtures::only_scenario(fixtures::recovery_spec(seed, 5));
    for (VehicleId id = 1; id <= 5; ++id) {
      const auto obs = build_observations(sc, id);
      ParticleSet ps = init_particles(cfg, vehicle_seed(seed, sc.id, id));
      for (const auto & p : ps.particles) {
        checked += on_grid(p, cfg) ? 1 : 0;
        if (!on_grid(p, cfg)) {
          problems.push_back("init produced an off-grid particle");
        }
      }
      Rng rng(ps.seed);
      for (const auto & o : obs) {
        const auto step = filter_step_detailed(ps, o, cfg, default_preset(), rng);
        worst_sum = std::max(worst_sum, std::fabs(std::accumulate(step.slot_weights.begin(), step.slot_weights.end(), 0.0) - 1.0));
        if (step.dithered.size() != expected_dither) {
          problems.push_back("step dithered " + std::to_string(step.dithered.size()) + " slots");
        }
        for (const auto & p : step.set.particles) {
          ++checked;
          if (!on_grid(p, cfg)) {
            problems.push_back("step produced an off-grid particle");
          }
        }
        ps = step.set;
      }
    }
  }
  if (worst_sum > 1e-12) {
    problems.push_back("weights sum off by " + fmt("%.2e", worst_sum));
  }

  // With strictly non-zero offsets and an interior population every selected slot must move.
  for (std::size_t count : {7u, 13u, 500u}) {
    FilterConfig c;
    c.particle_count = count;
    c.v_des_dither_steps = {-1, 1};
    c.sigma_dither_steps = {-1, 1};
    Rng rng(count);
    ParticleSet ps;
    std::vector<double> w(count);
    for (std::size_t i = 0; i < count; ++i) {
      ps.particles.push_back(
        {c.v_des.value(1 + static_cast<int>(uniform_index(rng, 59))), c.sigma.value(1 + static_cast<int>(uniform_index(rng, 18)))});
      w[i] = uniform01(rng);
    }
    const auto out = dither(ps, c, w, rng);
    std::size_t moved = 0;
    for (std::size_t i = 0; i < count; ++i) {
      moved += out.particles[i] == ps.particles[i] ? 0 : 1;
      if (!on_grid(out.particles[i], c)) {
        problems.push_back("dither produced an off-grid particle");
      }
    }
    if (moved != c.dither_count() || c.dither_count() != static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(count)))) {
      problems.push_back("dither moved " + std::to_string(moved) + " of " + std::to_string(count));
    }
  }

  // Two full pipeline reruns, with different thread counts, must agree bit for bit.
  auto pipeline = [](std::size_t threads) {
    auto spec = fixtures::recovery_spec(66, 10);
    spec.scenario_count = 3;
    const auto scenarios = build_scenarios(generate_synthetic(spec).trace);
    BenchmarkSettings settings;
    settings.target_count = 8;
    const auto results = benchmark_all(scenarios, settings, FilterConfig{}, 66, threads);
    std::ostringstream bytes;
    bytes << report::report_json(results, settings.models).dump();
    for (const auto & r : results) {
      bytes << report::posteriors_json(r.estimates, FilterConfig{}, default_preset(), 66).dump();
      for (const auto & run : r.runs) {
        for (const auto & s : run.trajectory.series) {
          bytes.write(reinterpret_cast<const char *>(s.position.data()), static_cast<std::streamsize>(s.position.size() * sizeof(double)));
          bytes.write(reinterpret_cast<const char *>(s.velocity.data()), static_cast<std::streamsize>(s.velocity.size() * sizeof(double)));
        }
      }
    }
    return bytes.str();
  };
  const std::string first = pipeline(1);
  const std::string second = pipeline(std::max<std::size_t>(2, default_thread_count()));
  if (first != second) {
    problems.push_back("pipeline reruns differ");
  }

  std::string detail = "resampling: max |z| " + fmt("%.2f", worst_z) + " over 40 slots x 1e4 trials; " +
                       std::to_string(checked) + " particles on grid; max |sum w - 1| " + fmt("%.1e", worst_sum) +
                       "; rerun outputs " + (first == second ? "identical" : "differ") + " (" +
                       std::to_string(first.size()) + " bytes)";
  for (const auto & p : problems) {
    detail += "; " + p;
  }
  return verdict(problems.empty(), detail);
}

// ---- 7 ----

Outcome likelihood()
{
  Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double sigma = 0.05 + 2.0 * uniform01(rng);
    const double dt = 0.02 + 0.2 * uniform01(rng);
    const double mean = -100 + 200 * uniform01(rng);
    const double sd = std::sqrt(sigma) * dt;
    const double x = mean + sd * (-6 + 12 * uniform01(rng));
    const long double want = oracle::normal_pdf(x, mean, static_cast<long double>(sigma) * dt * dt);
    worst = std::max(worst, oracle::relative_error(position_likelihood(x, mean, sigma, dt), want));
  }
  double worst_mass = 0.0;
  for (const auto & [sigma, dt] : {std::pair{0.1, 0.04}, std::pair{1.0, 0.1}, std::pair{2.0, 0.04}, std::pair{0.5, 0.2}}) {
    const double mean = 12.5;
    const double sd = std::sqrt(sigma) * dt;
    const long double mass = oracle::trapezoid(
      [&](long double x) { return static_cast<long double>(position_likelihood(static_cast<double>(x), mean, sigma, dt)); },
      mean - 8 * sd, mean + 8 * sd, 20000);
    worst_mass = std::max(worst_mass, static_cast<double>(std::fabs(mass - 1.0L)));
  }
  return verdict(
    worst <= 1e-12 && worst_mass <= 1e-6,
    "max rel err " + fmt("%.2e", worst) + " over 1000 points; max |mass - 1| " + fmt("%.2e", worst_mass));
}

// ---- 8 ----

Outcome dataset_replication()
{
  const char * ngsim = std::getenv("IDMPF_NGSIM_CSV");
  const char * highd = std::getenv("IDMPF_HIGHD_TRACKS");
  const char * highd_meta = std::getenv("IDMPF_HIGHD_META");
  if (ngsim == nullptr && highd == nullptr) {
    return {Outcome::Status::skip, "no dataset supplied (set IDMPF_NGSIM_CSV or IDMPF_HIGHD_TRACKS)"};
  }
  const std::filesystem::path source = IDMPF_SOURCE_DIR;
  std::string detail;
  auto bench = [&](const std::string & label, const AdaptResult & adapted) {
    const auto scenarios = build_scenarios(adapted.trace);
    BenchmarkSettings settings;
    const auto results = benchmark_all(scenarios, settings, FilterConfig{}, 1, default_thread_count());
    detail += label + ":";
    for (const auto & m : settings.models) {
      const auto r = model_report(results, m);
      detail += " " + m + " " + fmt("%.2f", r.position_rmse.mean) + "+-" + fmt("%.2f", r.position_rmse.std) + " m /" +
                fmt("%.1f", r.collisions.mean) + " coll;";
    }
  };
  try {
    if (ngsim != nullptr) {
      const auto map = config::column_map_from_json(config::read_file(source / "config/ngsim_us101.json"));
      bench("ngsim", adapt_ngsim(ngsim, map));
    }
    if (highd != nullptr) {
      const auto map = config::column_map_from_json(config::read_file(source / "config/highd.json"));
      std::optional<std::filesystem::path> meta;
      if (highd_meta != nullptr) {
        meta = highd_meta;
      }
      bench(" highd", adapt_highd(highd, meta, map));
    }
  } catch (const std::exception & e) {
    return verdict(false, detail + " error: " + e.what());
  }
  return verdict(true, detail);
}

}  // namespace

int main()
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    {"1 IDM closed form", idm_closed_form},
    {"2 collision-free IDM rollouts", collision_free},
    {"3 synthetic parameter recovery", parameter_recovery},
    {"4 benchmark ordering", benchmark_ordering},
    {"5 baseline exactness", baseline_exactness},
    {"6 filter mechanics", filter_mechanics},
    {"7 likelihood", likelihood},
    {"8 dataset replication (optional)", dataset_replication},
  };
  int failures = 0;
  for (const auto & [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception & e) {
      o = {Outcome::Status::fail, std::string("exception: ") + e.what()};
    }
    const char * tag = o.status == Outcome::Status::pass ? "PASS" : o.status == Outcome::Status::skip ? "SKIP" : "FAIL";
    failures += o.status == Outcome::Status::fail ? 1 : 0;
    std::cout << tag << "  criterion " << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
