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

// Online particle filter over theta = (v_des, sigma_idm) for one vehicle.
//
// Each step proposes one particle per slot, predicts the next position under stochastic
// IDM, weights the proposal by the density of the observed next position, resamples
// systematically and dithers the best-weighted survivors on the parameter grid.
// Particles never leave the grid: every value is rebuilt from an integer cell index.

#ifndef IDMPF__FILTER_HPP_
#define IDMPF__FILTER_HPP_

#include "idmpf/errors.hpp"
#include "idmpf/grid.hpp"
#include "idmpf/models.hpp"
#include "idmpf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace idmpf
{

enum class ProposalMode
{
  literal,  ///< each slot draws a particle uniformly at random, with replacement
  sweep,    ///< slot i proposes particle i
};

struct FilterConfig
{
  std::size_t particle_count = 500;
  GridAxis v_des{10.0, 40.0, 0.5};
  GridAxis sigma{0.1, 2.0, 0.1};
  double dither_fraction = 0.2;
  std::vector<int> v_des_dither_steps{-1, 0, 1};  ///< in grid cells: {-0.5, 0, +0.5} m/s by default
  std::vector<int> sigma_dither_steps{-1, 0, 1};  ///< in grid cells: {-0.1, 0, +0.1} by default
  ProposalMode proposal = ProposalMode::literal;
  NoiseModel noise = NoiseModel::kinematic;
  Kinematics kinematics = Kinematics::full;

  void validate() const
  {
    if (particle_count == 0) {
      throw ConfigError("particle_count must be at least 1");
    }
    v_des.validate("v_des");
    sigma.validate("sigma");
    if (v_des.lo <= 0.0) {
      throw ConfigError("v_des support must be strictly positive");
    }
    if (sigma.lo < 0.1 - 1e-12) {
      throw ConfigError("sigma support must start at 0.1 or above");
    }
    if (!(dither_fraction >= 0.0 && dither_fraction <= 1.0)) {
      throw ConfigError("dither_fraction must lie in [0, 1]");
    }
    if (v_des_dither_steps.empty() || sigma_dither_steps.empty()) {
      throw ConfigError("dither supports must be non-empty");
    }
  }

  std::size_t dither_count() const
  {
    return static_cast<std::size_t>(
      std::ceil(dither_fraction * static_cast<double>(particle_count) - 1e-9));
  }
};

struct Particle
{
  double v_des = 0.0;
  double sigma_idm = 0.0;

  friend bool operator==(const Particle &, const Particle &) = default;
};

inline bool on_grid(const Particle & p, const FilterConfig & cfg)
{
  return cfg.v_des.contains(p.v_des) && cfg.sigma.contains(p.sigma_idm);
}

struct ParticleSet
{
  std::vector<Particle> particles;
  std::vector<double> weights;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return particles.size(); }
};

/// One filter transition: ego context at t, true position and speed at t, true position at t+1.
struct FilterObservation
{
  EgoObservation ego;
  double x = 0.0;
  double v = 0.0;
  double x_next = 0.0;
  double dt = 0.1;
};

inline ParticleSet init_particles(const FilterConfig & cfg, std::uint64_t seed)
{
  cfg.validate();
  Rng rng(seed);
  ParticleSet ps;
  ps.seed = seed;
  ps.particles.reserve(cfg.particle_count);
  const auto v_cells = static_cast<std::uint64_t>(cfg.v_des.cells());
  const auto s_cells = static_cast<std::uint64_t>(cfg.sigma.cells());
  for (std::size_t i = 0; i < cfg.particle_count; ++i) {
    const int vi = static_cast<int>(uniform_index(rng, v_cells));
    const int si = static_cast<int>(uniform_index(rng, s_cells));
    ps.particles.push_back({cfg.v_des.value(vi), cfg.sigma.value(si)});
  }
  ps.weights.assign(cfg.particle_count, 1.0 / static_cast<double>(cfg.particle_count));
  return ps;
}

/// Low-variance resampling. Returns ancestor indices; particle i appears floor or ceil of I*w_i times.
template <class Engine>
std::vector<std::size_t> systematic_resample_indices(std::span<const double> weights, Engine & rng)
{
  const std::size_t n = weights.size();
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw FilterDegeneracy("resample: weights must be finite and non-negative", {});
    }
    total += w;
  }
  if (n == 0 || !(total > 0.0)) {
    throw FilterDegeneracy("resample: all weights are zero", {});
  }

  const double step = total / static_cast<double>(n);
  const double start = uniform01(rng) * step;
  std::vector<std::size_t> ancestors;
  ancestors.reserve(n);
  std::size_t i = 0;
  double cumulative = weights[0];
  for (std::size_t k = 0; k < n; ++k) {
    const double target = start + static_cast<double>(k) * step;
    while (target >= cumulative && i + 1 < n) {
      ++i;
      cumulative += weights[i];
    }
    // Zero-weight particles may only be reached through round-off at the tail; walk back.
    std::size_t pick = i;
    while (weights[pick] == 0.0 && pick > 0) {
      --pick;
    }
    ancestors.push_back(pick);
  }
  return ancestors;
}

template <class Engine>
std::vector<Particle> resample(
  std::span<const Particle> particles, std::span<const double> weights, Engine & rng)
{
  if (particles.size() != weights.size()) {
    throw ConfigError("resample: particles and weights differ in size");
  }
  std::vector<Particle> out;
  out.reserve(particles.size());
  for (std::size_t a : systematic_resample_indices(weights, rng)) {
    out.push_back(particles[a]);
  }
  return out;
}

/// Indices of the ceil(fraction * n) largest weights, ties resolved toward the lower index.
inline std::vector<std::size_t> select_dither_slots(std::span<const double> weights, std::size_t count)
{
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  count = std::min(count, order.size());
  std::partial_sort(
    order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
    [&](std::size_t a, std::size_t b) {
      return weights[a] != weights[b] ? weights[a] > weights[b] : a < b;
    });
  order.resize(count);
  return order;
}

template <class Engine>
Particle dither_particle(const Particle & p, const FilterConfig & cfg, Engine & rng)
{
  const auto & dv = cfg.v_des_dither_steps;
  const auto & ds = cfg.sigma_dither_steps;
  const int v_step = dv[uniform_index(rng, dv.size())];
  const int s_step = ds[uniform_index(rng, ds.size())];
  const int vi = std::clamp(cfg.v_des.index_of(p.v_des) + v_step, 0, cfg.v_des.cells() - 1);
  const int si = std::clamp(cfg.sigma.index_of(p.sigma_idm) + s_step, 0, cfg.sigma.cells() - 1);
  return {cfg.v_des.value(vi), cfg.sigma.value(si)};
}

/// Grid-preserving perturbation of the top-ranked particles. last_weights[i] ranks particle i.
template <class Engine>
ParticleSet dither(
  ParticleSet ps, const FilterConfig & cfg, std::span<const double> last_weights, Engine & rng)
{
  if (last_weights.size() != ps.particles.size()) {
    throw ConfigError("dither: weight vector does not match the particle set");
  }
  for (std::size_t i : select_dither_slots(last_weights, cfg.dither_count())) {
    ps.particles[i] = dither_particle(ps.particles[i], cfg, rng);
  }
  return ps;
}

/// Everything one step produces; `set` is what the next step consumes.
struct StepOutcome
{
  ParticleSet set;
  std::vector<Particle> proposals;     ///< particle evaluated in each slot
  std::vector<double> slot_weights;    ///< normalized, sums to 1
  std::vector<std::size_t> ancestors;  ///< resampled slot for each output particle
  std::vector<std::size_t> dithered;   ///< output indices that received a dither draw
};

template <class Engine>
StepOutcome filter_step_detailed(
  const ParticleSet & ps, const FilterObservation & obs, const FilterConfig & cfg,
  const IdmParams & base, Engine & rng)
{
  if (!std::isfinite(obs.x_next) || !std::isfinite(obs.x) || !std::isfinite(obs.v)) {
    throw DomainError("filter_step: observation is not finite");
  }
  if (!(obs.dt > 0.0)) {
    throw DomainError("filter_step: dt must be positive");
  }
  const std::size_t n = ps.particles.size();
  if (n == 0) {
    throw ConfigError("filter_step: empty particle set");
  }

  StepOutcome out;
  out.proposals.resize(n);
  std::vector<double> log_w(n);
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  double max_log_w = -std::numeric_limits<double>::infinity();
  double min_log_w = std::numeric_limits<double>::infinity();
  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::size_t pick = cfg.proposal == ProposalMode::literal ? uniform_index(rng, n) : slot;
    const Particle & p = ps.particles[pick];
    out.proposals[slot] = p;
    const double a = idm_acceleration(obs.ego, base.with_v_des(p.v_des));
    const double mean = predict_position(obs.x, obs.v, a, obs.dt, cfg.kinematics);
    const double var = position_variance(p.sigma_idm, obs.dt, cfg.noise);
    const double sampled = mean + std::sqrt(var) * standard_normal(rng);
    log_w[slot] = log_gaussian_pdf(obs.x_next, sampled, var);
    if (std::isnan(log_w[slot])) {
      log_w[slot] = -std::numeric_limits<double>::infinity();
    }
    max_log_w = std::max(max_log_w, log_w[slot]);
    min_log_w = std::min(min_log_w, log_w[slot]);
  }

  const FilterDegeneracy::Diagnostic diagnostic{obs.x_next, obs.ego.v(), max_log_w, min_log_w};
  if (!std::isfinite(max_log_w)) {
    throw FilterDegeneracy("filter_step: every particle weight vanished", diagnostic);
  }
  out.slot_weights.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.slot_weights[i] = std::exp(log_w[i] - max_log_w);
    total += out.slot_weights[i];
  }
  for (double & w : out.slot_weights) {
    w /= total;
  }

  out.ancestors = systematic_resample_indices(std::span<const double>(out.slot_weights), rng);
  ParticleSet next;
  next.seed = ps.seed;
  next.particles.reserve(n);
  std::vector<double> source_weights(n);
  for (std::size_t k = 0; k < n; ++k) {
    next.particles.push_back(out.proposals[out.ancestors[k]]);
    source_weights[k] = out.slot_weights[out.ancestors[k]];
  }
  out.dithered = select_dither_slots(source_weights, cfg.dither_count());
  for (std::size_t i : out.dithered) {
    next.particles[i] = dither_particle(next.particles[i], cfg, rng);
  }
  next.weights.assign(n, 1.0 / static_cast<double>(n));
  out.set = std::move(next);
  return out;
}

template <class Engine>
ParticleSet filter_step(
  const ParticleSet & ps, const FilterObservation & obs, const FilterConfig & cfg,
  const IdmParams & base, Engine & rng)
{
  return filter_step_detailed(ps, obs, cfg, base, rng).set;
}

/// Unweighted mean; the population is equally weighted after resampling.
inline Particle mean_particle(const ParticleSet & ps)
{
  if (ps.particles.empty()) {
    throw ConfigError("mean_particle: empty particle set");
  }
  double v = 0.0;
  double s = 0.0;
  for (const auto & p : ps.particles) {
    v += p.v_des;
    s += p.sigma_idm;
  }
  const auto n = static_cast<double>(ps.particles.size());
  return {v / n, s / n};
}

/// RMS distance of each population from the final population mean, in support-normalized units.
struct ConvergenceTrace
{
  std::vector<double> rms;
};

inline double population_spread(
  std::span<const Particle> population, const Particle & center, const FilterConfig & cfg)
{
  const double v_width = std::max(cfg.v_des.hi - cfg.v_des.lo, cfg.v_des.resolution);
  const double s_width = std::max(cfg.sigma.hi - cfg.sigma.lo, cfg.sigma.resolution);
  double acc = 0.0;
  for (const auto & p : population) {
    const double dv = (p.v_des - center.v_des) / v_width;
    const double ds = (p.sigma_idm - center.sigma_idm) / s_width;
    acc += dv * dv + ds * ds;
  }
  return std::sqrt(acc / static_cast<double>(population.size()));
}

struct FilterResult
{
  ParticleSet initial;
  ParticleSet final_set;
  Particle mean;
  ConvergenceTrace trace;  ///< entry 0 is the initial population, entry t the population after step t
};

/// Runs the filter over a whole trace. Zero transitions returns the initial population.
inline FilterResult run_filter(
  std::span<const FilterObservation> observations, const FilterConfig & cfg, const IdmParams & base,
  std::uint64_t seed)
{
  cfg.validate();
  FilterResult result;
  result.initial = init_particles(cfg, seed);
  // Stream for the steps, separate from the one init_particles consumed.
  Rng rng(derive_seed(seed, 1));

  std::vector<std::vector<Particle>> history;
  history.reserve(observations.size() + 1);
  history.push_back(result.initial.particles);
  ParticleSet current = result.initial;
  for (const auto & obs : observations) {
    current = filter_step(current, obs, cfg, base, rng);
    history.push_back(current.particles);
  }
  result.mean = mean_particle(current);
  result.final_set = std::move(current);
  result.trace.rms.reserve(history.size());
  for (const auto & population : history) {
    result.trace.rms.push_back(population_spread(population, result.mean, cfg));
  }
  return result;
}

}  // namespace idmpf

#endif  // IDMPF__FILTER_HPP_
