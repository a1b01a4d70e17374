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

#ifndef IDMPF__MODELS_HPP_
#define IDMPF__MODELS_HPP_

#include "idmpf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <variant>

namespace idmpf
{

using VehicleId = std::int64_t;
using LaneId = std::int32_t;

namespace detail
{
inline void require_finite(double value, const char * name)
{
  if (!std::isfinite(value)) {
    throw DomainError(std::string(name) + " is not finite");
  }
}

inline void require_positive(double value, const char * name)
{
  require_finite(value, name);
  if (!(value > 0.0)) {
    throw DomainError(std::string(name) + " must be strictly positive, got " + std::to_string(value));
  }
}
}  // namespace detail

/// Intelligent Driver Model parameters. All fields are strictly positive and finite.
class IdmParams
{
public:
  IdmParams(double v_des, double d_min, double tau, double a_max, double b_pref)
  : v_des_(v_des), d_min_(d_min), tau_(tau), a_max_(a_max), b_pref_(b_pref)
  {
    detail::require_positive(v_des, "v_des");
    detail::require_positive(d_min, "d_min");
    detail::require_positive(tau, "tau");
    detail::require_positive(a_max, "a_max");
    detail::require_positive(b_pref, "b_pref");
  }

  double v_des() const noexcept { return v_des_; }    ///< desired free-flow speed, m/s
  double d_min() const noexcept { return d_min_; }    ///< standstill gap, m
  double tau() const noexcept { return tau_; }        ///< desired time headway, s
  double a_max() const noexcept { return a_max_; }    ///< maximum acceleration, m/s^2
  double b_pref() const noexcept { return b_pref_; }  ///< comfortable deceleration, m/s^2

  IdmParams with_v_des(double v_des) const { return {v_des, d_min_, tau_, a_max_, b_pref_}; }

  friend bool operator==(const IdmParams &, const IdmParams &) = default;

private:
  double v_des_;
  double d_min_;
  double tau_;
  double a_max_;
  double b_pref_;
};

/// IDM plus per-driver acceleration noise. sigma_idm is a variance in (m/s^2)^2.
class StochasticParams
{
public:
  StochasticParams(IdmParams idm, double sigma_idm) : idm_(idm), sigma_idm_(sigma_idm)
  {
    detail::require_finite(sigma_idm, "sigma_idm");
    if (sigma_idm < 0.0) {
      throw DomainError("sigma_idm must be non-negative");
    }
  }

  const IdmParams & idm() const noexcept { return idm_; }
  double sigma_idm() const noexcept { return sigma_idm_; }

  friend bool operator==(const StochasticParams &, const StochasticParams &) = default;

private:
  IdmParams idm_;
  double sigma_idm_;
};

/// Longitudinal state of one vehicle. position is the front bumper along the lane axis.
struct VehicleState
{
  VehicleId id = 0;
  double position = 0.0;
  double velocity = 0.0;
  double length = 5.0;
  LaneId lane = 0;

  friend bool operator==(const VehicleState &, const VehicleState &) = default;
};

inline void validate(const VehicleState & s)
{
  detail::require_finite(s.position, "position");
  detail::require_finite(s.velocity, "velocity");
  detail::require_positive(s.length, "length");
  if (s.velocity < 0.0) {
    throw DomainError("vehicle " + std::to_string(s.id) + " has negative velocity");
  }
}

/// What the ego driver perceives. r = v_leader - v_ego; d = leader rear bumper - ego front bumper.
class EgoObservation
{
public:
  static EgoObservation free_road(double v)
  {
    check_speed(v);
    return EgoObservation(v, 0.0, 0.0, false);
  }

  static EgoObservation following(double v, double r, double d)
  {
    check_speed(v);
    detail::require_finite(r, "relative speed");
    detail::require_finite(d, "gap");
    if (!(d > 0.0)) {
      throw DomainError("gap must be positive when a leader is present, got " + std::to_string(d));
    }
    return EgoObservation(v, r, d, true);
  }

  double v() const noexcept { return v_; }
  double r() const noexcept { return r_; }
  double d() const noexcept { return d_; }
  bool has_leader() const noexcept { return has_leader_; }

private:
  EgoObservation(double v, double r, double d, bool has_leader)
  : v_(v), r_(r), d_(d), has_leader_(has_leader)
  {
  }

  static void check_speed(double v)
  {
    detail::require_finite(v, "ego speed");
    if (v < 0.0) {
      throw DomainError("ego speed must be non-negative");
    }
  }

  double v_;
  double r_;
  double d_;
  bool has_leader_;
};

/// Position update used for simulation and for the filter's predicted mean.
enum class Kinematics
{
  full,      ///< x' = x + v dt + a dt^2 / 2
  no_drift,  ///< x' = x + a dt^2 / 2
};

/// Variance of the next-position distribution used by the filter.
enum class NoiseModel
{
  kinematic,   ///< sigma dt^4 / 4: acceleration noise carried through a dt^2 / 2
  dt_squared,  ///< sigma dt^2
};

/// Desired gap, clamped below at d_min.
inline double desired_gap(double v, double r, const IdmParams & p)
{
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError("desired_gap: speed must be finite and non-negative");
  }
  const double approach = v * r / (2.0 * std::sqrt(p.a_max() * p.b_pref()));
  return std::max(p.d_min(), p.d_min() + p.tau() * v - approach);
}

inline double idm_acceleration(const EgoObservation & ego, const IdmParams & p)
{
  const double speed_ratio = ego.v() / p.v_des();
  const double speed_ratio_sq = speed_ratio * speed_ratio;
  double interaction = 0.0;
  if (ego.has_leader()) {
    if (!(ego.d() > 0.0)) {
      throw DomainError("idm_acceleration: gap d must be positive");
    }
    const double gap_ratio = desired_gap(ego.v(), ego.r(), p) / ego.d();
    interaction = gap_ratio * gap_ratio;
    if (!std::isfinite(interaction)) {
      throw DomainError("idm_acceleration: interaction term (d_des/d)^2 is not finite");
    }
  }
  const double a = p.a_max() * (1.0 - speed_ratio_sq * speed_ratio_sq - interaction);
  if (!std::isfinite(a)) {
    throw DomainError("idm_acceleration: acceleration is not finite");
  }
  return a;
}

/// Draws a ~ N(a_idm, sigma_idm). sigma_idm is a variance; zero returns a_idm untouched.
template <class Rng>
double sample_acceleration(double a_idm, double sigma_idm, Rng & rng)
{
  if (sigma_idm == 0.0) {
    return a_idm;
  }
  if (!(sigma_idm > 0.0)) {
    throw DomainError("sample_acceleration: sigma_idm must be non-negative");
  }
  std::normal_distribution<double> noise(a_idm, std::sqrt(sigma_idm));
  return noise(rng);
}

/// Next position under the chosen kinematics; never moves the vehicle backwards.
inline double predict_position(
  double position, double velocity, double a, double dt, Kinematics kinematics = Kinematics::full)
{
  const double drift = kinematics == Kinematics::full ? velocity * dt : 0.0;
  return position + std::max(0.0, drift + 0.5 * a * dt * dt);
}

inline VehicleState propagate(
  const VehicleState & s, double a, double dt, Kinematics kinematics = Kinematics::full)
{
  detail::require_finite(a, "acceleration");
  if (!(dt > 0.0)) {
    throw DomainError("propagate: dt must be positive");
  }
  VehicleState next = s;
  next.position = predict_position(s.position, s.velocity, a, dt, kinematics);
  next.velocity = std::max(0.0, s.velocity + a * dt);
  return next;
}

inline double gaussian_pdf(double x, double mean, double variance)
{
  const double z = x - mean;
  return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

inline double log_gaussian_pdf(double x, double mean, double variance)
{
  const double z = x - mean;
  return -0.5 * z * z / variance - 0.5 * std::log(2.0 * std::numbers::pi * variance);
}

inline double position_variance(double sigma_idm, double dt, NoiseModel model)
{
  if (!(sigma_idm > 0.0) || !std::isfinite(sigma_idm)) {
    throw DomainError("position likelihood needs sigma_idm > 0");
  }
  if (!(dt > 0.0)) {
    throw DomainError("position likelihood needs dt > 0");
  }
  const double dt2 = dt * dt;
  return model == NoiseModel::dt_squared ? sigma_idm * dt2 : 0.25 * sigma_idm * dt2 * dt2;
}

/// Density of the observed next position given a predicted mean; variance sigma_idm * dt^2.
inline double position_likelihood(double x_true, double x_pred_mean, double sigma_idm, double dt)
{
  return gaussian_pdf(x_true, x_pred_mean, position_variance(sigma_idm, dt, NoiseModel::dt_squared));
}

// ---------------------------------------------------------------------------
// Driver models

struct StochasticIdm
{
  StochasticParams params;
};

struct DeterministicIdm
{
  IdmParams params;
};

struct ConstantVelocity
{
};

struct ConstantAcceleration
{
  double acceleration = 1.0;
};

/// One interface over the benchmark model family. act() may consume the RNG (stochastic IDM only).
class DriverModel
{
public:
  using Variant = std::variant<StochasticIdm, DeterministicIdm, ConstantVelocity, ConstantAcceleration>;

  static DriverModel stochastic_idm(StochasticParams p) { return DriverModel(StochasticIdm{p}); }
  static DriverModel deterministic_idm(IdmParams p) { return DriverModel(DeterministicIdm{p}); }
  static DriverModel constant_velocity() { return DriverModel(ConstantVelocity{}); }
  static DriverModel constant_acceleration(double a)
  {
    detail::require_finite(a, "constant acceleration");
    return DriverModel(ConstantAcceleration{a});
  }

  template <class Rng>
  double act(const EgoObservation & ego, Rng & rng) const
  {
    return std::visit(
      [&](const auto & m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, StochasticIdm>) {
          return sample_acceleration(
            idm_acceleration(ego, m.params.idm()), m.params.sigma_idm(), rng);
        } else if constexpr (std::is_same_v<M, DeterministicIdm>) {
          return idm_acceleration(ego, m.params);
        } else if constexpr (std::is_same_v<M, ConstantVelocity>) {
          return 0.0;
        } else {
          return m.acceleration;
        }
      },
      model_);
  }

  /// Same model with the noise removed (stochastic IDM becomes its deterministic mean).
  DriverModel mean_only() const
  {
    if (const auto * s = std::get_if<StochasticIdm>(&model_)) {
      return deterministic_idm(s->params.idm());
    }
    return *this;
  }

  bool is_idm() const
  {
    return std::holds_alternative<StochasticIdm>(model_) ||
           std::holds_alternative<DeterministicIdm>(model_);
  }

  std::string describe() const
  {
    return std::visit(
      [](const auto & m) -> std::string {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, StochasticIdm>) {
          return "stochastic_idm(v_des=" + std::to_string(m.params.idm().v_des()) +
                 ", sigma=" + std::to_string(m.params.sigma_idm()) + ")";
        } else if constexpr (std::is_same_v<M, DeterministicIdm>) {
          return "idm(v_des=" + std::to_string(m.params.v_des()) + ")";
        } else if constexpr (std::is_same_v<M, ConstantVelocity>) {
          return "const_vel";
        } else {
          return "const_acc(" + std::to_string(m.acceleration) + ")";
        }
      },
      model_);
  }

  const Variant & variant() const noexcept { return model_; }

private:
  explicit DriverModel(Variant v) : model_(std::move(v)) {}

  Variant model_;
};

// ---------------------------------------------------------------------------
// Presets

inline constexpr double kConstantAcceleration = 1.0;

/// Motorway defaults: v_des 30, tau 1.0, d_min 2, a_max 3, b_pref 2.
inline IdmParams default_preset() { return {30.0, 2.0, 1.0, 3.0, 2.0}; }

/// Offline least-squares fit: v_des 17.837, tau 0.918, d_min 5.249, a_max 0.758, b_pref 3.811.
inline IdmParams nonlinear_fit_preset() { return {17.837, 5.249, 0.918, 0.758, 3.811}; }

inline IdmParams builtin_preset(std::string_view name)
{
  if (name == "default") {
    return default_preset();
  }
  if (name == "nonlinear_fit") {
    return nonlinear_fit_preset();
  }
  throw ConfigError("unknown IDM preset '" + std::string(name) + "'");
}

}  // namespace idmpf

#endif  // IDMPF__MODELS_HPP_
