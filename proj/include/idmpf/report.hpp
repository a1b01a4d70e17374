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

// Output writers for estimation and benchmark runs. Series are tidy CSV with columns
// (t, metric, value, model); t is seconds from the rollout start.

#ifndef IDMPF__REPORT_HPP_
#define IDMPF__REPORT_HPP_

#include "idmpf/config.hpp"
#include "idmpf/csv.hpp"
#include "idmpf/pipeline.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace idmpf::report
{

using config::Json;
using csv::format_double;

inline void write_mean_particles(std::ostream & out, const std::vector<VehicleEstimate> & estimates)
{
  out << "scenario_id,vehicle_id,status,transitions,v_des,sigma_idm\n";
  for (const auto & e : estimates) {
    out << e.scenario_id << ',' << e.vehicle_id << ',' << to_string(e.status) << ',' << e.transitions << ',';
    if (e.result) {
      out << format_double(e.result->mean.v_des) << ',' << format_double(e.result->mean.sigma_idm);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

inline void write_particles(std::ostream & out, const std::vector<VehicleEstimate> & estimates)
{
  out << "scenario_id,vehicle_id,index,v_des,sigma_idm\n";
  for (const auto & e : estimates) {
    if (!e.result) {
      continue;
    }
    const auto & ps = e.result->final_set.particles;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      out << e.scenario_id << ',' << e.vehicle_id << ',' << i << ',' << format_double(ps[i].v_des) << ','
          << format_double(ps[i].sigma_idm) << '\n';
    }
  }
}

inline void write_convergence(std::ostream & out, const std::vector<VehicleEstimate> & estimates)
{
  out << "scenario_id,vehicle_id,step,rms\n";
  for (const auto & e : estimates) {
    if (!e.result) {
      continue;
    }
    const auto & rms = e.result->trace.rms;
    for (std::size_t k = 0; k < rms.size(); ++k) {
      out << e.scenario_id << ',' << e.vehicle_id << ',' << k << ',' << format_double(rms[k]) << '\n';
    }
  }
}

/// Structured per-vehicle posterior records.
inline Json posteriors_json(
  const std::vector<VehicleEstimate> & estimates, const FilterConfig & cfg, const IdmParams & base, std::uint64_t seed)
{
  Json records = Json::array();
  for (const auto & e : estimates) {
    Json r{
      {"scenario_id", e.scenario_id}, {"vehicle_id", e.vehicle_id}, {"status", to_string(e.status)},
      {"seed", e.seed},           {"transitions", e.transitions}};
    if (!e.message.empty()) {
      r["message"] = e.message;
    }
    if (e.result) {
      r["mean"] = {{"v_des", e.result->mean.v_des}, {"sigma_idm", e.result->mean.sigma_idm}};
      Json particles = Json::array();
      for (const auto & p : e.result->final_set.particles) {
        particles.push_back({p.v_des, p.sigma_idm});
      }
      r["particles"] = std::move(particles);
      r["convergence"] = e.result->trace.rms;
    }
    records.push_back(std::move(r));
  }
  return {
    {"format", "idmpf-posteriors"},
    {"version", 1},
    {"root_seed", seed},
    {"filter", config::to_json(cfg)},
    {"preset", config::to_json(base)},
    {"vehicles", std::move(records)}};
}

namespace detail
{
/// Mean over scenarios of a per-sample series, sample by sample.
template <class Get>
std::vector<double> mean_series(const std::vector<ScenarioBenchmark> & results, const std::string & model, Get get)
{
  std::vector<double> acc;
  std::size_t n = 0;
  for (const auto & r : results) {
    for (const auto & run : r.runs) {
      if (run.model != model) {
        continue;
      }
      const auto s = get(run);
      if (acc.empty()) {
        acc.assign(s.size(), 0.0);
      }
      for (std::size_t k = 0; k < std::min(acc.size(), s.size()); ++k) {
        acc[k] += s[k];
      }
      ++n;
    }
  }
  for (auto & v : acc) {
    v /= static_cast<double>(n);
  }
  return acc;
}

template <class T>
std::vector<double> as_double(const std::vector<T> & v)
{
  return {v.begin(), v.end()};
}
}  // namespace detail

/// RMSE curves averaged over scenarios.
inline void write_rmse_series(
  std::ostream & out, const std::vector<ScenarioBenchmark> & results, const std::vector<std::string> & models, double dt)
{
  out << "t,metric,value,model\n";
  for (const auto & m : models) {
    const auto pos = detail::mean_series(results, m, [](const ModelRun & r) { return r.rmse.position; });
    const auto vel = detail::mean_series(results, m, [](const ModelRun & r) { return r.rmse.velocity; });
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const auto t = format_double(static_cast<double>(k) * dt);
      out << t << ",position_rmse," << format_double(pos[k]) << ',' << m << '\n';
      out << t << ",velocity_rmse," << format_double(vel[k]) << ',' << m << '\n';
    }
  }
}

/// Cumulative event counts averaged over scenarios.
inline void write_event_series(
  std::ostream & out, const std::vector<ScenarioBenchmark> & results, const std::vector<std::string> & models, double dt)
{
  out << "t,metric,value,model\n";
  for (const auto & m : models) {
    const auto col = detail::mean_series(
      results, m, [](const ModelRun & r) { return detail::as_double(r.events.cumulative_collisions); });
    const auto hb = detail::mean_series(
      results, m, [](const ModelRun & r) { return detail::as_double(r.events.cumulative_hard_brakes); });
    for (std::size_t k = 0; k < col.size(); ++k) {
      const auto t = format_double(static_cast<double>(k) * dt);
      out << t << ",collisions," << format_double(col[k]) << ',' << m << '\n';
      out << t << ",hard_brakes," << format_double(hb[k]) << ',' << m << '\n';
    }
  }
}

/// One row per model: end-of-horizon RMSE and event totals, mean and std across scenarios.
inline void write_table(std::ostream & out, const std::vector<ScenarioBenchmark> & results, const std::vector<std::string> & models)
{
  out << "model,scenarios,position_rmse_mean,position_rmse_std,velocity_rmse_mean,velocity_rmse_std,"
         "collisions_mean,collisions_std,hard_brakes_mean,hard_brakes_std\n";
  for (const auto & m : models) {
    const EvalReport r = model_report(results, m);
    out << m << ',' << r.scenarios.size() << ',' << format_double(r.position_rmse.mean) << ','
        << format_double(r.position_rmse.std) << ',' << format_double(r.velocity_rmse.mean) << ','
        << format_double(r.velocity_rmse.std) << ',' << format_double(r.collisions.mean) << ','
        << format_double(r.collisions.std) << ',' << format_double(r.hard_brakes.mean) << ','
        << format_double(r.hard_brakes.std) << '\n';
  }
}

/// Per-scenario rows followed by aggregate rows (scenario_id "mean" and "std").
inline void write_report_csv(
  std::ostream & out, const std::vector<ScenarioBenchmark> & results, const std::vector<std::string> & models)
{
  out << "scenario_id,model,position_rmse,velocity_rmse,collisions,hard_brakes\n";
  for (const auto & r : results) {
    for (const auto & run : r.runs) {
      const auto & s = run.score;
      out << s.scenario_id << ',' << run.model << ',' << format_double(s.position_rmse) << ','
          << format_double(s.velocity_rmse) << ',' << format_double(s.collisions) << ','
          << format_double(s.hard_brakes) << '\n';
    }
  }
  for (const auto & m : models) {
    const EvalReport e = model_report(results, m);
    out << "mean," << m << ',' << format_double(e.position_rmse.mean) << ',' << format_double(e.velocity_rmse.mean)
        << ',' << format_double(e.collisions.mean) << ',' << format_double(e.hard_brakes.mean) << '\n';
    out << "std," << m << ',' << format_double(e.position_rmse.std) << ',' << format_double(e.velocity_rmse.std)
        << ',' << format_double(e.collisions.std) << ',' << format_double(e.hard_brakes.std) << '\n';
  }
}

inline Json report_json(const std::vector<ScenarioBenchmark> & results, const std::vector<std::string> & models)
{
  auto ms = [](const MeanStd & m) { return Json{{"mean", m.mean}, {"std", m.std}}; };
  Json aggregate = Json::object();
  for (const auto & m : models) {
    const EvalReport e = model_report(results, m);
    aggregate[m] = {
      {"scenarios", e.scenarios.size()},
      {"position_rmse", ms(e.position_rmse)},
      {"velocity_rmse", ms(e.velocity_rmse)},
      {"collisions", ms(e.collisions)},
      {"hard_brakes", ms(e.hard_brakes)}};
  }
  Json scenarios = Json::array();
  for (const auto & r : results) {
    Json per_model = Json::object();
    for (const auto & run : r.runs) {
      per_model[run.model] = {
        {"position_rmse", run.score.position_rmse},
        {"velocity_rmse", run.score.velocity_rmse},
        {"collisions", run.score.collisions},
        {"hard_brakes", run.score.hard_brakes}};
    }
    scenarios.push_back(
      {{"scenario_id", r.scenario_id}, {"targets", r.targets}, {"models", std::move(per_model)}, {"warnings", r.warnings}});
  }
  return {{"format", "idmpf-report"}, {"version", 1}, {"aggregate", std::move(aggregate)}, {"scenarios", std::move(scenarios)}};
}

}  // namespace idmpf::report

#endif  // IDMPF__REPORT_HPP_
