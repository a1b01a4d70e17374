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

// idmpf command-line tool: synth, adapt, estimate, rollout, benchmark.
// Exit codes: 0 success (possibly with warnings), 2 usage or input error, 1 internal error.

#include "idmpf/idmpf.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using idmpf::config::Json;
using OrderedJson = nlohmann::ordered_json;

namespace
{

std::string sha256_file(const fs::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw idmpf::InputError("cannot open " + path.string());
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest init failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

std::ofstream open_out(const fs::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw idmpf::InputError("cannot write " + path.string());
  }
  return out;
}

void write_json(const fs::path & path, const Json & j)
{
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

struct Manifest
{
  std::string subcommand;
  Json config;
  std::uint64_t seed = 0;
  std::vector<fs::path> inputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double elapsed() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void write(const fs::path & dir, std::size_t threads) const
  {
    OrderedJson j;
    j["tool"] = "idmpf";
    j["version"] = idmpf::kVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["config"] = config;
    OrderedJson files = OrderedJson::array();
    for (const auto & p : inputs) {
      files.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
    }
    j["inputs"] = files;
    j["threads"] = threads;
    j["runtime_s"] = elapsed();
    auto out = open_out(dir / "manifest.json");
    out << j.dump(2) << '\n';
  }
};

/// Flags shared by the subcommands that read a trace.
struct RunFlags
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::size_t> particles;
  std::optional<std::string> proposal;
  std::optional<std::string> noise_model;
  std::vector<std::string> models;
  std::vector<idmpf::VehicleId> targets;
  std::optional<std::size_t> target_count;
  std::optional<std::size_t> start_sample;
  std::optional<std::string> nontarget;
  bool mean_only = false;
  std::optional<double> brake_threshold;
  std::size_t threads = idmpf::default_thread_count();
  std::string out;
  std::string input;
};

void add_filter_flags(CLI::App * cmd, RunFlags & f)
{
  cmd->add_option("--config", f.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Root seed (overrides the config)");
  cmd->add_option("--dt", f.dt, "Trace sampling interval, s (overrides the sidecar)");
  cmd->add_option("--particles", f.particles, "Particles per vehicle");
  cmd->add_option("--proposal", f.proposal, "Proposal scheme")->check(CLI::IsMember({"literal", "sweep"}));
  cmd->add_option("--noise-model", f.noise_model, "Position noise model")
    ->check(CLI::IsMember({"kinematic", "dt_squared"}));
  cmd->add_option("--threads", f.threads, "Worker threads (default: $IDMPF_THREADS or hardware)")
    ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory")->required();
}

void add_rollout_flags(CLI::App * cmd, RunFlags & f)
{
  cmd->add_option("--horizon", f.horizon, "Rollout horizon, s");
  cmd->add_option("--targets", f.targets, "Explicit target vehicle ids")->delimiter(',');
  cmd->add_option("--target-count", f.target_count, "Number of randomly selected targets per scenario");
  cmd->add_option("--start-sample", f.start_sample, "Scenario sample used as the starting scene");
  cmd->add_option("--nontarget", f.nontarget, "Non-target vehicles")
    ->check(CLI::IsMember({"replay", "deterministic_idm"}));
  cmd->add_flag("--mean-only", f.mean_only, "Roll out targets without acceleration noise");
  cmd->add_option("--brake-threshold", f.brake_threshold, "Hard-braking threshold, m/s^2 (positive)");
}

idmpf::config::RunConfig resolve(const RunFlags & f)
{
  idmpf::config::RunConfig rc;
  if (!f.config_path.empty()) {
    rc = idmpf::config::run_config_from_json(idmpf::config::read_file(f.config_path));
  }
  if (f.seed) {
    rc.seed = *f.seed;
  }
  if (f.particles) {
    rc.filter.particle_count = *f.particles;
  }
  if (f.proposal) {
    rc.filter.proposal = *f.proposal == "sweep" ? idmpf::ProposalMode::sweep : idmpf::ProposalMode::literal;
  }
  if (f.noise_model) {
    rc.filter.noise = *f.noise_model == "dt_squared" ? idmpf::NoiseModel::dt_squared : idmpf::NoiseModel::kinematic;
  }
  auto & b = rc.benchmark;
  if (!f.models.empty()) {
    b.models = f.models;
  }
  if (f.horizon) {
    b.horizon = *f.horizon;
  }
  if (!f.targets.empty()) {
    b.targets = f.targets;
  }
  if (f.target_count) {
    b.target_count = *f.target_count;
    if (f.targets.empty()) {
      b.targets.clear();
    }
  }
  if (f.start_sample) {
    b.start_sample = *f.start_sample;
  }
  if (f.nontarget) {
    b.nontarget_mode =
      *f.nontarget == "replay" ? idmpf::NonTargetMode::replay : idmpf::NonTargetMode::deterministic_idm;
  }
  if (f.mean_only) {
    b.mean_only = true;
  }
  if (f.brake_threshold) {
    b.brake_threshold = *f.brake_threshold;
  }
  rc.filter.validate();
  b.validate();
  return rc;
}

std::vector<idmpf::Scenario> load_trace(const RunFlags & f)
{
  auto trace = idmpf::read_canonical(f.input);
  if (f.dt) {
    trace.dt = *f.dt;
  }
  return idmpf::build_scenarios(trace);
}

// ---- subcommands ----

int cmd_synth(const std::string & spec_path, const std::string & out_dir, std::optional<std::uint64_t> seed,
              std::optional<double> dt, std::optional<double> horizon)
{
  Manifest manifest;
  manifest.subcommand = "synth";
  manifest.inputs.push_back(spec_path);
  idmpf::SynthSpec spec;
  {
    Json j = idmpf::config::read_file(spec_path);
    if (seed) {
      j["seed"] = *seed;
    }
    if (dt) {
      j["dt"] = *dt;
    }
    if (horizon) {
      j["horizon"] = *horizon;
    }
    spec = idmpf::config::synth_from_json(j);
  }
  const auto result = idmpf::generate_synthetic(spec);
  fs::create_directories(out_dir);
  idmpf::write_canonical(result.trace, fs::path(out_dir) / "trace.csv");
  idmpf::write_truth_csv(result.truth, fs::path(out_dir) / "truth_params.csv");
  manifest.config = idmpf::config::to_json(spec);
  manifest.seed = spec.seed;
  manifest.write(out_dir, 1);
  std::cout << "wrote " << result.trace.rows.size() << " rows, " << result.truth.size() << " followers to "
            << out_dir << '\n';
  return 0;
}

int cmd_adapt(const std::string & format, const std::string & input, const std::string & map_path,
              const std::optional<std::string> & meta, std::optional<double> dt, const std::string & out_dir)
{
  Manifest manifest;
  manifest.subcommand = "adapt";
  manifest.inputs = {input, map_path};
  if (meta) {
    manifest.inputs.emplace_back(*meta);
  }
  Json map_json = idmpf::config::read_file(map_path);
  if (dt) {
    map_json["dt"] = *dt;
  }
  const auto map = idmpf::config::column_map_from_json(map_json);
  const auto result = format == "ngsim" ? idmpf::adapt_ngsim(input, map)
                                        : idmpf::adapt_highd(input, meta ? std::optional<fs::path>(*meta) : std::nullopt, map);
  for (const auto & w : result.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  fs::create_directories(out_dir);
  idmpf::write_canonical(result.trace, fs::path(out_dir) / "trace.csv");
  manifest.config = {{"format", format}, {"column_map", map_json}, {"dt", result.trace.dt}};
  manifest.write(out_dir, 1);
  std::cout << "wrote " << result.trace.rows.size() << " rows (dt=" << result.trace.dt << " s), "
            << result.warnings.size() << " warnings\n";
  return 0;
}

int cmd_estimate(const RunFlags & f)
{
  Manifest manifest;
  manifest.subcommand = "estimate";
  manifest.inputs.push_back(f.input);
  if (!f.config_path.empty()) {
    manifest.inputs.push_back(f.config_path);
  }
  const auto rc = resolve(f);
  const auto scenarios = load_trace(f);

  std::vector<idmpf::VehicleEstimate> estimates;
  for (const auto & sc : scenarios) {
    std::vector<idmpf::VehicleId> ids;
    for (idmpf::VehicleId id : f.targets) {
      if (sc.truth.find(id) != nullptr) {
        ids.push_back(id);
      }
    }
    if (!f.targets.empty() && ids.empty()) {
      continue;
    }
    auto part = idmpf::estimate_scenario(sc, rc.filter, rc.preset, rc.seed, f.threads, ids);
    estimates.insert(estimates.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  const double runtime = manifest.elapsed();

  fs::create_directories(f.out);
  const fs::path out(f.out);
  write_json(out / "posteriors.json", idmpf::report::posteriors_json(estimates, rc.filter, rc.preset, rc.seed));
  {
    auto s = open_out(out / "mean_particles.csv");
    idmpf::report::write_mean_particles(s, estimates);
  }
  {
    auto s = open_out(out / "particles.csv");
    idmpf::report::write_particles(s, estimates);
  }
  {
    auto s = open_out(out / "convergence.csv");
    idmpf::report::write_convergence(s, estimates);
  }
  manifest.config = idmpf::config::to_json(rc);
  manifest.seed = rc.seed;
  manifest.write(out, f.threads);

  std::size_t warnings = 0;
  for (const auto & e : estimates) {
    if (e.status != idmpf::EstimateStatus::ok) {
      ++warnings;
      std::cerr << "warning: scenario " << e.scenario_id << " vehicle " << e.vehicle_id << ' '
                << idmpf::to_string(e.status) << ": " << e.message << '\n';
    }
  }
  std::cout << "estimated " << estimates.size() << " vehicles in " << std::fixed << std::setprecision(3) << runtime
            << " s (" << warnings << " warnings)\n";
  return 0;
}

std::map<std::pair<std::string, idmpf::VehicleId>, idmpf::Particle> read_posteriors(const fs::path & path)
{
  const Json j = idmpf::config::read_file(path);
  std::map<std::pair<std::string, idmpf::VehicleId>, idmpf::Particle> out;
  try {
    for (const auto & r : j.at("vehicles")) {
      if (r.at("status").get<std::string>() != "ok") {
        continue;
      }
      const auto & m = r.at("mean");
      out[{r.at("scenario_id").get<std::string>(), r.at("vehicle_id").get<idmpf::VehicleId>()}] = {
        m.at("v_des").get<double>(), m.at("sigma_idm").get<double>()};
    }
  } catch (const nlohmann::json::exception & e) {
    throw idmpf::InputError(path.string() + ": not a posteriors document: " + e.what());
  }
  return out;
}

int cmd_rollout(const RunFlags & f, const std::string & model, const std::string & posteriors)
{
  Manifest manifest;
  manifest.subcommand = "rollout";
  manifest.inputs.push_back(f.input);
  if (!f.config_path.empty()) {
    manifest.inputs.push_back(f.config_path);
  }
  auto rc = resolve(f);
  rc.benchmark.models = {model};
  rc.benchmark.validate();
  if (model == "estimated" && posteriors.empty()) {
    throw idmpf::ConfigError("model 'estimated' needs --posteriors (output of the estimate subcommand)");
  }
  std::map<std::pair<std::string, idmpf::VehicleId>, idmpf::Particle> means;
  if (!posteriors.empty()) {
    manifest.inputs.emplace_back(posteriors);
    means = read_posteriors(posteriors);
  }
  const auto scenarios = load_trace(f);

  idmpf::CanonicalTrace merged;
  Json per_scenario = Json::array();
  for (const auto & sc : scenarios) {
    auto plan = idmpf::plan_rollout(sc, rc.benchmark, rc.filter, rc.seed);
    std::map<idmpf::VehicleId, idmpf::Particle> scenario_means;
    for (const auto & [key, p] : means) {
      if (key.first == sc.id) {
        scenario_means.emplace(key.second, p);
      }
    }
    idmpf::assign_model(plan.config, model, rc.benchmark, scenario_means, plan.warnings);
    const auto window = idmpf::slice(sc.truth, rc.benchmark.start_sample, plan.config.steps() + 1);
    const auto traj = idmpf::rollout(sc.scenes[rc.benchmark.start_sample], &window, plan.config);
    const auto rows = idmpf::to_canonical(
      traj, sc.id, sc.first_frame + static_cast<std::int64_t>(rc.benchmark.start_sample));
    merged.dt = rows.dt;
    merged.rows.insert(merged.rows.end(), rows.rows.begin(), rows.rows.end());
    for (const auto & w : plan.warnings) {
      std::cerr << "warning: scenario " << sc.id << ": " << w << '\n';
    }
    per_scenario.push_back({{"scenario_id", sc.id}, {"targets", plan.targets}, {"seed", plan.config.seed}});
  }
  fs::create_directories(f.out);
  idmpf::write_canonical(merged, fs::path(f.out) / "rollout.csv");
  manifest.config = idmpf::config::to_json(rc);
  manifest.config["model"] = model;
  manifest.config["scenarios"] = per_scenario;
  manifest.seed = rc.seed;
  manifest.write(f.out, f.threads);
  std::cout << "rolled out " << scenarios.size() << " scenarios under '" << model << "'\n";
  return 0;
}

int cmd_benchmark(const RunFlags & f)
{
  Manifest manifest;
  manifest.subcommand = "benchmark";
  manifest.inputs.push_back(f.input);
  if (!f.config_path.empty()) {
    manifest.inputs.push_back(f.config_path);
  }
  const auto rc = resolve(f);
  const auto scenarios = load_trace(f);
  if (scenarios.empty()) {
    throw idmpf::InputError("trace has no scenarios");
  }
  const auto results = idmpf::benchmark_all(scenarios, rc.benchmark, rc.filter, rc.seed, f.threads);
  const double runtime = manifest.elapsed();
  const auto & models = rc.benchmark.models;
  const double dt = scenarios.front().dt;

  const fs::path out(f.out);
  fs::create_directories(out / "rollouts");
  {
    auto s = open_out(out / "rmse_series.csv");
    idmpf::report::write_rmse_series(s, results, models, dt);
  }
  {
    auto s = open_out(out / "event_series.csv");
    idmpf::report::write_event_series(s, results, models, dt);
  }
  {
    auto s = open_out(out / "table.csv");
    idmpf::report::write_table(s, results, models);
  }
  {
    auto s = open_out(out / "report.csv");
    idmpf::report::write_report_csv(s, results, models);
  }
  write_json(out / "report.json", idmpf::report::report_json(results, models));

  std::vector<idmpf::VehicleEstimate> estimates;
  std::size_t warnings = 0;
  for (const auto & r : results) {
    estimates.insert(estimates.end(), r.estimates.begin(), r.estimates.end());
    for (const auto & w : r.warnings) {
      ++warnings;
      std::cerr << "warning: scenario " << r.scenario_id << ": " << w << '\n';
    }
    for (const auto & run : r.runs) {
      idmpf::write_canonical(
        idmpf::to_canonical(run.trajectory, r.scenario_id), out / "rollouts" / (r.scenario_id + "__" + run.model + ".csv"));
    }
  }
  if (!estimates.empty()) {
    auto s = open_out(out / "mean_particles.csv");
    idmpf::report::write_mean_particles(s, estimates);
  }
  manifest.config = idmpf::config::to_json(rc);
  manifest.seed = rc.seed;
  manifest.write(out, f.threads);

  std::cout << "model,position_rmse_mean,position_rmse_std,collisions_mean,hard_brakes_mean\n";
  for (const auto & m : models) {
    const auto e = idmpf::model_report(results, m);
    std::cout << m << ',' << e.position_rmse.mean << ',' << e.position_rmse.std << ',' << e.collisions.mean << ','
              << e.hard_brakes.mean << '\n';
  }
  std::cout << "benchmarked " << results.size() << " scenarios in " << std::fixed << std::setprecision(3) << runtime
            << " s (" << warnings << " warnings)\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Per-driver parameter estimation for stochastic car-following models"};
  app.set_version_flag("--version", std::string(idmpf::kVersion));
  app.require_subcommand(1);

  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_dt, synth_horizon;
  auto * synth = app.add_subcommand("synth", "Generate a synthetic platoon trace with known parameters");
  synth->add_option("spec", synth_spec, "Synthetic spec JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Seed (overrides the spec)");
  synth->add_option("--dt", synth_dt, "Sampling interval, s (overrides the spec)");
  synth->add_option("--horizon", synth_horizon, "Duration, s (overrides the spec)");

  std::string adapt_format, adapt_input, adapt_map, adapt_out;
  std::optional<std::string> adapt_meta;
  std::optional<double> adapt_dt;
  auto * adapt = app.add_subcommand("adapt", "Convert an NGSIM-style or HighD-style export to a canonical trace");
  adapt->add_option("format", adapt_format, "Source format")->required()->check(CLI::IsMember({"ngsim", "highd"}));
  adapt->add_option("input", adapt_input, "Source CSV")->required();
  adapt->add_option("--map", adapt_map, "Column map JSON")->required();
  adapt->add_option("--meta", adapt_meta, "HighD recording metadata CSV (frameRate)");
  adapt->add_option("--dt", adapt_dt, "Sampling interval, s (overrides the map)");
  adapt->add_option("--out", adapt_out, "Output directory")->required();

  RunFlags est;
  auto * estimate = app.add_subcommand("estimate", "Estimate per-vehicle parameters with the particle filter");
  estimate->add_option("trace", est.input, "Canonical trace CSV")->required();
  add_filter_flags(estimate, est);
  estimate->add_option("--targets", est.targets, "Only estimate these vehicle ids")->delimiter(',');

  RunFlags roll;
  std::string roll_model = "default", roll_posteriors;
  auto * rollout = app.add_subcommand("rollout", "Roll a recorded scene forward under one driver model");
  rollout->add_option("trace", roll.input, "Canonical trace CSV")->required();
  add_filter_flags(rollout, roll);
  add_rollout_flags(rollout, roll);
  rollout->add_option("--model", roll_model, "Target model")
    ->check(CLI::IsMember({"estimated", "default", "nonlinear_fit", "const_vel", "const_acc"}));
  rollout->add_option("--posteriors", roll_posteriors, "posteriors.json from the estimate subcommand")
    ->check(CLI::ExistingFile);

  RunFlags bench;
  auto * benchmark = app.add_subcommand("benchmark", "Estimate, roll out and score every model");
  benchmark->add_option("trace", bench.input, "Canonical trace CSV")->required();
  add_filter_flags(benchmark, bench);
  add_rollout_flags(benchmark, bench);
  benchmark->add_option("--models", bench.models, "Models to compare")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) {
      return cmd_synth(synth_spec, synth_out, synth_seed, synth_dt, synth_horizon);
    }
    if (*adapt) {
      return cmd_adapt(adapt_format, adapt_input, adapt_map, adapt_meta, adapt_dt, adapt_out);
    }
    if (*estimate) {
      return cmd_estimate(est);
    }
    if (*rollout) {
      return cmd_rollout(roll, roll_model, roll_posteriors);
    }
    if (*benchmark) {
      return cmd_benchmark(bench);
    }
  } catch (const idmpf::ConfigError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const idmpf::InputError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const idmpf::LookupError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const idmpf::DomainError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
