/* Copyright 2026 The QCLand Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "qcl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcl/errors.hpp"
#include "qcl/experiments.hpp"
#include "qcl/pso.hpp"

namespace qcl {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out = "qcland-out";
  std::string format = "csv";
  std::string config_path;
};

// Values resolve in three layers: built-in defaults, then the --config
// document, then explicit command-line flags.
struct ConfigOverlay {
  KeyValueDoc doc;

  void load(const std::string& path) {
    if (!path.empty()) doc = parse_key_value(path);
  }

  template <class T>
  void apply(const CLI::Option* cli_opt, const std::string& key, T& target) const {
    if (cli_opt != nullptr && cli_opt->count() > 0) return;  // flag wins
    const std::string* text = doc.find(key);
    if (!text) return;
    if constexpr (std::is_same_v<T, std::string>) {
      target = *text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (*text == "true" || *text == "1")
        target = true;
      else if (*text == "false" || *text == "0")
        target = false;
      else
        throw ConfigParseError("key " + key + " is not a boolean: " + *text, 0, key);
    } else if constexpr (std::is_floating_point_v<T>) {
      target = static_cast<T>(doc.require_double(key));
    } else {
      target = static_cast<T>(doc.require_u64(key));
    }
  }
};

void emit_result(const json& result, const std::string& format) {
  if (format == "json") {
    std::cout << result.dump(2) << "\n";
    return;
  }
  for (const auto& [key, value] : result.items()) {
    std::cout << key << ",";
    if (value.is_number_float())
      std::cout << fmt_double(value.get<double>());
    else if (value.is_string())
      std::cout << value.get<std::string>();
    else
      std::cout << value.dump();
    std::cout << "\n";
  }
}

struct ScenarioFlags {
  std::string dipole = "standard";
  int transition_initial = 1;
  int transition_final = 5;
  double total_time = 10.0;
  int intervals = 1000;
  FlowConfig flow;
  int threads = 1;

  CLI::Option* dipole_opt = nullptr;
  CLI::Option* ti_opt = nullptr;
  CLI::Option* tf_opt = nullptr;
  CLI::Option* tt_opt = nullptr;
  CLI::Option* iv_opt = nullptr;
  CLI::Option* ps_opt = nullptr;
  CLI::Option* pe_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* dp_opt = nullptr;
  CLI::Option* gf_opt = nullptr;
  CLI::Option* h0_opt = nullptr;
  CLI::Option* ms_opt = nullptr;
  CLI::Option* stride_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* cmd, int default_stride) {
    flow.snapshot_stride = default_stride;
    dipole_opt = cmd->add_option("--dipole", dipole,
                                 "Dipole scenario: standard|free|restricted");
    ti_opt = cmd->add_option("--initial-state", transition_initial, "Initial state (1-based)");
    tf_opt = cmd->add_option("--final-state", transition_final, "Final state (1-based)");
    tt_opt = cmd->add_option("--total-time", total_time, "Grid horizon T");
    iv_opt = cmd->add_option("--intervals", intervals, "Grid intervals (samples - 1)");
    ps_opt = cmd->add_option("--p-start", flow.p_start, "Common start P value");
    pe_opt = cmd->add_option("--p-end", flow.p_end, "Common end P value");
    tol_opt = cmd->add_option("--endpoint-tol", flow.endpoint_tol, "Endpoint window");
    dp_opt = cmd->add_option("--max-dp", flow.max_dp, "Largest accepted P change per step");
    gf_opt = cmd->add_option("--grad-floor", flow.grad_floor, "Stall floor on ||g||");
    h0_opt = cmd->add_option("--initial-step", flow.initial_step,
                             "Initial s step (<= 0 auto)");
    ms_opt = cmd->add_option("--max-steps", flow.max_steps, "Flow step budget");
    stride_opt = cmd->add_option("--stride", flow.snapshot_stride, "Snapshot stride");
    threads_opt = cmd->add_option("--threads", threads, "Worker threads");
  }

  void overlay(const ConfigOverlay& cfg) {
    cfg.apply(dipole_opt, "system.dipole", dipole);
    cfg.apply(ti_opt, "system.initial-state", transition_initial);
    cfg.apply(tf_opt, "system.final-state", transition_final);
    cfg.apply(tt_opt, "grid.total-time", total_time);
    cfg.apply(iv_opt, "grid.intervals", intervals);
    cfg.apply(ps_opt, "flow.p-start", flow.p_start);
    cfg.apply(pe_opt, "flow.p-end", flow.p_end);
    cfg.apply(tol_opt, "flow.endpoint-tol", flow.endpoint_tol);
    cfg.apply(dp_opt, "flow.max-dp", flow.max_dp);
    cfg.apply(gf_opt, "flow.grad-floor", flow.grad_floor);
    cfg.apply(h0_opt, "flow.initial-step", flow.initial_step);
    cfg.apply(ms_opt, "flow.max-steps", flow.max_steps);
    cfg.apply(stride_opt, "flow.snapshot-stride", flow.snapshot_stride);
    cfg.apply(threads_opt, "batch.threads", threads);
  }

  ScenarioConfig scenario(std::uint64_t seed, int runs, const std::string& label) const {
    ScenarioConfig config;
    config.dipole = dipole_scenario_from_string(dipole);
    config.master_seed = seed;
    config.transition = TransitionSpec{transition_initial, transition_final};
    config.grid = TimeGrid{total_time, intervals};
    config.flow = flow;
    config.runs = runs;
    config.threads = threads;
    config.label = label;
    return config;
  }
};

KeyValueDoc parametrization_doc(const FieldParametrization& params) {
  KeyValueDoc doc;
  for (int n = 0; n < FieldParametrization::components; ++n)
    doc.set("params.a" + std::to_string(n + 1), params.amplitudes[n]);
  for (int n = 0; n < FieldParametrization::components; ++n)
    doc.set("params.phi" + std::to_string(n + 1), params.phases[n]);
  return doc;
}

FieldParametrization parametrization_from_doc(const KeyValueDoc& doc) {
  FieldParametrization params;
  for (int n = 0; n < FieldParametrization::components; ++n) {
    params.amplitudes[n] = doc.require_double("params.a" + std::to_string(n + 1));
    params.phases[n] = doc.require_double("params.phi" + std::to_string(n + 1));
  }
  return params;
}

void append_scenario_doc(KeyValueDoc& doc, const ScenarioConfig& config, double r) {
  doc.set("system.dipole", std::string(to_string(config.dipole)));
  doc.set("system.master-seed", config.master_seed);
  doc.set("system.initial-state", static_cast<long>(config.transition.initial));
  doc.set("system.final-state", static_cast<long>(config.transition.final_state));
  doc.set("grid.total-time", config.grid.total_time);
  doc.set("grid.intervals", static_cast<long>(config.grid.intervals));
  doc.set("flow.p-start", config.flow.p_start);
  doc.set("flow.p-end", config.flow.p_end);
  doc.set("flow.endpoint-tol", config.flow.endpoint_tol);
  doc.set("flow.max-dp", config.flow.max_dp);
  doc.set("result.r", r);
}

int cmd_climb(const GlobalOpts& global, const ScenarioFlags& flags) {
  const ScenarioConfig config = flags.scenario(global.seed, 1, "climb");
  const SystemSpec system = config.system();
  Rng rng(config.run_seed(0));
  const FieldParametrization params = random_parametrization(rng);
  const SingleRunResult result =
      run_single(system, config.transition, params, config.grid, config.flow,
                 Provenance{config.run_seed(0), "climb"});

  fs::create_directories(global.out);
  const std::string tag = std::to_string(global.seed);
  write_trajectory_csv(result.trajectory, fs::path(global.out) / ("traj_" + tag + ".csv"));
  write_trajectory_fields_csv(result.trajectory,
                              fs::path(global.out) / ("traj_" + tag + "_fields.csv"));
  KeyValueDoc doc = parametrization_doc(params);
  append_scenario_doc(doc, config, result.metrics.r);
  write_key_value(doc, fs::path(global.out) / ("field_params_" + tag + ".ini"));

  emit_result(json{{"r", result.metrics.r},
                   {"d_pl", result.metrics.d_pl},
                   {"d_el", result.metrics.d_el},
                   {"s_max", result.trajectory.s_max},
                   {"steps", result.trajectory.steps},
                   {"p_first", result.trajectory.snapshots.front().probability},
                   {"p_last", result.trajectory.snapshots.back().probability},
                   {"converged", result.trajectory.converged}},
              global.format);
  return 0;
}

int cmd_batch(const GlobalOpts& global, const ScenarioFlags& flags, int runs) {
  const ScenarioConfig config = flags.scenario(global.seed, runs, "batch");
  const BatchSummary summary = run_batch(config, global.out);
  emit_result(json{{"runs", summary.aggregates.completed},
                   {"failures", summary.aggregates.failures},
                   {"r_min", summary.aggregates.r_min},
                   {"r_mean", summary.aggregates.r_mean},
                   {"r_max", summary.aggregates.r_max}},
              global.format);
  return 0;
}

int cmd_sweep(const GlobalOpts& global, const ScenarioFlags& flags, int runs) {
  ScenarioConfig base = flags.scenario(global.seed, runs, "sweep");
  const auto summaries = precision_sweep(base, global.out);
  json result;
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const std::string key = "case" + std::to_string(k + 1);
    result[key + "_p_start"] = summaries[k].config.flow.p_start;
    result[key + "_r_mean"] = summaries[k].aggregates.r_mean;
  }
  emit_result(result, global.format);
  return 0;
}

int cmd_distances(const GlobalOpts& global, const std::string& batch_dir, double q) {
  const BatchSummary summary = load_batch(batch_dir);
  const SplitDistanceReport report = split_distance_analysis(summary, q);
  write_split_distance_csv(report, global.out);
  emit_result(json{{"fraction", report.fraction},
                   {"low_mean_r", report.low.mean_r},
                   {"high_mean_r", report.high.mean_r},
                   {"low_initial_initial_mean", report.low.initial_initial.stats.mean},
                   {"low_final_final_mean", report.low.final_final.stats.mean},
                   {"low_initial_final_mean", report.low.initial_final.stats.mean},
                   {"high_initial_initial_mean", report.high.initial_initial.stats.mean},
                   {"high_final_final_mean", report.high.final_final.stats.mean},
                   {"high_initial_final_mean", report.high.initial_final.stats.mean}},
              global.format);
  return 0;
}

int cmd_straight_shot(const GlobalOpts& global, const ScenarioFlags& flags,
                      double step_fraction, double budget, bool with_climb) {
  const ScenarioConfig config = flags.scenario(global.seed, 1, "straight-shot");
  const SystemSpec system = config.system();
  Rng rng(config.run_seed(0));
  const FieldParametrization params = random_parametrization(rng);
  const ControlField trial = synthesize_field(params, config.grid);
  const ControlField start =
      normalize_to_start(system, config.transition, trial, config.flow);

  StraightShotPolicy policy;
  policy.step_fraction = step_fraction;
  policy.travel_budget = budget;
  const StraightShotResult shot = straight_shot(system, config.transition, start, policy);

  fs::create_directories(global.out);
  const std::string tag = std::to_string(global.seed);
  {
    std::ofstream out(fs::path(global.out) / ("shot_" + tag + ".csv"));
    if (!out) throw IoError("cannot write straight-shot csv");
    out << "u,p\n";
    for (std::size_t k = 0; k < shot.u_grid.size(); ++k)
      out << fmt_double(shot.u_grid[k]) << "," << fmt_double(shot.p_values[k]) << "\n";
  }

  json result{{"u_star", shot.u_star},
              {"p_star", shot.p_star},
              {"samples", shot.u_grid.size()}};
  if (with_climb) {
    const TrajectoryRecord traj =
        climb(system, config.transition, start, config.flow,
              Provenance{config.run_seed(0), "straight-shot"});
    result["r"] = compute_r(traj).r;
  }
  emit_result(result, global.format);
  return 0;
}

int cmd_separability(const GlobalOpts& global, const ScenarioFlags& flags) {
  const ScenarioConfig config = flags.scenario(global.seed, 1, "separability");
  const SystemSpec system = config.system();
  Rng rng(config.run_seed(0));
  const FieldParametrization params = random_parametrization(rng);
  const SingleRunResult run =
      run_single(system, config.transition, params, config.grid, config.flow,
                 Provenance{config.run_seed(0), "separability"});
  const SeparabilityReport report =
      separability_index(run.trajectory, system, config.transition);

  fs::create_directories(global.out);
  const std::string tag = std::to_string(global.seed);
  {
    std::ofstream out(fs::path(global.out) / ("sep_" + tag + "_gradients.csv"));
    if (!out) throw IoError("cannot write separability matrix");
    for (int i = 0; i < report.gradients.rows(); ++i) {
      for (int j = 0; j < report.gradients.cols(); ++j) {
        if (j) out << ",";
        out << fmt_double(report.gradients(i, j));
      }
      out << "\n";
    }
  }
  emit_result(json{{"r", run.metrics.r},
                   {"index", report.index},
                   {"min_cosine", report.min_cosine},
                   {"snapshots", run.trajectory.snapshots.size()}},
              global.format);
  return 0;
}

int cmd_pso(const GlobalOpts& global, const ScenarioFlags& flags, PsoConfig pso_config,
            const std::string& sense) {
  pso_config.sense =
      sense == "max" ? ObjectiveSense::kMaximize : ObjectiveSense::kMinimize;
  pso_config.seed = global.seed;
  pso_config.threads = flags.threads;

  const ScenarioConfig scenario = flags.scenario(global.seed, 1, "pso");
  const SystemSpec system = scenario.system();
  const SwarmResult result =
      run_swarm(system, scenario.transition, pso_config, scenario.flow);

  fs::create_directories(global.out);
  {
    std::ofstream out(fs::path(global.out) / "swarm.csv");
    if (!out) throw IoError("cannot write swarm.csv");
    out << "generation,particle,r,best_so_far\n";
    for (const auto& row : result.log)
      out << row.generation << "," << row.particle << "," << fmt_double(row.r) << ","
          << fmt_double(row.best_so_far) << "\n";
  }
  {
    std::ofstream out(fs::path(global.out) / "swarm_generations.csv");
    if (!out) throw IoError("cannot write swarm_generations.csv");
    out << "generation,best_r,best_so_far,diversity\n";
    for (const auto& gen : result.generations)
      out << gen.generation << "," << fmt_double(gen.best_r) << ","
          << fmt_double(gen.best_so_far) << "," << fmt_double(gen.diversity) << "\n";
  }
  KeyValueDoc doc =
      parametrization_doc(position_to_parametrization(result.best_position));
  append_scenario_doc(doc, scenario, result.best_r);
  write_key_value(doc, fs::path(global.out) / "params_best.ini");

  emit_result(json{{"sense", sense},
                   {"best_r", result.best_r},
                   {"generations", pso_config.generations},
                   {"swarm_size", pso_config.swarm_size},
                   {"failures", result.failures}},
              global.format);
  return 0;
}

int cmd_replay(const GlobalOpts& global, const std::string& params_path) {
  const KeyValueDoc doc = parse_key_value(params_path);
  const FieldParametrization params = parametrization_from_doc(doc);

  ScenarioConfig config;
  config.dipole = dipole_scenario_from_string(doc.require("system.dipole"));
  config.master_seed = doc.require_u64("system.master-seed");
  config.transition.initial = static_cast<int>(doc.require_u64("system.initial-state"));
  config.transition.final_state =
      static_cast<int>(doc.require_u64("system.final-state"));
  config.grid.total_time = doc.require_double("grid.total-time");
  config.grid.intervals = static_cast<int>(doc.require_u64("grid.intervals"));
  config.flow.p_start = doc.require_double("flow.p-start");
  config.flow.p_end = doc.require_double("flow.p-end");
  config.flow.endpoint_tol = doc.require_double("flow.endpoint-tol");
  config.flow.max_dp = doc.require_double("flow.max-dp");
  config.flow.snapshot_stride = 1;

  const SystemSpec system = config.system();
  const SingleRunResult result =
      run_single(system, config.transition, params, config.grid, config.flow,
                 Provenance{config.master_seed, "replay"});
  const double logged = doc.require_double("result.r");
  emit_result(json{{"r", result.metrics.r},
                   {"logged_r", logged},
                   {"difference", std::abs(result.metrics.r - logged)}},
              global.format);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Gradient-flow climbs of quantum control landscapes and"
               " path-straightness analysis"};
  app.require_subcommand(1);

  GlobalOpts global;
  app.add_option("--seed", global.seed, "Master seed")->capture_default_str();
  app.add_option("--out", global.out, "Output directory")->capture_default_str();
  app.add_option("--format", global.format, "Result format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--config", global.config_path, "Key-value config document");
  app.fallthrough();

  ScenarioFlags climb_flags, batch_flags, sweep_flags, shot_flags, sep_flags, pso_flags;

  CLI::App* climb_cmd = app.add_subcommand("climb", "One trajectory with full snapshots");
  climb_flags.attach(climb_cmd, 1);

  CLI::App* batch_cmd = app.add_subcommand("batch", "Seeded batch of climbs");
  int batch_runs = 200;
  CLI::Option* batch_runs_opt = batch_cmd->add_option("--runs", batch_runs, "Run count");
  batch_flags.attach(batch_cmd, 5);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep-precision", "The four endpoint-precision cases");
  int sweep_runs = 100;
  CLI::Option* sweep_runs_opt = sweep_cmd->add_option("--runs", sweep_runs, "Runs per case");
  sweep_flags.attach(sweep_cmd, 5);

  CLI::App* dist_cmd = app.add_subcommand("distances", "Low/high-R distance split");
  std::string dist_batch;
  double dist_q = 0.25;
  dist_cmd->add_option("--batch", dist_batch, "Batch directory")->required();
  dist_cmd->add_option("--q", dist_q, "Subset fraction")->capture_default_str();

  CLI::App* shot_cmd =
      app.add_subcommand("straight-shot", "March along the initial gradient");
  double shot_fraction = 1.0 / 200.0;
  double shot_budget = 60.0;
  bool shot_with_climb = false;
  shot_cmd->add_option("--step-fraction", shot_fraction, "Field step per sample");
  shot_cmd->add_option("--budget", shot_budget, "Travel budget in start-norm units");
  shot_cmd->add_flag("--with-climb", shot_with_climb, "Also climb and report R");
  shot_flags.attach(shot_cmd, 1);

  CLI::App* sep_cmd = app.add_subcommand("separability", "Gradient rank-one diagnosis");
  sep_flags.attach(sep_cmd, 1);

  CLI::App* pso_cmd = app.add_subcommand("pso", "Swarm search over initial fields");
  PsoConfig pso_config;
  std::string pso_sense = "min";
  pso_cmd->add_option("--sense", pso_sense, "Objective sense: min|max")
      ->check(CLI::IsMember({"min", "max"}));
  CLI::Option* pso_swarm_opt =
      pso_cmd->add_option("--swarm", pso_config.swarm_size, "Swarm size");
  CLI::Option* pso_gen_opt =
      pso_cmd->add_option("--generations", pso_config.generations, "Generations");
  CLI::Option* pso_conv_opt = pso_cmd->add_flag("--conventional-cognitive",
                                                pso_config.conventional_cognitive,
                                                "Use the conventional cognitive term");
  pso_flags.attach(pso_cmd, 1);

  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a stored parametrization");
  std::string replay_params;
  replay_cmd->add_option("--params", replay_params, "params_best.ini path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      json err{{"error", "cli-parse"}, {"message", e.what()}};
      std::cerr << err.dump() << "\n";
    }
    return app.exit(e);
  }

  try {
    ConfigOverlay overlay;
    overlay.load(global.config_path);
    for (ScenarioFlags* flags :
         {&climb_flags, &batch_flags, &sweep_flags, &shot_flags, &sep_flags, &pso_flags})
      flags->overlay(overlay);
    overlay.apply(batch_runs_opt, "batch.runs", batch_runs);
    overlay.apply(sweep_runs_opt, "batch.runs", sweep_runs);
    overlay.apply(pso_swarm_opt, "pso.swarm-size", pso_config.swarm_size);
    overlay.apply(pso_gen_opt, "pso.generations", pso_config.generations);
    overlay.apply(pso_conv_opt, "pso.conventional-cognitive",
                  pso_config.conventional_cognitive);

    if (climb_cmd->parsed()) return cmd_climb(global, climb_flags);
    if (batch_cmd->parsed()) return cmd_batch(global, batch_flags, batch_runs);
    if (sweep_cmd->parsed()) return cmd_sweep(global, sweep_flags, sweep_runs);
    if (dist_cmd->parsed()) return cmd_distances(global, dist_batch, dist_q);
    if (shot_cmd->parsed())
      return cmd_straight_shot(global, shot_flags, shot_fraction, shot_budget,
                               shot_with_climb);
    if (sep_cmd->parsed()) return cmd_separability(global, sep_flags);
    if (pso_cmd->parsed()) return cmd_pso(global, pso_flags, pso_config, pso_sense);
    if (replay_cmd->parsed()) return cmd_replay(global, replay_params);
    return 1;
  } catch (const ConfigParseError& e) {
    json err{{"error", e.code()}, {"message", e.what()}, {"line", e.line}, {"key", e.key}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const Error& e) {
    json err{{"error", e.code()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err{{"error", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("qcland");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qcl
