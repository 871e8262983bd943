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
#include "qcl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

using nlohmann::json;

json config_to_json(const ScenarioConfig& c) {
  return json{
      {"dipole", to_string(c.dipole)},
      {"master_seed", c.master_seed},
      {"transition", {c.transition.initial, c.transition.final_state}},
      {"grid", {{"total_time", c.grid.total_time}, {"intervals", c.grid.intervals}}},
      {"flow",
       {{"p_start", c.flow.p_start},
        {"p_end", c.flow.p_end},
        {"endpoint_tol", c.flow.endpoint_tol},
        {"grad_floor", c.flow.grad_floor},
        {"initial_step", c.flow.initial_step},
        {"max_dp", c.flow.max_dp},
        {"max_steps", c.flow.max_steps},
        {"snapshot_stride", c.flow.snapshot_stride}}},
      {"runs", c.runs},
      {"label", c.label},
  };
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  c.dipole = dipole_scenario_from_string(j.at("dipole").get<std::string>());
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.transition.initial = j.at("transition").at(0).get<int>();
  c.transition.final_state = j.at("transition").at(1).get<int>();
  c.grid.total_time = j.at("grid").at("total_time").get<double>();
  c.grid.intervals = j.at("grid").at("intervals").get<int>();
  const json& f = j.at("flow");
  c.flow.p_start = f.at("p_start").get<double>();
  c.flow.p_end = f.at("p_end").get<double>();
  c.flow.endpoint_tol = f.at("endpoint_tol").get<double>();
  c.flow.grad_floor = f.at("grad_floor").get<double>();
  c.flow.initial_step = f.at("initial_step").get<double>();
  c.flow.max_dp = f.at("max_dp").get<double>();
  c.flow.max_steps = f.at("max_steps").get<long>();
  c.flow.snapshot_stride = f.at("snapshot_stride").get<int>();
  c.runs = j.at("runs").get<int>();
  c.label = j.at("label").get<std::string>();
  return c;
}

void write_manifest(const std::filesystem::path& dir, const ScenarioConfig& config,
                    const std::string& status, const BatchSummary* summary) {
  json m{{"format", "qcland-batch-v1"},
         {"status", status},
         {"config", config_to_json(config)}};
  if (summary) {
    m["aggregates"] = {{"r_min", summary->aggregates.r_min},
                       {"r_mean", summary->aggregates.r_mean},
                       {"r_max", summary->aggregates.r_max},
                       {"completed", summary->aggregates.completed},
                       {"failures", summary->aggregates.failures}};
    m["histogram"] = {{"lo", summary->log_r_histogram.spec.lo},
                      {"hi", summary->log_r_histogram.spec.hi},
                      {"bins", summary->log_r_histogram.spec.bins},
                      {"counts", summary->log_r_histogram.counts}};
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << m.dump(2) << "\n";
}

json read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("missing manifest.json in " + dir.string());
  json m;
  in >> m;
  return m;
}

constexpr const char* kRunsHeader = "run,seed,r,d_pl,d_el,s_max,steps,converged";

std::string run_row_line(const RunRow& row) {
  std::ostringstream out;
  out << row.run << "," << row.seed << "," << fmt_double(row.r) << ","
      << fmt_double(row.d_pl) << "," << fmt_double(row.d_el) << ","
      << fmt_double(row.s_max) << "," << row.steps << "," << (row.converged ? 1 : 0);
  return out.str();
}

RunRow parse_run_row(const std::string& line) {
  const auto cells = split_csv_line(line);
  if (cells.size() != 8) throw IoError("malformed runs.csv row: " + line);
  RunRow row;
  row.run = std::stol(cells[0]);
  row.seed = std::stoull(cells[1]);
  row.r = std::stod(cells[2]);
  row.d_pl = std::stod(cells[3]);
  row.d_el = std::stod(cells[4]);
  row.s_max = std::stod(cells[5]);
  row.steps = std::stol(cells[6]);
  row.converged = cells[7] == "1";
  return row;
}

std::vector<std::string> read_data_lines(const std::filesystem::path& path,
                                         const std::string& expected_header) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  if (!in) return lines;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != expected_header)
        throw IoError("unexpected header in " + path.string() + ": " + line);
      continue;
    }
    lines.push_back(line);
  }
  return lines;
}

void recompute_aggregates(BatchSummary& summary) {
  std::vector<double> rs;
  rs.reserve(summary.rows.size());
  for (const auto& row : summary.rows) rs.push_back(row.r);
  const SampleStats st = sample_stats(rs);
  summary.aggregates.r_min = st.min;
  summary.aggregates.r_mean = st.mean;
  summary.aggregates.r_max = st.max;
  summary.aggregates.completed = static_cast<long>(summary.rows.size());
  summary.aggregates.failures = static_cast<long>(summary.failures.size());
  std::vector<double> logs;
  logs.reserve(rs.size());
  for (double r : rs) logs.push_back(std::log10(std::max(r - 1.0, 1e-300)));
  summary.log_r_histogram = make_histogram(log_r_histogram_spec(), logs);
}

struct RunOutcome {
  bool ok = false;
  RunRow row;
  FailureRow failure;
  ControlField initial_field;
  ControlField final_field;
};

RunOutcome execute_run(const ScenarioConfig& config, const SystemSpec& system, long run) {
  RunOutcome outcome;
  const std::uint64_t seed = config.run_seed(run);
  try {
    Rng rng(seed);
    const FieldParametrization params = random_parametrization(rng);
    const SingleRunResult result =
        run_single(system, config.transition, params, config.grid, config.flow,
                   Provenance{seed, config.label});
    outcome.ok = true;
    outcome.row = RunRow{run,
                         seed,
                         result.metrics.r,
                         result.metrics.d_pl,
                         result.metrics.d_el,
                         result.trajectory.s_max,
                         result.trajectory.steps,
                         result.trajectory.converged};
    outcome.initial_field = result.trajectory.snapshots.front().field;
    outcome.final_field = result.trajectory.snapshots.back().field;
  } catch (const Error& e) {
    outcome.ok = false;
    outcome.failure = FailureRow{run, seed, e.code()};
  }
  return outcome;
}

DistanceDistribution distance_distribution(Eigen::MatrixXd matrix, bool symmetric) {
  DistanceDistribution dist;
  if (symmetric) {
    for (int i = 0; i < matrix.rows(); ++i)
      for (int j = i + 1; j < matrix.cols(); ++j) dist.values.push_back(matrix(i, j));
  } else {
    for (int i = 0; i < matrix.rows(); ++i)
      for (int j = 0; j < matrix.cols(); ++j) dist.values.push_back(matrix(i, j));
  }
  dist.stats = sample_stats(dist.values);
  return dist;
}

SubsetDistances subset_distances(const BatchSummary& summary,
                                 const std::vector<long>& indices) {
  SubsetDistances sub;
  sub.runs = indices;
  std::vector<ControlField> initial, final_;
  double r_sum = 0.0;
  for (long idx : indices) {
    initial.push_back(summary.initial_fields[idx]);
    final_.push_back(summary.final_fields[idx]);
    r_sum += summary.rows[idx].r;
  }
  sub.mean_r = r_sum / static_cast<double>(indices.size());
  sub.initial_initial = distance_distribution(pairwise_distances(initial), true);
  sub.final_final = distance_distribution(pairwise_distances(final_), true);
  sub.initial_final = distance_distribution(cross_distances(initial, final_), false);
  return sub;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (runs < 1) throw InvalidSpecError("batch requires at least one run");
  if (threads < 1) throw InvalidSpecError("thread count must be positive");
  grid.validate();
  flow.validate();
}

SystemSpec ScenarioConfig::system() const {
  return five_level_system(dipole, derive_seed(master_seed, stream_tag("dipole")));
}

std::uint64_t ScenarioConfig::run_seed(long run) const {
  return derive_seed(master_seed, stream_tag("run-params"), static_cast<std::uint64_t>(run));
}

std::vector<std::pair<double, double>> precision_cases() {
  return {{0.01, 0.99}, {0.001, 0.999}, {0.0001, 0.9999}, {0.00001, 0.99999}};
}

HistogramSpec log_r_histogram_spec() { return HistogramSpec{-5.0, 0.0, 50}; }

SingleRunResult run_single(const SystemSpec& system, const TransitionSpec& trans,
                           const FieldParametrization& params, const TimeGrid& grid,
                           const FlowConfig& flow, const Provenance& provenance) {
  SingleRunResult result;
  result.initial_field = synthesize_field(params, grid);
  const ControlField start = normalize_to_start(system, trans, result.initial_field, flow);
  result.trajectory = climb(system, trans, start, flow, provenance);
  result.metrics = compute_r(result.trajectory, system);
  return result;
}

BatchSummary run_batch(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::filesystem::create_directories(out_dir);

  BatchSummary summary;
  summary.config = config;

  const auto runs_path = out_dir / "runs.csv";
  const auto failures_path = out_dir / "failures.csv";
  const auto initial_path = out_dir / "fields_initial.csv";
  const auto final_path = out_dir / "fields_final.csv";

  long next_run = 0;
  const bool resuming = std::filesystem::exists(runs_path);
  if (resuming) {
    const json manifest = read_manifest(out_dir);
    if (manifest.at("config") != config_to_json(config))
      throw InvalidSpecError("existing batch in " + out_dir.string() +
                             " was produced by a different configuration");
    for (const auto& line : read_data_lines(runs_path, kRunsHeader))
      summary.rows.push_back(parse_run_row(line));
    for (const auto& line : read_data_lines(failures_path, "run,seed,code")) {
      const auto cells = split_csv_line(line);
      if (cells.size() != 3) throw IoError("malformed failures.csv row: " + line);
      summary.failures.push_back(
          FailureRow{std::stol(cells[0]), std::stoull(cells[1]), cells[2]});
    }
    next_run = static_cast<long>(summary.rows.size() + summary.failures.size());
    // A crash can leave one orphan field row beyond the run log; truncate
    // the files back to the rows that runs.csv vouches for.
    auto trim_fields = [&](const std::filesystem::path& path) {
      auto fields = read_fields_csv(path);
      if (fields.size() < summary.rows.size())
        throw IoError("field file " + path.string() + " is shorter than runs.csv");
      if (fields.size() > summary.rows.size()) {
        fields.resize(summary.rows.size());
        std::ofstream rewrite(path);
        if (!rewrite) throw IoError("cannot rewrite " + path.string());
        for (const auto& v : fields) write_fields_row(rewrite, v);
      }
      return fields;
    };
    for (auto& v : trim_fields(initial_path))
      summary.initial_fields.push_back(ControlField{config.grid, std::move(v)});
    for (auto& v : trim_fields(final_path))
      summary.final_fields.push_back(ControlField{config.grid, std::move(v)});
  } else {
    write_manifest(out_dir, config, "running", nullptr);
  }

  const auto mode = resuming ? std::ios::app : std::ios::out;
  std::ofstream runs_out(runs_path, mode);
  std::ofstream failures_out(failures_path, mode);
  std::ofstream initial_out(initial_path, mode);
  std::ofstream final_out(final_path, mode);
  if (!runs_out || !failures_out || !initial_out || !final_out)
    throw IoError("cannot open batch outputs in " + out_dir.string());
  if (!resuming) {
    runs_out << kRunsHeader << "\n";
    failures_out << "run,seed,code\n";
  }

  const SystemSpec system = config.system();
  const int chunk = std::max(1, config.threads);
  std::vector<RunOutcome> outcomes(chunk);
  for (long base = next_run; base < config.runs; base += chunk) {
    const int count = static_cast<int>(std::min<long>(chunk, config.runs - base));
    if (config.threads == 1) {
      outcomes[0] = execute_run(config, system, base);
    } else {
      std::atomic<int> cursor{0};
      std::vector<std::thread> pool;
      const int workers = std::min(config.threads, count);
      for (int t = 0; t < workers; ++t)
        pool.emplace_back([&]() {
          for (int i = cursor.fetch_add(1); i < count; i = cursor.fetch_add(1))
            outcomes[i] = execute_run(config, system, base + i);
        });
      for (auto& th : pool) th.join();
    }
    for (int i = 0; i < count; ++i) {
      RunOutcome& outcome = outcomes[i];
      if (outcome.ok) {
        write_fields_row(initial_out, outcome.initial_field.amplitudes);
        write_fields_row(final_out, outcome.final_field.amplitudes);
        initial_out.flush();
        final_out.flush();
        runs_out << run_row_line(outcome.row) << "\n";
        runs_out.flush();
        summary.rows.push_back(outcome.row);
        summary.initial_fields.push_back(std::move(outcome.initial_field));
        summary.final_fields.push_back(std::move(outcome.final_field));
      } else {
        failures_out << outcome.failure.run << "," << outcome.failure.seed << ","
                     << outcome.failure.code << "\n";
        failures_out.flush();
        summary.failures.push_back(outcome.failure);
      }
    }
  }

  if (summary.rows.empty())
    throw Error("batch-empty", "no run in the batch completed successfully");
  recompute_aggregates(summary);
  write_manifest(out_dir, config, "complete", &summary);
  write_histogram_csv(summary.log_r_histogram, out_dir / "histogram.csv");
  return summary;
}

BatchSummary load_batch(const std::filesystem::path& dir) {
  const json manifest = read_manifest(dir);
  BatchSummary summary;
  summary.config = config_from_json(manifest.at("config"));

  for (const auto& line : read_data_lines(dir / "runs.csv", kRunsHeader))
    summary.rows.push_back(parse_run_row(line));
  for (const auto& line : read_data_lines(dir / "failures.csv", "run,seed,code")) {
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw IoError("malformed failures.csv row: " + line);
    summary.failures.push_back(
        FailureRow{std::stol(cells[0]), std::stoull(cells[1]), cells[2]});
  }
  for (auto& v : read_fields_csv(dir / "fields_initial.csv"))
    summary.initial_fields.push_back(ControlField{summary.config.grid, std::move(v)});
  for (auto& v : read_fields_csv(dir / "fields_final.csv"))
    summary.final_fields.push_back(ControlField{summary.config.grid, std::move(v)});
  if (summary.initial_fields.size() != summary.rows.size() ||
      summary.final_fields.size() != summary.rows.size())
    throw IoError("field files in " + dir.string() + " do not match runs.csv");

  recompute_aggregates(summary);
  if (manifest.at("status").get<std::string>() == "complete") {
    const json& agg = manifest.at("aggregates");
    const bool match = agg.at("r_min").get<double>() == summary.aggregates.r_min &&
                       agg.at("r_mean").get<double>() == summary.aggregates.r_mean &&
                       agg.at("r_max").get<double>() == summary.aggregates.r_max &&
                       agg.at("completed").get<long>() == summary.aggregates.completed &&
                       agg.at("failures").get<long>() == summary.aggregates.failures;
    if (!match)
      throw AggregateMismatchError("stored aggregates do not match the persisted rows in " +
                                   dir.string());
  }
  return summary;
}

std::vector<BatchSummary> precision_sweep(const ScenarioConfig& base,
                                          const std::filesystem::path& out_root) {
  std::vector<BatchSummary> summaries;
  const auto cases = precision_cases();
  for (std::size_t k = 0; k < cases.size(); ++k) {
    ScenarioConfig config = base;
    config.flow.p_start = cases[k].first;
    config.flow.p_end = cases[k].second;
    config.label = "case" + std::to_string(k + 1);
    summaries.push_back(run_batch(config, out_root / config.label));
  }
  return summaries;
}

SplitDistanceReport split_distance_analysis(const BatchSummary& summary, double q) {
  if (!(q > 0.0) || !(q <= 0.5))
    throw InvalidSpecError("subset fraction must lie in (0, 0.5]");
  const long n = static_cast<long>(summary.rows.size());
  if (n < 2)
    throw InvalidSpecError("subset smaller than 2; batch too small for the split analysis");
  const long m =
      std::max<long>(2, static_cast<long>(std::floor(q * static_cast<double>(n))));
  if (summary.initial_fields.size() != summary.rows.size() ||
      summary.final_fields.size() != summary.rows.size())
    throw InvalidSpecError("batch did not retain initial/final fields");

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    if (summary.rows[a].r != summary.rows[b].r) return summary.rows[a].r < summary.rows[b].r;
    return summary.rows[a].run < summary.rows[b].run;
  });

  SplitDistanceReport report;
  report.fraction = q;
  report.low = subset_distances(summary, {order.begin(), order.begin() + m});
  report.high = subset_distances(summary, {order.end() - m, order.end()});
  return report;
}

void write_split_distance_csv(const SplitDistanceReport& report,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const HistogramSpec spec{0.0, 2.0, 50};
  for (const auto& [name, subset] :
       {std::pair<const char*, const SubsetDistances&>{"low", report.low},
        std::pair<const char*, const SubsetDistances&>{"high", report.high}}) {
    std::ofstream out(out_dir / ("distances_" + std::string(name) + ".csv"));
    if (!out) throw IoError("cannot write distance csv in " + out_dir.string());
    out << "population,bin_lo,bin_hi,count\n";
    for (const auto& [pop, dist] :
         {std::pair<const char*, const DistanceDistribution&>{"initial-initial",
                                                              subset.initial_initial},
          std::pair<const char*, const DistanceDistribution&>{"final-final",
                                                              subset.final_final},
          std::pair<const char*, const DistanceDistribution&>{"initial-final",
                                                              subset.initial_final}}) {
      const HistogramData hist = make_histogram(spec, dist.values);
      for (int b = 0; b < hist.spec.bins; ++b)
        out << pop << "," << fmt_double(hist.spec.lo + b * hist.spec.width()) << ","
            << fmt_double(hist.spec.lo + (b + 1) * hist.spec.width()) << ","
            << hist.counts[b] << "\n";
    }
  }
}

}  // namespace qcl
