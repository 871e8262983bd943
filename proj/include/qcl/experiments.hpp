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
#ifndef QCL_EXPERIMENTS_HPP
#define QCL_EXPERIMENTS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qcl/io.hpp"
#include "qcl/metrics.hpp"

namespace qcl {

/// One reproducible batch of normalize-and-climb runs. Every run draws its
/// field parameters from a seed derived from (master_seed, run index), and
/// the dipole sign pattern is drawn once per batch from the master seed,
/// so any run is reproducible in isolation.
struct ScenarioConfig {
  DipoleScenario dipole = DipoleScenario::kStandard;
  std::uint64_t master_seed = 1;
  TransitionSpec transition{1, 5};
  TimeGrid grid{};
  FlowConfig flow = bulk_flow_defaults();
  int runs = 200;
  int threads = 1;
  std::string label;

  /// Bulk statistics keep every 5th snapshot; analysis climbs use stride 1.
  static FlowConfig bulk_flow_defaults() {
    FlowConfig f;
    f.snapshot_stride = 5;
    return f;
  }

  void validate() const;
  SystemSpec system() const;
  std::uint64_t run_seed(long run) const;
};

/// The four endpoint-precision cases: (0.01, 0.99) through
/// (0.00001, 0.99999).
std::vector<std::pair<double, double>> precision_cases();

struct RunRow {
  long run = 0;
  std::uint64_t seed = 0;
  double r = 0.0;
  double d_pl = 0.0;
  double d_el = 0.0;
  double s_max = 0.0;
  long steps = 0;
  bool converged = false;
};

struct FailureRow {
  long run = 0;
  std::uint64_t seed = 0;
  std::string code;
};

struct BatchAggregates {
  double r_min = 0.0;
  double r_mean = 0.0;
  double r_max = 0.0;
  long completed = 0;
  long failures = 0;
};

struct BatchSummary {
  ScenarioConfig config;
  std::vector<RunRow> rows;
  std::vector<FailureRow> failures;
  BatchAggregates aggregates;
  HistogramData log_r_histogram;
  std::vector<ControlField> initial_fields;  // aligned with rows
  std::vector<ControlField> final_fields;
};

/// Fixed binning for the log10(R - 1) histogram so figure data is
/// reproducible: 50 bins on [-5, 0), outliers clamped into the end bins.
HistogramSpec log_r_histogram_spec();

/// Runs (or resumes) a batch, appending rows to <out>/runs.csv as they
/// complete. Initial and final fields are always persisted for distance
/// analysis. Restarting after an interruption skips completed runs and
/// produces the same files as an uninterrupted execution.
BatchSummary run_batch(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Reads a persisted batch back, recomputing the aggregates from the rows
/// and cross-checking them against the manifest.
BatchSummary load_batch(const std::filesystem::path& dir);

/// Runs the four precision cases with matched per-run seeds; each case is
/// written under <out>/case<k>/.
std::vector<BatchSummary> precision_sweep(const ScenarioConfig& base,
                                          const std::filesystem::path& out_root);

struct DistanceDistribution {
  std::vector<double> values;
  SampleStats stats;
};

struct SubsetDistances {
  std::vector<long> runs;  // row indices into the summary
  double mean_r = 0.0;
  DistanceDistribution initial_initial;
  DistanceDistribution final_final;
  DistanceDistribution initial_final;
};

struct SplitDistanceReport {
  double fraction = 0.25;
  SubsetDistances low;
  SubsetDistances high;
};

/// Pairwise-distance distributions for the lowest-R and highest-R subsets
/// (fraction q of the batch each, mirroring the 500-of-2000 split).
SplitDistanceReport split_distance_analysis(const BatchSummary& summary, double q = 0.25);

void write_split_distance_csv(const SplitDistanceReport& report,
                              const std::filesystem::path& out_dir);

/// One full normalize-and-climb run from a stored parametrization; the
/// building block shared by batches, replay, and the CLI.
struct SingleRunResult {
  ControlField initial_field;
  TrajectoryRecord trajectory;
  RMetrics metrics;
};
SingleRunResult run_single(const SystemSpec& system, const TransitionSpec& trans,
                           const FieldParametrization& params, const TimeGrid& grid,
                           const FlowConfig& flow, const Provenance& provenance = {});

}  // namespace qcl

#endif  // QCL_EXPERIMENTS_HPP
