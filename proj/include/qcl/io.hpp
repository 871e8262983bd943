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
#ifndef QCL_IO_HPP
#define QCL_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qcl/flow.hpp"

namespace qcl {

/// Doubles are printed with 17 significant digits so every file round-trips
/// losslessly.
std::string fmt_double(double v);

/// Minimal CSV line splitter (no quoting; our schemas never need it).
std::vector<std::string> split_csv_line(const std::string& line);

/// Ordered key -> value document with [section] headers, patterned after
/// plain INI files. Keys are stored as "section.key".
struct KeyValueDoc {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, long value);
  const std::string* find(const std::string& key) const;
  std::string require(const std::string& key) const;
  double require_double(const std::string& key) const;
  std::uint64_t require_u64(const std::string& key) const;
};

void write_key_value(const KeyValueDoc& doc, const std::filesystem::path& path);

/// Parses a key-value document; malformed lines raise ConfigParseError
/// carrying the line number and offending key/text.
KeyValueDoc parse_key_value(const std::filesystem::path& path);
KeyValueDoc parse_key_value_text(const std::string& text, const std::string& origin);

/// traj_<seed>.csv: one row (s, p, grad_norm) per snapshot.
void write_trajectory_csv(const TrajectoryRecord& traj, const std::filesystem::path& path);

/// Dense snapshot matrix: each row is s followed by the field amplitudes.
void write_trajectory_fields_csv(const TrajectoryRecord& traj,
                                 const std::filesystem::path& path);

/// One field per row.
void write_fields_row(std::ostream& out, const Eigen::VectorXd& amplitudes);
std::vector<Eigen::VectorXd> read_fields_csv(const std::filesystem::path& path);

struct HistogramSpec {
  double lo;
  double hi;
  int bins;
  double width() const { return (hi - lo) / bins; }
};

struct HistogramData {
  HistogramSpec spec;
  std::vector<long> counts;  // values outside [lo, hi) clamp into end bins
};

HistogramData make_histogram(const HistogramSpec& spec, const std::vector<double>& values);
void write_histogram_csv(const HistogramData& hist, const std::filesystem::path& path);

}  // namespace qcl

#endif  // QCL_IO_HPP
