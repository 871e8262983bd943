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
#include "qcl/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

void KeyValueDoc::set(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}
void KeyValueDoc::set(const std::string& key, double value) { set(key, fmt_double(value)); }
void KeyValueDoc::set(const std::string& key, std::uint64_t value) {
  set(key, std::to_string(value));
}
void KeyValueDoc::set(const std::string& key, long value) { set(key, std::to_string(value)); }

const std::string* KeyValueDoc::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

std::string KeyValueDoc::require(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigParseError("missing key: " + key, 0, key);
  return *v;
}

double KeyValueDoc::require_double(const std::string& key) const {
  const std::string text = require(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError("key " + key + " is not a number: " + text, 0, key);
  }
}

std::uint64_t KeyValueDoc::require_u64(const std::string& key) const {
  const std::string text = require(key);
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError("key " + key + " is not an integer: " + text, 0, key);
  }
}

void write_key_value(const KeyValueDoc& doc, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  std::string section;
  for (const auto& [key, value] : doc.entries) {
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (sec != section) {
      if (!section.empty() || !sec.empty()) out << "[" << sec << "]\n";
      section = sec;
    }
    out << name << " = " << value << "\n";
  }
}

KeyValueDoc parse_key_value_text(const std::string& text, const std::string& origin) {
  KeyValueDoc doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigParseError(origin + ": unterminated section header", lineno, t);
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError(origin + ": expected key = value", lineno, t);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw ConfigParseError(origin + ": empty key", lineno, t);
    const std::string value = trim(t.substr(eq + 1));
    doc.set(section.empty() ? key : section + "." + key, value);
  }
  return doc;
}

KeyValueDoc parse_key_value(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_key_value_text(buffer.str(), path.string());
}

void write_trajectory_csv(const TrajectoryRecord& traj, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "s,p,grad_norm\n";
  for (const auto& snap : traj.snapshots)
    out << fmt_double(snap.s) << "," << fmt_double(snap.probability) << ","
        << fmt_double(snap.grad_norm) << "\n";
}

void write_trajectory_fields_csv(const TrajectoryRecord& traj,
                                 const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const auto& snap : traj.snapshots) {
    out << fmt_double(snap.s);
    for (Eigen::Index j = 0; j < snap.field.amplitudes.size(); ++j)
      out << "," << fmt_double(snap.field.amplitudes(j));
    out << "\n";
  }
}

void write_fields_row(std::ostream& out, const Eigen::VectorXd& amplitudes) {
  for (Eigen::Index j = 0; j < amplitudes.size(); ++j) {
    if (j) out << ",";
    out << fmt_double(amplitudes(j));
  }
  out << "\n";
}

std::vector<Eigen::VectorXd> read_fields_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<Eigen::VectorXd> fields;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    Eigen::VectorXd v(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) v(j) = std::stod(cells[j]);
    fields.push_back(std::move(v));
  }
  return fields;
}

HistogramData make_histogram(const HistogramSpec& spec, const std::vector<double>& values) {
  HistogramData hist{spec, std::vector<long>(spec.bins, 0)};
  for (double v : values) {
    int bin = static_cast<int>(std::floor((v - spec.lo) / spec.width()));
    bin = std::clamp(bin, 0, spec.bins - 1);
    ++hist.counts[bin];
  }
  return hist;
}

void write_histogram_csv(const HistogramData& hist, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < hist.spec.bins; ++b)
    out << fmt_double(hist.spec.lo + b * hist.spec.width()) << ","
        << fmt_double(hist.spec.lo + (b + 1) * hist.spec.width()) << ","
        << hist.counts[b] << "\n";
}

}  // namespace qcl
