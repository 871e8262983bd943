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
#ifndef QCL_ERRORS_HPP
#define QCL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qcl {

/// Base class for all qcland errors. `code()` is a stable machine-readable
/// identifier used by the CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct InvalidSpecError : Error {
  explicit InvalidSpecError(const std::string& m) : Error("invalid-spec", m) {}
};

struct NonFiniteFieldError : Error {
  explicit NonFiniteFieldError(const std::string& m) : Error("non-finite-field", m) {}
};

struct GridMismatchError : Error {
  explicit GridMismatchError(const std::string& m) : Error("grid-mismatch", m) {}
};

struct DegenerateFieldError : Error {
  explicit DegenerateFieldError(const std::string& m) : Error("degenerate-field", m) {}
};

struct ProbabilityOvershootError : Error {
  explicit ProbabilityOvershootError(const std::string& m)
      : Error("probability-overshoot", m) {}
};

/// Gradient norm fell below the stall floor before the target observable
/// value was reached. Carries the observable value at the stall point.
struct FlowStallError : Error {
  FlowStallError(const std::string& m, double p_at_stall)
      : Error("flow-stall", m), probability(p_at_stall) {}
  double probability;
};

struct StepBudgetError : Error {
  StepBudgetError(const std::string& m, double p_reached)
      : Error("step-budget-exhausted", m), probability(p_reached) {}
  double probability;
};

struct DegenerateTrajectoryError : Error {
  explicit DegenerateTrajectoryError(const std::string& m)
      : Error("degenerate-trajectory", m) {}
};

struct ZeroGradientError : Error {
  explicit ZeroGradientError(const std::string& m) : Error("zero-gradient", m) {}
};

struct NoMaximumError : Error {
  explicit NoMaximumError(const std::string& m) : Error("no-maximum-found", m) {}
};

struct ConfigParseError : Error {
  ConfigParseError(const std::string& m, int line, std::string key)
      : Error("config-parse", m), line(line), key(std::move(key)) {}
  int line;
  std::string key;
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io-failure", m) {}
};

struct AggregateMismatchError : Error {
  explicit AggregateMismatchError(const std::string& m)
      : Error("aggregate-mismatch", m) {}
};

}  // namespace qcl

#endif  // QCL_ERRORS_HPP
