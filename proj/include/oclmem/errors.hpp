// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace oclmem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accuracy matrix is missing an entry needed by a metric.
class IncompleteMatrixError : public Error {
 public:
  using Error::Error;
};

class InvalidPreferenceError : public Error {
 public:
  using Error::Error;
};

// Non-finite or out-of-domain numeric input.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

// Budgets cannot satisfy the minimum knob floors under the capacity cap.
class InfeasibleBudgetError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Scenario / profile file problems: parse errors, schema violations,
// dangling references, failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace oclmem
