/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace ctrack {

/// Bad input to an operation: wrong shape, violated precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a result (non-convergence,
/// singular matrix, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite derivative hit inside an integration step.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double t) : NumericalError(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A simulation state left the admissible range.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace ctrack
