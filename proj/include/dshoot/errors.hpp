/*
 * Copyright 2026 The dshoot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DSHOOT_ERRORS_HPP
#define DSHOOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dshoot {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid settings, mismatched kind/form pairing, unknown names.
class ConfigurationError : public Error {
public:
  using Error::Error;
};

/// An evaluator returned an output of the wrong shape.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Analytic derivative disagrees with central finite differences.
class DerivativeMismatchError : public Error {
public:
  using Error::Error;
};

/// Evaluation requested outside the domain of a trajectory or control.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A matrix expected to be symmetric positive-definite failed to factor.
class RankError : public Error {
public:
  using Error::Error;
};

/// Parameterization columns are (numerically) linearly dependent.
class DependentBasisError : public RankError {
public:
  using RankError::RankError;
};

/// Failure inside an initial-value solve. `time()` is where it happened.
class IntegrationError : public Error {
public:
  IntegrationError(const std::string &what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

class StepBudgetError : public IntegrationError {
public:
  using IntegrationError::IntegrationError;
};

class DivergenceError : public IntegrationError {
public:
  using IntegrationError::IntegrationError;
};

} // namespace dshoot

#endif // DSHOOT_ERRORS_HPP
