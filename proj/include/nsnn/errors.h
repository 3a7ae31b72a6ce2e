// Copyright 2026 The NSNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NSNN_ERRORS_H_
#define NSNN_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsnn {

// Root of every error thrown by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector/matrix dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument outside its documented domain (negative sigma, p > 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Requested operation is not defined for this configuration.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration or flip re-simulation would exceed its guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Metric inputs with zero variance / zero norm / zero error path.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during an adversarial ascent.
class AttackError : public Error {
 public:
  using Error::Error;
};

// Non-finite training loss. Carries the 0-based epoch index.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// SDE state blew up. Carries the integrator step index.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or structurally invalid serialized document.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace nsnn

#endif  // NSNN_ERRORS_H_
