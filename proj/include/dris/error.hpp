// Copyright 2026 The DRIS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace dris {

// Base class for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Violated precondition (bad dimension, u outside (0, x1*), origin inside
// the target, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error("domain", message) {}
};

// An iterative solver ran out of iterations. Carries the final residual.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& message, double residual)
      : Error("numerical", message + " (residual " + std::to_string(residual) +
                               ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// No sign change of h_N(u) - delta^2 could be bracketed.
class BracketingError : public Error {
 public:
  BracketingError(const std::string& message, double u_lo, double h_lo,
                  double u_hi, double h_hi)
      : Error("bracketing", message + " [h(" + std::to_string(u_lo) +
                                ")=" + std::to_string(h_lo) + ", h(" +
                                std::to_string(u_hi) +
                                ")=" + std::to_string(h_hi) + "]"),
        u_lo_(u_lo),
        h_lo_(h_lo),
        u_hi_(u_hi),
        h_hi_(h_hi) {}

  double u_lo() const noexcept { return u_lo_; }
  double h_lo() const noexcept { return h_lo_; }
  double u_hi() const noexcept { return u_hi_; }
  double h_hi() const noexcept { return h_hi_; }

 private:
  double u_lo_, h_lo_, u_hi_, h_hi_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("config", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace dris
