// Copyright 2026 The finqbit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Exception hierarchy shared by every finqbit module. Each class maps onto
 * one process exit code of the command-line tool.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace finqbit {

/// Exit codes used by the CLI.
enum class ExitCode : int {
    Ok = 0,
    Io = 1,
    Validation = 2,
    NonConvergence = 3,
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept {
        return ExitCode::Validation;
    }
};

/// File could not be opened, read or written.
class IoError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Io;
    }
};

/// Inputs violate a precondition (bad sizes, out-of-domain values, ...).
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Malformed text input. Carries the 1-based line number when known.
class ParseError : public ValidationError {
  public:
    ParseError(std::size_t line, const std::string &what)
        : ValidationError("line " + std::to_string(line) + ": " + what),
          line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Non-finite arguments or evaluation outside a function's domain.
class DomainError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// Black-Scholes kernels requested with T <= 0 or sigma <= 0.
class DegenerateRegime : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Register larger than the dense simulator supports.
class CapabilityError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// Optimizer diverged or exhausted its budget above tolerance.
class NonConvergence : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::NonConvergence;
    }
};

} // namespace finqbit
