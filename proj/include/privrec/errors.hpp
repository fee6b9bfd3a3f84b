/*
 * Copyright 2026 The privrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace privrec {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the command-line tool reports for it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
  virtual int exit_code() const noexcept { return 2; }
};

/// Bad arguments or configuration (exit code 1).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error(message) {}
  int exit_code() const noexcept override { return 1; }
};

/// Malformed or inconsistent data (exit code 2).
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(message) {}
};

/// A privacy ledger refused a charge (exit code 3).
class BudgetExhausted : public Error {
 public:
  explicit BudgetExhausted(const std::string& message) : Error(message) {}
  int exit_code() const noexcept override { return 3; }
};

}  // namespace privrec
