// Copyright 2026 The idmpf Authors
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

#ifndef IDMPF__ERRORS_HPP_
#define IDMPF__ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idmpf
{

/// A model quantity left its mathematical domain (non-finite value, non-positive gap, ...).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// Invalid configuration: bad ranges, unknown preset, unmapped column.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that violates a contract (non-uniform dt, missing frames, short replay data).
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// CSV schema violation; carries the 1-based line number of the offending row.
class ParseError : public InputError
{
public:
  ParseError(std::size_t line, const std::string & what)
  : InputError("line " + std::to_string(line) + ": " + what), line_(line)
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class LookupError : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

/// Every particle weight vanished (or went non-finite) in one filter step.
class FilterDegeneracy : public std::runtime_error
{
public:
  struct Diagnostic
  {
    double x_true_next = 0.0;
    double ego_speed = 0.0;
    double max_log_weight = 0.0;
    double min_log_weight = 0.0;
  };

  FilterDegeneracy(const std::string & what, Diagnostic diagnostic)
  : std::runtime_error(what), diagnostic_(diagnostic)
  {
  }

  const Diagnostic & diagnostic() const noexcept { return diagnostic_; }

private:
  Diagnostic diagnostic_;
};

}  // namespace idmpf

#endif  // IDMPF__ERRORS_HPP_
