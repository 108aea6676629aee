// Copyright 2026 The agentcg Authors.
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

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agentcg {

// Memory quantities are carried as signed byte counts so that deltas and
// usages share one type.
using Bytes = std::int64_t;

// Virtual milliseconds. Nothing in the library reads a wall clock.
using Millis = std::int64_t;

inline constexpr Bytes kKiB = 1024;
inline constexpr Bytes kMiB = 1024 * kKiB;
inline constexpr Bytes kGiB = 1024 * kMiB;

// cgroup v2 spells this "max".
inline constexpr Bytes kUnlimited = std::numeric_limits<Bytes>::max();

constexpr Bytes mib(double v) {
  return static_cast<Bytes>(v * static_cast<double>(kMiB) + (v >= 0 ? 0.5 : -0.5));
}

constexpr double to_mib(Bytes b) {
  return static_cast<double>(b) / static_cast<double>(kMiB);
}

enum class Priority { High, Low };

std::string_view to_string(Priority p);
Priority parse_priority(std::string_view s);

// Accepts the cgroup memory-file syntax: a plain byte count, a count with a
// K/M/G suffix (binary multiples), or "max".
Bytes parse_memory_size(std::string_view s);
std::string format_memory_size(Bytes b);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed external input (trace, scenario, parameter files).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  explicit ParseError(const std::string& what) : ParseError(0, what) {}

  // 1-based line number, 0 when the error is not tied to a line.
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// A well-formed input whose values violate a documented precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An operation that the current state does not allow (charging a frozen
// cgroup, killing a dead one, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace agentcg
