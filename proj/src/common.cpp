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

#include "agentcg/common.hpp"

#include <cctype>
#include <charconv>

namespace agentcg {

std::string_view to_string(Priority p) {
  return p == Priority::High ? "high" : "low";
}

Priority parse_priority(std::string_view s) {
  if (s == "high" || s == "HIGH" || s == "High") return Priority::High;
  if (s == "low" || s == "LOW" || s == "Low") return Priority::Low;
  throw ParseError("unknown priority '" + std::string(s) + "'");
}

Bytes parse_memory_size(std::string_view s) {
  if (s == "max") return kUnlimited;
  if (s.empty()) throw ParseError("empty memory size");
  Bytes mult = 1;
  switch (std::toupper(static_cast<unsigned char>(s.back()))) {
    case 'K': mult = kKiB; break;
    case 'M': mult = kMiB; break;
    case 'G': mult = kGiB; break;
    default: break;
  }
  if (mult != 1) s.remove_suffix(1);
  Bytes value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    throw ParseError("invalid memory size '" + std::string(s) + "'");
  }
  if (value > kUnlimited / mult) throw ParseError("memory size overflows");
  return value * mult;
}

std::string format_memory_size(Bytes b) {
  if (b == kUnlimited) return "max";
  return std::to_string(b);
}

}  // namespace agentcg
