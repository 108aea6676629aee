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

// Random operation sequences against CgroupTree with the invariants checked
// after every step.

#pragma once

#include <cstdint>
#include <string>

namespace agentcg::testing {

struct PropertyReport {
  std::size_t sequences = 0;
  std::size_t operations = 0;
  std::size_t oom_events = 0;
  std::size_t group_kills = 0;
  std::size_t frozen_rejections = 0;
  // Empty when every check held.
  std::string first_violation;

  bool ok() const { return first_violation.empty(); }
};

PropertyReport run_cgroup_properties(std::size_t sequences, std::size_t ops_per_sequence, std::uint64_t seed);

}  // namespace agentcg::testing
