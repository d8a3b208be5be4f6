// Copyright 2026 The stchunk Authors
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
#include <span>
#include <stdexcept>
#include <vector>

#include "stchunk/partition.hpp"

namespace stchunk {

class AssignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Assignment {
  std::vector<DeviceId> device_of_chunk;       // x_a
  std::vector<std::vector<ChunkId>> queue;     // Q_m in placement order
  std::vector<double> load;                    // sum of workloads per device
  double target_load = 0.0;                    // g-bar, fixed before placement

  std::uint32_t n_devices() const { return static_cast<std::uint32_t>(queue.size()); }
};

/// Greedy score-driven placement. Chunks go in decreasing workload (ties by
/// chunk id); each lands on the device maximizing
///
///   s_m = (g_bar - load_m) * sum_{a' in Q_m} h(a, a')
///
/// with ties broken by least load, then lowest device id. g_bar is the mean
/// workload per device and stays fixed for the whole loop.
Assignment assign_chunks(const ChunkGraph& cg, std::span<const double> workloads, std::uint32_t n_devices);

/// Baseline: chunks in decreasing vertex count, each to the device that
/// currently holds the fewest vertices (ties: lowest id).
Assignment assign_by_count(const ChunkGraph& cg, std::uint32_t n_devices);

/// Expands a chunk assignment to a per-instance device map.
DeviceMap device_map(const ChunkGraph& cg, const Assignment& a);

/// max / min of per-device times. Throws AssignError on an empty list or any
/// time <= 0.
double lambda_divergence(std::span<const double> per_device_time);

}  // namespace stchunk
