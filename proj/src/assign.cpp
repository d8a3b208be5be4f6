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

#include "stchunk/assign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stchunk {

namespace {

Assignment empty_assignment(std::size_t chunks, std::uint32_t n_devices) {
  if (n_devices < 1) throw AssignError("n_devices must be >= 1");
  Assignment a;
  a.device_of_chunk.assign(chunks, 0);
  a.queue.resize(n_devices);
  a.load.assign(n_devices, 0.0);
  return a;
}

}  // namespace

Assignment assign_chunks(const ChunkGraph& cg, std::span<const double> workloads, std::uint32_t n_devices) {
  if (workloads.size() != cg.size()) {
    throw AssignError("got " + std::to_string(workloads.size()) + " workloads for " + std::to_string(cg.size()) +
                      " chunks");
  }
  for (double w : workloads) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw AssignError("workloads must be finite and >= 0");
  }
  auto a = empty_assignment(cg.size(), n_devices);
  a.target_load = std::accumulate(workloads.begin(), workloads.end(), 0.0) / n_devices;

  std::vector<ChunkId> order(cg.size());
  std::iota(order.begin(), order.end(), ChunkId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ChunkId x, ChunkId y) { return workloads[x] > workloads[y]; });

  std::vector<bool> placed(cg.size(), false);
  std::vector<double> affinity(n_devices);
  for (auto c : order) {
    std::fill(affinity.begin(), affinity.end(), 0.0);
    for (auto [other, bytes] : cg.affinity(c)) {
      if (placed[other]) affinity[a.device_of_chunk[other]] += static_cast<double>(bytes);
    }
    DeviceId best = 0;
    double best_score = (a.target_load - a.load[0]) * affinity[0];
    for (DeviceId m = 1; m < n_devices; ++m) {
      double s = (a.target_load - a.load[m]) * affinity[m];
      if (s > best_score || (s == best_score && a.load[m] < a.load[best])) {
        best = m;
        best_score = s;
      }
    }
    a.device_of_chunk[c] = best;
    a.queue[best].push_back(c);
    a.load[best] += workloads[c];
    placed[c] = true;
  }
  return a;
}

Assignment assign_by_count(const ChunkGraph& cg, std::uint32_t n_devices) {
  auto a = empty_assignment(cg.size(), n_devices);
  std::vector<ChunkId> order(cg.size());
  std::iota(order.begin(), order.end(), ChunkId{0});
  std::stable_sort(order.begin(), order.end(), [&](ChunkId x, ChunkId y) {
    return cg.chunk(x).members.size() > cg.chunk(y).members.size();
  });
  double total = 0.0;
  for (auto c : order) {
    auto best = static_cast<DeviceId>(std::min_element(a.load.begin(), a.load.end()) - a.load.begin());
    a.device_of_chunk[c] = best;
    a.queue[best].push_back(c);
    a.load[best] += static_cast<double>(cg.chunk(c).members.size());
    total += static_cast<double>(cg.chunk(c).members.size());
  }
  a.target_load = total / n_devices;
  return a;
}

DeviceMap device_map(const ChunkGraph& cg, const Assignment& a) {
  if (a.device_of_chunk.size() != cg.size()) throw AssignError("assignment does not match chunk graph");
  DeviceMap map(cg.membership().size());
  for (std::size_t v = 0; v < map.size(); ++v) map[v] = a.device_of_chunk[cg.chunk_of(static_cast<InstanceId>(v))];
  return map;
}

double lambda_divergence(std::span<const double> per_device_time) {
  if (per_device_time.empty()) throw AssignError("lambda of an empty device list");
  for (double t : per_device_time) {
    if (!(t > 0.0)) throw AssignError("lambda needs strictly positive device times");
  }
  auto [lo, hi] = std::minmax_element(per_device_time.begin(), per_device_time.end());
  return *hi / *lo;
}

}  // namespace stchunk
