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
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stchunk/cost_model.hpp"
#include "stchunk/graph.hpp"

namespace stchunk {

using ChunkId = std::uint32_t;
using DeviceId = std::uint32_t;
using DeviceMap = std::vector<DeviceId>;  // indexed by InstanceId

class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Chunk {
  ChunkId id = 0;
  std::vector<InstanceId> members;  // sorted
  ChunkStats stats;
  std::vector<InstanceId> halo;     // sorted, disjoint from members
};

/// Chunks plus the symmetric inter-chunk communication cost h(a, a').
class ChunkGraph {
 public:
  ChunkGraph() = default;

  /// Groups instances by chunk_of (any integer ids) and derives stats, halos
  /// and inter-chunk cost. Chunk ids are renumbered 0.. in order of each
  /// chunk's smallest member.
  static ChunkGraph from_membership(const DynamicGraph& g, const ModelProfile& profile,
                                    std::span<const std::uint64_t> chunk_of);

  std::span<const Chunk> chunks() const { return chunks_; }
  const Chunk& chunk(ChunkId id) const { return chunks_[id]; }
  std::size_t size() const { return chunks_.size(); }
  ChunkId chunk_of(InstanceId v) const { return chunk_of_[v]; }
  std::span<const ChunkId> membership() const { return chunk_of_; }

  /// h(a, b); zero for a == b and for chunks that share no messages.
  std::uint64_t inter_cost(ChunkId a, ChunkId b) const;
  /// Sparse upper triangle keyed (min, max).
  const std::map<std::pair<ChunkId, ChunkId>, std::uint64_t>& inter_cost_entries() const {
    return inter_cost_;
  }
  /// Neighbouring chunks of a with the shared cost.
  std::span<const std::pair<ChunkId, std::uint64_t>> affinity(ChunkId a) const { return affinity_[a]; }

  /// Message bytes whose endpoints share a chunk.
  std::uint64_t internal_bytes() const { return internal_bytes_; }
  /// Sum of h(a, b) over unordered pairs a < b.
  std::uint64_t inter_bytes() const;

 private:
  std::vector<Chunk> chunks_;
  std::vector<ChunkId> chunk_of_;
  std::map<std::pair<ChunkId, ChunkId>, std::uint64_t> inter_cost_;
  std::vector<std::vector<std::pair<ChunkId, std::uint64_t>>> affinity_;
  std::uint64_t internal_bytes_ = 0;
};

/// c(v_{i,t}) = sum_{tau < t} |V_tau| + i, with i the 0-based rank of the
/// entity inside snapshot t.
std::vector<std::uint64_t> init_labels(const DynamicGraph& g);

enum class UpdateSchedule {
  synchronous,  // every vertex reads the previous round's labels
  sequential,   // vertices update in id order and see earlier updates
};

std::string to_string(UpdateSchedule schedule);
UpdateSchedule schedule_from_string(const std::string& name);

/// Which same-entity instances act as propagation neighbours.
enum class TemporalTopology {
  consecutive,  // previous and next presence only
  fanout,       // every instance the profile's temporal fanout aggregates
};

std::string to_string(TemporalTopology topology);
TemporalTopology topology_from_string(const std::string& name);

struct PropagationOptions {
  std::size_t size_cap = 1;
  std::size_t max_rounds = 100;
  UpdateSchedule schedule = UpdateSchedule::sequential;
  TemporalTopology topology = TemporalTopology::fanout;
};

struct PropagationResult {
  ChunkGraph chunks;
  std::size_t rounds = 0;
  bool converged = false;
};

/// ceil(instances / (4 * n_devices)), at least 1.
std::size_t default_size_cap(std::size_t num_instances, std::uint32_t n_devices);

/// Weighted label propagation over spatial edges and virtual temporal edges
/// between consecutive presences.
///
/// Each vertex weighs every neighbouring label by the bytes its edges to that
/// label's holders would cost if cut, then adopts the heaviest label (ties:
/// smallest label id; a vertex keeps its label when it ties the best). Labels
/// already held by size_cap vertices cannot be adopted, and a round admits at
/// most size_cap - population newcomers per label (heaviest, then lowest
/// vertex id first), so no chunk ever exceeds the cap.
PropagationResult propagate(const DynamicGraph& g, const ModelProfile& profile,
                            const PropagationOptions& options);

/// Contiguous, equal-count snapshot blocks per device.
DeviceMap partition_pss(const DynamicGraph& g, std::uint32_t n_devices);
/// Contiguous, equal-count groups of entity sequences (ascending entity id).
DeviceMap partition_pts(const DynamicGraph& g, std::uint32_t n_devices);

struct HybridMap {
  DeviceMap structure;
  DeviceMap time;
};
/// PSS placement for the structure encoder, PTS placement for the time encoder.
HybridMap partition_pss_ts(const DynamicGraph& g, std::uint32_t n_devices);

}  // namespace stchunk
