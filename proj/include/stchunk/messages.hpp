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
#include <vector>

#include "stchunk/cost_model.hpp"
#include "stchunk/graph.hpp"

namespace stchunk {

/// A pair of instances that exchange embeddings during one epoch, with the
/// bytes sent each way. Spatial edges send both ways. Temporal traffic
/// follows the profile's fanout: consecutive presences toward the later one,
/// or every pair of an entity's instances both ways.
struct MessageLink {
  InstanceId a = 0;
  InstanceId b = 0;
  EdgeKind kind = EdgeKind::spatial;
  std::uint64_t bytes_ab = 0;
  std::uint64_t bytes_ba = 0;

  std::uint64_t total() const { return bytes_ab + bytes_ba; }
};

template <typename Visitor>
void for_each_message_link(const DynamicGraph& g, const ModelProfile& profile, Visitor&& visit) {
  const auto spatial = edge_traffic(profile, EdgeKind::spatial);
  const auto temporal = edge_traffic(profile, EdgeKind::temporal);
  for (const auto& e : g.spatial_edges()) visit(MessageLink{e.u, e.v, EdgeKind::spatial, spatial, spatial});
  if (profile.temporal_fanout == TemporalFanout::previous_only) {
    for (const auto& l : g.temporal_links()) {
      visit(MessageLink{l.earlier, l.later, EdgeKind::temporal, temporal, 0});
    }
    return;
  }
  for (std::uint32_t k = 0; k < g.num_entities(); ++k) {
    auto seq = g.sequence(k);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      for (std::size_t j = i + 1; j < seq.size(); ++j) {
        visit(MessageLink{seq[i], seq[j], EdgeKind::temporal, temporal, temporal});
      }
    }
  }
}

/// Sum of all message bytes of the graph under the profile (constant for a
/// fixed graph and profile, independent of any partition).
std::uint64_t total_message_bytes(const DynamicGraph& g, const ModelProfile& profile);

/// Per-layer widths fed to the cost model: one entry per message layer.
std::vector<std::uint32_t> profile_layer_dims(const ModelProfile& profile);

/// Computes statistics and halos of instance sets. Keeps an instance-sized
/// scratch mask so repeated queries stay linear in the set size.
class UnitAnalyzer {
 public:
  UnitAnalyzer(const DynamicGraph& g, const ModelProfile& profile);

  /// n_edges counts spatial edges with at least one endpoint inside;
  /// total_sequence_length counts, per member, itself plus the temporal
  /// neighbours it aggregates under the profile's fanout.
  ChunkStats stats(std::span<const InstanceId> members);

  /// Instances outside `members` that send embeddings to some member, sorted.
  /// The flags restrict the halo to spatial or temporal senders.
  std::vector<InstanceId> halo(std::span<const InstanceId> members, bool spatial = true, bool temporal = true);

 private:
  void mark(std::span<const InstanceId> members, bool on);

  const DynamicGraph* g_;
  ModelProfile profile_;
  std::vector<std::uint8_t> inside_;
};

}  // namespace stchunk
