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

#include "stchunk/messages.hpp"

#include <algorithm>

namespace stchunk {

std::uint64_t total_message_bytes(const DynamicGraph& g, const ModelProfile& profile) {
  std::uint64_t total = 0;
  for_each_message_link(g, profile, [&](const MessageLink& m) { total += m.total(); });
  return total;
}

std::vector<std::uint32_t> profile_layer_dims(const ModelProfile& profile) {
  auto layers = profile.blocks * (profile.spatial_msgs_per_block + profile.temporal_msgs_per_block);
  return std::vector<std::uint32_t>(layers, profile.embedding_dim);
}

UnitAnalyzer::UnitAnalyzer(const DynamicGraph& g, const ModelProfile& profile)
    : g_(&g), profile_(profile), inside_(g.num_instances(), 0) {}

void UnitAnalyzer::mark(std::span<const InstanceId> members, bool on) {
  for (auto v : members) inside_[v] = on ? 1 : 0;
}

ChunkStats UnitAnalyzer::stats(std::span<const InstanceId> members) {
  const auto& g = *g_;
  ChunkStats s;
  s.n_vertices = members.size();
  s.feature_dim = g.feature_dim();
  s.layer_dims = profile_layer_dims(profile_);

  mark(members, true);
  std::uint64_t incident = 0;
  std::uint64_t internal_ends = 0;
  for (auto v : members) {
    for (auto w : g.spatial_adjacency(v)) {
      ++incident;
      if (inside_[w]) ++internal_ends;
    }
    if (profile_.temporal_fanout == TemporalFanout::previous_only) {
      s.total_sequence_length += 1 + (g.sequence_position(v) > 0 ? 1 : 0);
    } else {
      s.total_sequence_length += g.sequence(g.entity_index(v)).size();
    }
  }
  mark(members, false);
  // Internal edges were seen from both ends.
  s.n_edges = incident - internal_ends / 2;
  return s;
}

std::vector<InstanceId> UnitAnalyzer::halo(std::span<const InstanceId> members, bool spatial, bool temporal) {
  const auto& g = *g_;
  mark(members, true);
  std::vector<InstanceId> out;
  for (auto v : members) {
    if (spatial) {
      for (auto w : g.spatial_adjacency(v)) {
        if (!inside_[w]) out.push_back(w);
      }
    }
    if (!temporal) continue;
    if (profile_.temporal_fanout == TemporalFanout::previous_only) {
      if (auto p = g.previous_presence(v); p && !inside_[*p]) out.push_back(*p);
    } else {
      for (auto w : g.sequence(g.entity_index(v))) {
        if (w != v && !inside_[w]) out.push_back(w);
      }
    }
  }
  mark(members, false);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace stchunk
