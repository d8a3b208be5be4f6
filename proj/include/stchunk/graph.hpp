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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stchunk {

using EntityId = std::uint64_t;
using Timestep = std::uint32_t;    // 1-based snapshot index
using InstanceId = std::uint32_t;  // dense, snapshot-major, entity-ascending

/// One entity's presence at one timestep.
struct VertexInstance {
  EntityId entity = 0;
  Timestep t = 0;

  friend auto operator<=>(const VertexInstance&, const VertexInstance&) = default;
};

/// Undirected same-snapshot edge, stored with u < v.
struct SpatialEdge {
  InstanceId u = 0;
  InstanceId v = 0;
};

/// Consecutive presences of one entity; earlier.t < later.t.
struct TemporalLink {
  InstanceId earlier = 0;
  InstanceId later = 0;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the text loader; carries the 1-based offending line.
class ParseError : public GraphError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : GraphError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Raw edge record as it appears in input: endpoints named by entity.
struct EdgeRecord {
  Timestep t = 0;
  EntityId u = 0;
  EntityId v = 0;
};

/// Immutable dynamic graph {G_1..G_T}.
///
/// Vertex instances are numbered snapshot by snapshot, ascending entity id
/// inside a snapshot, so the dense id of v_{i,t} equals sum_{tau<t}|V_tau| + i.
/// Temporal links join consecutive presences of an entity and span gaps
/// (presence at t=1 and t=3 yields the link 1->3).
class DynamicGraph {
 public:
  DynamicGraph() = default;

  /// Validates and indexes the parts. Duplicate spatial edges collapse into
  /// one. Throws GraphError on duplicate presences, out-of-range timesteps,
  /// self loops or edges whose endpoints are not present at that timestep.
  static DynamicGraph build(Timestep num_snapshots, std::uint32_t feature_dim,
                            std::vector<VertexInstance> vertices,
                            std::span<const EdgeRecord> edges);

  Timestep num_snapshots() const { return num_snapshots_; }
  std::uint32_t feature_dim() const { return feature_dim_; }
  std::size_t num_instances() const { return instances_.size(); }
  std::size_t num_entities() const { return entity_ids_.size(); }
  std::size_t num_spatial_edges() const { return edges_.size(); }

  const VertexInstance& instance(InstanceId id) const { return instances_[id]; }
  std::span<const VertexInstance> instances() const { return instances_; }

  std::optional<InstanceId> find(const VertexInstance& v) const;
  /// Throws GraphError when v is not part of the graph.
  InstanceId id_of(const VertexInstance& v) const;

  /// Instances of snapshot t occupy [snapshot_begin(t), snapshot_end(t)).
  InstanceId snapshot_begin(Timestep t) const { return snapshot_offsets_[t - 1]; }
  InstanceId snapshot_end(Timestep t) const { return snapshot_offsets_[t]; }
  std::size_t snapshot_size(Timestep t) const { return snapshot_end(t) - snapshot_begin(t); }

  std::span<const SpatialEdge> spatial_edges() const { return edges_; }
  std::span<const TemporalLink> temporal_links() const { return links_; }
  std::span<const InstanceId> spatial_adjacency(InstanceId id) const {
    return {adjacency_.data() + adjacency_offsets_[id],
            adjacency_.data() + adjacency_offsets_[id + 1]};
  }

  /// Dense entity index of an instance; entities are numbered by ascending id.
  std::uint32_t entity_index(InstanceId id) const { return entity_of_instance_[id]; }
  EntityId entity_id(std::uint32_t entity_index) const { return entity_ids_[entity_index]; }
  /// All instances of one entity in timestep order.
  std::span<const InstanceId> sequence(std::uint32_t entity_index) const {
    return {sequence_members_.data() + sequence_offsets_[entity_index],
            sequence_members_.data() + sequence_offsets_[entity_index + 1]};
  }
  /// Position of the instance inside its entity sequence (0-based).
  std::uint32_t sequence_position(InstanceId id) const { return sequence_position_[id]; }

  std::optional<InstanceId> previous_presence(InstanceId id) const;
  std::optional<InstanceId> next_presence(InstanceId id) const;

  /// Same-snapshot edge-adjacent instances.
  std::vector<VertexInstance> neighbors_spatial(const VertexInstance& v) const;
  /// Every other instance of v.entity, ascending t.
  std::vector<VertexInstance> neighbors_temporal(const VertexInstance& v) const;

 private:
  Timestep num_snapshots_ = 0;
  std::uint32_t feature_dim_ = 0;
  std::vector<VertexInstance> instances_;
  std::vector<InstanceId> snapshot_offsets_;
  std::vector<SpatialEdge> edges_;
  std::vector<TemporalLink> links_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<InstanceId> adjacency_;
  std::vector<EntityId> entity_ids_;
  std::vector<std::uint32_t> entity_of_instance_;
  std::vector<std::size_t> sequence_offsets_;
  std::vector<InstanceId> sequence_members_;
  std::vector<std::uint32_t> sequence_position_;
};

/// Parses the `dg` edge-list text format.
DynamicGraph load_graph(const std::filesystem::path& path);
DynamicGraph parse_graph(std::string_view text);

/// Canonical text form: header, presences sorted by (t, entity), edges by (t, u, v).
std::string format_graph(const DynamicGraph& g);
void save_graph(const DynamicGraph& g, const std::filesystem::path& path);

}  // namespace stchunk
