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

#include "stchunk/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace stchunk {

DynamicGraph DynamicGraph::build(Timestep num_snapshots, std::uint32_t feature_dim,
                                 std::vector<VertexInstance> vertices,
                                 std::span<const EdgeRecord> edges) {
  DynamicGraph g;
  g.num_snapshots_ = num_snapshots;
  g.feature_dim_ = feature_dim;

  for (const auto& v : vertices) {
    if (v.t < 1 || v.t > num_snapshots) {
      throw GraphError("vertex (" + std::to_string(v.entity) + ", " + std::to_string(v.t) +
                       ") has timestep outside [1, " + std::to_string(num_snapshots) + "]");
    }
  }
  std::sort(vertices.begin(), vertices.end(), [](const VertexInstance& a, const VertexInstance& b) {
    return a.t != b.t ? a.t < b.t : a.entity < b.entity;
  });
  auto dup = std::adjacent_find(vertices.begin(), vertices.end());
  if (dup != vertices.end()) {
    throw GraphError("duplicate vertex instance (" + std::to_string(dup->entity) + ", " +
                     std::to_string(dup->t) + ")");
  }
  g.instances_ = std::move(vertices);
  const auto n = g.instances_.size();

  g.snapshot_offsets_.assign(num_snapshots + 1, 0);
  for (const auto& v : g.instances_) ++g.snapshot_offsets_[v.t];
  for (Timestep t = 1; t <= num_snapshots; ++t) g.snapshot_offsets_[t] += g.snapshot_offsets_[t - 1];

  // Spatial edges.
  g.edges_.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.t < 1 || e.t > num_snapshots) {
      throw GraphError("edge at timestep " + std::to_string(e.t) + " outside [1, " +
                       std::to_string(num_snapshots) + "]");
    }
    if (e.u == e.v) {
      throw GraphError("self loop on entity " + std::to_string(e.u) + " at t=" +
                       std::to_string(e.t));
    }
    auto u = g.find({e.u, e.t});
    auto v = g.find({e.v, e.t});
    if (!u || !v) {
      throw GraphError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") at t=" + std::to_string(e.t) + " references an absent vertex instance");
    }
    g.edges_.push_back({std::min(*u, *v), std::max(*u, *v)});
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [](const SpatialEdge& a, const SpatialEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end(),
                             [](const SpatialEdge& a, const SpatialEdge& b) {
                               return a.u == b.u && a.v == b.v;
                             }),
                 g.edges_.end());

  g.adjacency_offsets_.assign(n + 1, 0);
  for (const auto& e : g.edges_) {
    ++g.adjacency_offsets_[e.u + 1];
    ++g.adjacency_offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.adjacency_offsets_[i + 1] += g.adjacency_offsets_[i];
  g.adjacency_.resize(g.adjacency_offsets_[n]);
  {
    std::vector<std::size_t> fill(g.adjacency_offsets_.begin(), g.adjacency_offsets_.end() - 1);
    for (const auto& e : g.edges_) {
      g.adjacency_[fill[e.u]++] = e.v;
      g.adjacency_[fill[e.v]++] = e.u;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.adjacency_offsets_[i]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.adjacency_offsets_[i + 1]));
  }

  // Entity sequences: instance ids grouped by entity, already time-ordered
  // because ids are snapshot-major.
  g.entity_ids_.reserve(n);
  for (const auto& v : g.instances_) g.entity_ids_.push_back(v.entity);
  std::sort(g.entity_ids_.begin(), g.entity_ids_.end());
  g.entity_ids_.erase(std::unique(g.entity_ids_.begin(), g.entity_ids_.end()), g.entity_ids_.end());

  g.entity_of_instance_.resize(n);
  g.sequence_offsets_.assign(g.entity_ids_.size() + 1, 0);
  for (InstanceId i = 0; i < n; ++i) {
    auto it = std::lower_bound(g.entity_ids_.begin(), g.entity_ids_.end(), g.instances_[i].entity);
    g.entity_of_instance_[i] = static_cast<std::uint32_t>(it - g.entity_ids_.begin());
    ++g.sequence_offsets_[g.entity_of_instance_[i] + 1];
  }
  for (std::size_t k = 0; k < g.entity_ids_.size(); ++k) {
    g.sequence_offsets_[k + 1] += g.sequence_offsets_[k];
  }
  g.sequence_members_.resize(n);
  g.sequence_position_.resize(n);
  {
    std::vector<std::size_t> fill(g.sequence_offsets_.begin(), g.sequence_offsets_.end() - 1);
    for (InstanceId i = 0; i < n; ++i) {
      auto k = g.entity_of_instance_[i];
      g.sequence_position_[i] = static_cast<std::uint32_t>(fill[k] - g.sequence_offsets_[k]);
      g.sequence_members_[fill[k]++] = i;
    }
  }
  for (std::size_t k = 0; k < g.entity_ids_.size(); ++k) {
    for (auto p = g.sequence_offsets_[k] + 1; p < g.sequence_offsets_[k + 1]; ++p) {
      g.links_.push_back({g.sequence_members_[p - 1], g.sequence_members_[p]});
    }
  }
  std::sort(g.links_.begin(), g.links_.end(), [](const TemporalLink& a, const TemporalLink& b) {
    return a.earlier < b.earlier;
  });
  return g;
}

std::optional<InstanceId> DynamicGraph::find(const VertexInstance& v) const {
  if (v.t < 1 || v.t > num_snapshots_) return std::nullopt;
  auto first = instances_.begin() + snapshot_begin(v.t);
  auto last = instances_.begin() + snapshot_end(v.t);
  auto it = std::lower_bound(first, last, v.entity,
                             [](const VertexInstance& a, EntityId e) { return a.entity < e; });
  if (it == last || it->entity != v.entity) return std::nullopt;
  return static_cast<InstanceId>(it - instances_.begin());
}

InstanceId DynamicGraph::id_of(const VertexInstance& v) const {
  auto id = find(v);
  if (!id) {
    throw GraphError("unknown vertex instance (" + std::to_string(v.entity) + ", " +
                     std::to_string(v.t) + ")");
  }
  return *id;
}

std::optional<InstanceId> DynamicGraph::previous_presence(InstanceId id) const {
  auto pos = sequence_position_[id];
  if (pos == 0) return std::nullopt;
  return sequence(entity_of_instance_[id])[pos - 1];
}

std::optional<InstanceId> DynamicGraph::next_presence(InstanceId id) const {
  auto seq = sequence(entity_of_instance_[id]);
  auto pos = sequence_position_[id];
  if (pos + 1 >= seq.size()) return std::nullopt;
  return seq[pos + 1];
}

std::vector<VertexInstance> DynamicGraph::neighbors_spatial(const VertexInstance& v) const {
  std::vector<VertexInstance> out;
  for (auto w : spatial_adjacency(id_of(v))) out.push_back(instances_[w]);
  return out;
}

std::vector<VertexInstance> DynamicGraph::neighbors_temporal(const VertexInstance& v) const {
  auto id = id_of(v);
  std::vector<VertexInstance> out;
  for (auto w : sequence(entity_of_instance_[id])) {
    if (w != id) out.push_back(instances_[w]);
  }
  return out;
}

namespace {

std::uint64_t parse_uint(std::string_view token, std::size_t line, const char* what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("expected non-negative integer for ") + what + ", got '" +
                               std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    auto j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

DynamicGraph parse_graph(std::string_view text) {
  std::optional<std::pair<Timestep, std::uint32_t>> header;
  std::vector<VertexInstance> vertices;
  std::vector<std::size_t> vertex_lines;
  std::vector<EdgeRecord> edges;
  std::vector<std::size_t> edge_lines;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (tok[0] == "dg") {
      if (header) throw ParseError(line_no, "duplicate header");
      if (tok.size() != 3) throw ParseError(line_no, "header must be 'dg <T> <feature_dim>'");
      auto T = parse_uint(tok[1], line_no, "T");
      auto dim = parse_uint(tok[2], line_no, "feature_dim");
      header = {static_cast<Timestep>(T), static_cast<std::uint32_t>(dim)};
    } else if (!header) {
      throw ParseError(line_no, "record before 'dg' header");
    } else if (tok[0] == "v") {
      if (tok.size() != 3) throw ParseError(line_no, "presence must be 'v <entity> <t>'");
      VertexInstance v{parse_uint(tok[1], line_no, "entity"),
                       static_cast<Timestep>(parse_uint(tok[2], line_no, "t"))};
      if (v.t < 1 || v.t > header->first) {
        throw ParseError(line_no, "timestep " + std::to_string(v.t) + " outside [1, " +
                                      std::to_string(header->first) + "]");
      }
      vertices.push_back(v);
      vertex_lines.push_back(line_no);
    } else if (tok[0] == "e") {
      if (tok.size() != 4) throw ParseError(line_no, "edge must be 'e <t> <entity_u> <entity_v>'");
      EdgeRecord e{static_cast<Timestep>(parse_uint(tok[1], line_no, "t")),
                   parse_uint(tok[2], line_no, "entity_u"), parse_uint(tok[3], line_no, "entity_v")};
      if (e.t < 1 || e.t > header->first) {
        throw ParseError(line_no, "timestep " + std::to_string(e.t) + " outside [1, " +
                                      std::to_string(header->first) + "]");
      }
      if (e.u == e.v) throw ParseError(line_no, "self loop");
      edges.push_back(e);
      edge_lines.push_back(line_no);
    } else {
      throw ParseError(line_no, "unknown record type '" + std::string(tok[0]) + "'");
    }
  }
  if (!header) throw ParseError(line_no, "missing 'dg' header");

  // Report duplicates and dangling edges against the offending line.
  std::vector<std::size_t> order(vertices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vertices[a] < vertices[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (vertices[order[i]] == vertices[order[i - 1]]) {
      const auto& v = vertices[order[i]];
      throw ParseError(vertex_lines[order[i]], "duplicate vertex instance (" +
                                                   std::to_string(v.entity) + ", " +
                                                   std::to_string(v.t) + ")");
    }
  }
  std::vector<VertexInstance> sorted;
  sorted.reserve(vertices.size());
  for (auto i : order) sorted.push_back(vertices[i]);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    for (auto entity : {edges[k].u, edges[k].v}) {
      if (!std::binary_search(sorted.begin(), sorted.end(), VertexInstance{entity, edges[k].t})) {
        throw ParseError(edge_lines[k], "edge references absent vertex instance (" +
                                            std::to_string(entity) + ", " +
                                            std::to_string(edges[k].t) + ")");
      }
    }
  }
  return DynamicGraph::build(header->first, header->second, std::move(vertices), edges);
}

DynamicGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open graph file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_graph(buffer.str());
}

std::string format_graph(const DynamicGraph& g) {
  std::string out;
  out.reserve(32 * (g.num_instances() + g.num_spatial_edges()) + 64);
  out += "dg " + std::to_string(g.num_snapshots()) + " " + std::to_string(g.feature_dim()) + "\n";
  for (const auto& v : g.instances()) {
    out += "v " + std::to_string(v.entity) + " " + std::to_string(v.t) + "\n";
  }
  for (const auto& e : g.spatial_edges()) {
    const auto& a = g.instance(e.u);
    const auto& b = g.instance(e.v);
    out += "e " + std::to_string(a.t) + " " + std::to_string(a.entity) + " " +
           std::to_string(b.entity) + "\n";
  }
  return out;
}

void save_graph(const DynamicGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GraphError("cannot write graph file " + path.string());
  out << format_graph(g);
}

}  // namespace stchunk
