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

#include "stchunk/partition.hpp"

#include <algorithm>
#include <unordered_map>

#include "stchunk/messages.hpp"

namespace stchunk {

ChunkGraph ChunkGraph::from_membership(const DynamicGraph& g, const ModelProfile& profile,
                                       std::span<const std::uint64_t> chunk_of) {
  if (chunk_of.size() != g.num_instances()) {
    throw PartitionError("membership covers " + std::to_string(chunk_of.size()) + " instances, graph has " +
                         std::to_string(g.num_instances()));
  }
  ChunkGraph cg;
  cg.chunk_of_.resize(g.num_instances());
  std::unordered_map<std::uint64_t, ChunkId> compact;
  for (InstanceId v = 0; v < g.num_instances(); ++v) {
    auto [it, fresh] = compact.try_emplace(chunk_of[v], static_cast<ChunkId>(cg.chunks_.size()));
    if (fresh) {
      cg.chunks_.emplace_back();
      cg.chunks_.back().id = it->second;
    }
    cg.chunk_of_[v] = it->second;
    cg.chunks_[it->second].members.push_back(v);
  }

  UnitAnalyzer analyzer(g, profile);
  for (auto& c : cg.chunks_) {
    c.stats = analyzer.stats(c.members);
    c.halo = analyzer.halo(c.members);
  }

  for_each_message_link(g, profile, [&](const MessageLink& m) {
    auto a = cg.chunk_of_[m.a];
    auto b = cg.chunk_of_[m.b];
    if (a == b) {
      cg.internal_bytes_ += m.total();
    } else {
      cg.inter_cost_[{std::min(a, b), std::max(a, b)}] += m.total();
    }
  });
  cg.affinity_.resize(cg.chunks_.size());
  for (const auto& [key, bytes] : cg.inter_cost_) {
    cg.affinity_[key.first].emplace_back(key.second, bytes);
    cg.affinity_[key.second].emplace_back(key.first, bytes);
  }
  for (auto& row : cg.affinity_) std::sort(row.begin(), row.end());
  return cg;
}

std::uint64_t ChunkGraph::inter_cost(ChunkId a, ChunkId b) const {
  if (a == b) return 0;
  auto it = inter_cost_.find({std::min(a, b), std::max(a, b)});
  return it == inter_cost_.end() ? 0 : it->second;
}

std::uint64_t ChunkGraph::inter_bytes() const {
  std::uint64_t total = 0;
  for (const auto& [key, bytes] : inter_cost_) total += bytes;
  return total;
}

std::vector<std::uint64_t> init_labels(const DynamicGraph& g) {
  std::vector<std::uint64_t> labels(g.num_instances());
  std::uint64_t before = 0;  // sum of |V_tau| for tau < t
  for (Timestep t = 1; t <= g.num_snapshots(); ++t) {
    std::uint64_t i = 0;
    for (InstanceId v = g.snapshot_begin(t); v < g.snapshot_end(t); ++v, ++i) labels[v] = before + i;
    before += g.snapshot_size(t);
  }
  return labels;
}

std::string to_string(UpdateSchedule schedule) {
  return schedule == UpdateSchedule::synchronous ? "synchronous" : "sequential";
}

UpdateSchedule schedule_from_string(const std::string& name) {
  if (name == "synchronous") return UpdateSchedule::synchronous;
  if (name == "sequential") return UpdateSchedule::sequential;
  throw PartitionError("unknown update schedule '" + name + "'");
}

std::string to_string(TemporalTopology topology) {
  return topology == TemporalTopology::consecutive ? "consecutive" : "fanout";
}

TemporalTopology topology_from_string(const std::string& name) {
  if (name == "consecutive") return TemporalTopology::consecutive;
  if (name == "fanout") return TemporalTopology::fanout;
  throw PartitionError("unknown temporal topology '" + name + "'");
}

std::size_t default_size_cap(std::size_t num_instances, std::uint32_t n_devices) {
  auto denom = 4 * static_cast<std::size_t>(std::max<std::uint32_t>(n_devices, 1));
  return std::max<std::size_t>(1, (num_instances + denom - 1) / denom);
}

namespace {

// Dense label-weight accumulator reused across vertices.
class LabelTally {
 public:
  explicit LabelTally(std::size_t labels) : weight_(labels, 0) {}

  void add(std::uint64_t label, std::uint64_t w) {
    if (weight_[label] == 0) touched_.push_back(label);
    weight_[label] += w;
  }
  std::uint64_t weight(std::uint64_t label) const { return weight_[label]; }
  const std::vector<std::uint64_t>& touched() const { return touched_; }
  void clear() {
    for (auto l : touched_) weight_[l] = 0;
    touched_.clear();
  }

 private:
  std::vector<std::uint64_t> weight_;
  std::vector<std::uint64_t> touched_;
};

struct Choice {
  std::uint64_t label;
  std::uint64_t weight;
};

struct Weights {
  std::uint64_t spatial;
  std::uint64_t temporal;
  bool all_instances;  // every same-entity instance is a neighbour
};

Choice choose_label(const DynamicGraph& g, InstanceId v, const std::vector<std::uint64_t>& labels,
                    const std::vector<std::size_t>& population, std::size_t cap, const Weights& weights,
                    LabelTally& tally) {
  for (auto w : g.spatial_adjacency(v)) tally.add(labels[w], weights.spatial);
  if (weights.all_instances) {
    for (auto w : g.sequence(g.entity_index(v))) {
      if (w != v) tally.add(labels[w], weights.temporal);
    }
  } else {
    if (auto p = g.previous_presence(v)) tally.add(labels[*p], weights.temporal);
    if (auto n = g.next_presence(v)) tally.add(labels[*n], weights.temporal);
  }

  const auto current = labels[v];
  Choice best{current, tally.weight(current)};
  for (auto c : tally.touched()) {
    if (c == current || population[c] >= cap) continue;
    auto w = tally.weight(c);
    if (w > best.weight || (w == best.weight && best.label != current && c < best.label)) {
      best = {c, w};
    }
  }
  tally.clear();
  return best;
}

}  // namespace

PropagationResult propagate(const DynamicGraph& g, const ModelProfile& profile,
                            const PropagationOptions& options) {
  if (options.size_cap < 1) throw PartitionError("size_cap must be >= 1");
  if (options.max_rounds < 1) throw PartitionError("max_rounds must be >= 1");
  profile.validate();

  const auto n = g.num_instances();
  const auto cap = options.size_cap;
  const Weights weights{cut_bytes(profile, EdgeKind::spatial), cut_bytes(profile, EdgeKind::temporal),
                        options.topology == TemporalTopology::fanout &&
                            profile.temporal_fanout == TemporalFanout::all_snapshots};

  auto labels = init_labels(g);
  std::vector<std::size_t> population(n, 1);
  LabelTally tally(n);

  PropagationResult result;
  struct Proposal {
    std::uint64_t label;
    std::uint64_t weight;
    InstanceId vertex;
  };
  std::vector<Proposal> proposals;

  for (std::size_t round = 1; round <= options.max_rounds; ++round) {
    std::size_t changed = 0;
    if (options.schedule == UpdateSchedule::sequential) {
      for (InstanceId v = 0; v < n; ++v) {
        auto best = choose_label(g, v, labels, population, cap, weights, tally);
        if (best.label == labels[v]) continue;
        --population[labels[v]];
        ++population[best.label];
        labels[v] = best.label;
        ++changed;
      }
    } else {
      proposals.clear();
      for (InstanceId v = 0; v < n; ++v) {
        auto best = choose_label(g, v, labels, population, cap, weights, tally);
        if (best.label != labels[v]) proposals.push_back({best.label, best.weight, v});
      }
      std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
        if (a.label != b.label) return a.label < b.label;
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.vertex < b.vertex;
      });
      // Admission against the population at the start of the round.
      std::vector<Proposal> accepted;
      for (std::size_t i = 0; i < proposals.size();) {
        auto j = i;
        while (j < proposals.size() && proposals[j].label == proposals[i].label) ++j;
        auto room = cap - population[proposals[i].label];
        for (auto k = i; k < j && k - i < room; ++k) accepted.push_back(proposals[k]);
        i = j;
      }
      for (const auto& p : accepted) {
        --population[labels[p.vertex]];
        ++population[p.label];
        labels[p.vertex] = p.label;
      }
      changed = accepted.size();
    }
    result.rounds = round;
    if (changed == 0) {
      result.converged = true;
      break;
    }
  }
  result.chunks = ChunkGraph::from_membership(g, profile, labels);
  return result;
}

DeviceMap partition_pss(const DynamicGraph& g, std::uint32_t n_devices) {
  if (n_devices < 1) throw PartitionError("n_devices must be >= 1");
  const auto T = g.num_snapshots();
  if (n_devices > T) {
    throw PartitionError("PSS needs n_devices <= snapshots (" + std::to_string(n_devices) + " > " +
                         std::to_string(T) + ")");
  }
  // Block sizes differ by at most one; earlier devices take the remainder.
  std::vector<DeviceId> device_of_snapshot(T + 1, 0);
  const auto base = T / n_devices;
  const auto extra = T % n_devices;
  Timestep t = 1;
  for (DeviceId d = 0; d < n_devices; ++d) {
    auto size = base + (d < extra ? 1 : 0);
    for (Timestep k = 0; k < size; ++k) device_of_snapshot[t++] = d;
  }
  DeviceMap map(g.num_instances());
  for (InstanceId v = 0; v < g.num_instances(); ++v) map[v] = device_of_snapshot[g.instance(v).t];
  return map;
}

DeviceMap partition_pts(const DynamicGraph& g, std::uint32_t n_devices) {
  if (n_devices < 1) throw PartitionError("n_devices must be >= 1");
  const auto entities = g.num_entities();
  if (n_devices > entities) {
    throw PartitionError("PTS needs n_devices <= entities (" + std::to_string(n_devices) + " > " +
                         std::to_string(entities) + ")");
  }
  std::vector<DeviceId> device_of_entity(entities, 0);
  const auto base = entities / n_devices;
  const auto extra = entities % n_devices;
  std::size_t k = 0;
  for (DeviceId d = 0; d < n_devices; ++d) {
    auto size = base + (d < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) device_of_entity[k++] = d;
  }
  DeviceMap map(g.num_instances());
  for (InstanceId v = 0; v < g.num_instances(); ++v) map[v] = device_of_entity[g.entity_index(v)];
  return map;
}

HybridMap partition_pss_ts(const DynamicGraph& g, std::uint32_t n_devices) {
  return {partition_pss(g, n_devices), partition_pts(g, n_devices)};
}

}  // namespace stchunk
