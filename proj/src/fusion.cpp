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

#include "stchunk/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>

namespace stchunk {

void MemoryCoefficients::validate() const {
  for (double c : {fixed_bytes, vertex_bytes, edge_bytes, slot_bytes}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw FusionError("memory coefficients must be finite and >= 0");
  }
}

std::uint64_t FusionPlan::saved_loads() const {
  std::uint64_t total = 0;
  for (const auto& device : devices) {
    for (const auto& group : device) total += group.saved_loads;
  }
  return total;
}

std::size_t FusionPlan::group_count() const {
  std::size_t total = 0;
  for (const auto& device : devices) total += device.size();
  return total;
}

namespace {

struct UnitFootprint {
  std::uint64_t loaded = 0;
  double memory = 0.0;
};

UnitFootprint footprint(UnitAnalyzer& analyzer, std::span<const InstanceId> members,
                        const MemoryCoefficients& coeffs) {
  auto stats = analyzer.stats(members);
  auto halo = analyzer.halo(members);
  UnitFootprint f;
  f.loaded = members.size() + halo.size();
  f.memory = coeffs.fixed_bytes + coeffs.vertex_bytes * static_cast<double>(f.loaded) +
             coeffs.edge_bytes * static_cast<double>(stats.n_edges) +
             coeffs.slot_bytes * static_cast<double>(stats.total_sequence_length);
  return f;
}

}  // namespace

double unit_memory(UnitAnalyzer& analyzer, std::span<const InstanceId> members, const MemoryCoefficients& coeffs) {
  return footprint(analyzer, members, coeffs).memory;
}

std::vector<FusionGroup> fuse_device(const DynamicGraph& g, const ModelProfile& profile, const ChunkGraph& cg,
                                     std::span<const ChunkId> chunks, double memory_budget,
                                     const MemoryCoefficients& coeffs) {
  coeffs.validate();
  profile.validate();
  constexpr std::size_t kOffDevice = static_cast<std::size_t>(-1);

  // Group footprints are maintained incrementally: vertex and sequence counts
  // add up, the edge count loses the spatial edges between the two sides, and
  // the halo is the union of both halos minus the other side's members.
  struct Link {
    std::uint64_t bytes = 0;
    std::uint64_t spatial_edges = 0;
  };
  struct Group {
    std::vector<ChunkId> chunks;
    std::vector<InstanceId> halo;
    ChunkStats stats;
    std::uint64_t base_loads = 0;  // sum of the constituent chunks' own loads
    std::uint64_t fused_traffic = 0;
    std::map<std::size_t, Link> links;  // group -> inter-group bytes and spatial edges
    bool alive = true;
  };
  auto memory_of = [&](const Group& grp) {
    auto loaded = static_cast<double>(grp.stats.n_vertices + grp.halo.size());
    return coeffs.fixed_bytes + coeffs.vertex_bytes * loaded +
           coeffs.edge_bytes * static_cast<double>(grp.stats.n_edges) +
           coeffs.slot_bytes * static_cast<double>(grp.stats.total_sequence_length);
  };

  std::vector<Group> groups;
  std::vector<std::size_t> parent;  // union-find over group indices
  std::vector<std::size_t> owner(g.num_instances(), kOffDevice);
  for (auto c : chunks) {
    const auto& chunk = cg.chunk(c);
    Group grp;
    grp.chunks = {c};
    grp.stats = chunk.stats;
    grp.halo = chunk.halo;
    auto memory = memory_of(grp);
    if (memory > memory_budget) {
      throw FusionError("chunk " + std::to_string(c) + " needs " + std::to_string(memory) +
                        " bytes, over the memory budget of " + std::to_string(memory_budget));
    }
    grp.base_loads = grp.stats.n_vertices + grp.halo.size();
    for (auto v : chunk.members) owner[v] = groups.size();
    parent.push_back(groups.size());
    groups.push_back(std::move(grp));
  }
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (auto v : cg.chunk(groups[i].chunks.front()).members) {
      for (auto w : g.spatial_adjacency(v)) {
        if (w > v && owner[w] != kOffDevice && owner[w] != i) {
          ++groups[i].links[owner[w]].spatial_edges;
          ++groups[owner[w]].links[i].spatial_edges;
        }
      }
    }
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (auto [other, bytes] : cg.affinity(groups[i].chunks.front())) {
      const auto& members = cg.chunk(other).members;
      if (members.empty() || owner[members.front()] == kOffDevice) continue;
      groups[i].links[owner[members.front()]].bytes = bytes;
    }
  }

  // Max-heap on traffic, then smallest group pair for determinism.
  using Entry = std::tuple<std::uint64_t, std::size_t, std::size_t>;
  auto worse = [](const Entry& x, const Entry& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) < std::get<0>(y);
    return std::tie(std::get<1>(x), std::get<2>(x)) > std::tie(std::get<1>(y), std::get<2>(y));
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (const auto& [other, link] : groups[i].links) {
      if (i < other) heap.emplace(link.bytes, i, other);
    }
  }

  while (!heap.empty()) {
    auto [bytes, a, b] = heap.top();
    heap.pop();
    if (!groups[a].alive || !groups[b].alive) continue;

    const auto k = groups.size();
    Group fused;
    fused.stats = groups[a].stats;
    fused.stats.n_vertices += groups[b].stats.n_vertices;
    fused.stats.total_sequence_length += groups[b].stats.total_sequence_length;
    fused.stats.n_edges += groups[b].stats.n_edges - groups[a].links[b].spatial_edges;
    std::set_union(groups[a].halo.begin(), groups[a].halo.end(), groups[b].halo.begin(), groups[b].halo.end(),
                   std::back_inserter(fused.halo));
    std::erase_if(fused.halo, [&](InstanceId x) {
      if (owner[x] == kOffDevice) return false;
      auto root = find(owner[x]);
      return root == a || root == b;
    });
    if (memory_of(fused) > memory_budget) continue;  // this pair never fits; later merges form new pairs

    fused.chunks = groups[a].chunks;
    fused.chunks.insert(fused.chunks.end(), groups[b].chunks.begin(), groups[b].chunks.end());
    std::sort(fused.chunks.begin(), fused.chunks.end());
    fused.base_loads = groups[a].base_loads + groups[b].base_loads;
    fused.fused_traffic = groups[a].fused_traffic + groups[b].fused_traffic + bytes;
    for (auto src : {a, b}) {
      for (const auto& [x, link] : groups[src].links) {
        if (x == a || x == b) continue;
        auto& merged = fused.links[x];
        merged.bytes += link.bytes;
        merged.spatial_edges += link.spatial_edges;
        groups[x].links.erase(src);
      }
      groups[src].alive = false;
      groups[src].links.clear();
      groups[src].halo = {};
      parent[src] = k;
    }
    for (const auto& [x, link] : fused.links) {
      groups[x].links[k] = link;
      heap.emplace(link.bytes, x, k);
    }
    parent.push_back(k);
    groups.push_back(std::move(fused));
  }

  std::vector<FusionGroup> out;
  for (const auto& grp : groups) {
    if (!grp.alive) continue;
    FusionGroup f;
    f.chunks = grp.chunks;
    f.loaded_vertices = grp.stats.n_vertices + grp.halo.size();
    f.memory_bytes = memory_of(grp);
    f.saved_loads = grp.base_loads - f.loaded_vertices;
    f.fused_traffic = grp.fused_traffic;
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(),
            [](const FusionGroup& x, const FusionGroup& y) { return x.chunks.front() < y.chunks.front(); });
  return out;
}

FusionPlan plan_spatial_fusion(const DynamicGraph& g, const ModelProfile& profile, const ChunkGraph& cg,
                               const Assignment& assignment, double memory_budget,
                               const MemoryCoefficients& coeffs) {
  if (assignment.device_of_chunk.size() != cg.size()) throw FusionError("assignment does not match chunk graph");
  FusionPlan plan;
  for (const auto& queue : assignment.queue) {
    std::vector<ChunkId> chunks(queue.begin(), queue.end());
    std::sort(chunks.begin(), chunks.end());
    plan.devices.push_back(fuse_device(g, profile, cg, chunks, memory_budget, coeffs));
  }
  return plan;
}

// ---- temporal fusion -------------------------------------------------------

namespace {

// Max segment tree over remaining row capacity; finds the first row that
// still has room for a given length in O(log rows).
class FirstFit {
 public:
  explicit FirstFit(std::size_t max_rows) {
    size_ = 1;
    while (size_ < std::max<std::size_t>(max_rows, 1)) size_ *= 2;
    tree_.assign(2 * size_, 0);
  }

  std::size_t rows() const { return rows_; }

  /// Returns the row index used; opens a new row of `capacity` when needed.
  std::size_t place(std::uint32_t length, std::uint32_t capacity) {
    std::size_t row;
    if (tree_[1] >= length) {
      std::size_t node = 1;
      while (node < size_) node = tree_[2 * node] >= length ? 2 * node : 2 * node + 1;
      row = node - size_;
    } else {
      row = rows_++;
      set(row, capacity);
    }
    set(row, tree_[size_ + row] - length);
    return row;
  }

 private:
  void set(std::size_t row, std::uint32_t value) {
    std::size_t node = size_ + row;
    tree_[node] = value;
    for (node /= 2; node >= 1; node /= 2) tree_[node] = std::max(tree_[2 * node], tree_[2 * node + 1]);
  }

  std::size_t size_ = 1;
  std::size_t rows_ = 0;
  std::vector<std::uint32_t> tree_;
};

}  // namespace

PackedBatch pack_sequences(std::span<const SequenceSpec> sequences) {
  PackedBatch batch;
  if (sequences.empty()) return batch;
  for (const auto& s : sequences) {
    if (s.length == 0) throw FusionError("sequence of entity " + std::to_string(s.entity) + " has length 0");
    batch.lengths.push_back(s.length);
    batch.row_length = std::max(batch.row_length, s.length);
  }
  std::vector<std::uint32_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t x, std::uint32_t y) { return sequences[x].length > sequences[y].length; });

  FirstFit fit(sequences.size());
  for (auto s : order) {
    auto row = fit.place(sequences[s].length, batch.row_length);
    if (row == batch.rows.size()) {
      batch.rows.emplace_back();
      batch.rows.back().reserve(batch.row_length);
    }
    for (std::uint32_t k = 0; k < sequences[s].length; ++k) batch.rows[row].push_back({s, k});
  }

  std::uint64_t used = 0;
  for (auto& row : batch.rows) {
    used += row.size();
    row.resize(batch.row_length);  // padding slots default to kPadding
    std::vector<std::uint8_t> carry(batch.row_length, 0);
    for (std::uint32_t p = 1; p < batch.row_length; ++p) {
      const auto& prev = row[p - 1];
      const auto& cur = row[p];
      carry[p] = cur.sequence != PackedSlot::kPadding && prev.sequence == cur.sequence &&
                 prev.step + 1 == cur.step;
    }
    batch.carry.push_back(std::move(carry));
  }
  batch.padding_count = static_cast<std::uint64_t>(batch.rows.size()) * batch.row_length - used;
  for (const auto& s : sequences) batch.naive_padding += batch.row_length - s.length;
  return batch;
}

PaddingWaste padding_waste(const PackedBatch& batch) { return {batch.padding_count, batch.naive_padding}; }

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) { return (1.0 + (-v.array()).exp()).inverse().matrix(); }

}  // namespace

GruCell GruCell::random(Eigen::Index input, Eigen::Index hidden, std::uint64_t seed) {
  if (input < 1 || hidden < 1) throw FusionError("GRU sizes must be >= 1");
  std::mt19937_64 rng(seed);
  double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = u(rng);
    }
    return m;
  };
  GruCell cell;
  cell.W_r = fill(hidden, input);
  cell.W_z = fill(hidden, input);
  cell.W_n = fill(hidden, input);
  cell.U_r = fill(hidden, hidden);
  cell.U_z = fill(hidden, hidden);
  cell.U_n = fill(hidden, hidden);
  cell.b_r = fill(hidden, 1);
  cell.b_z = fill(hidden, 1);
  cell.b_n = fill(hidden, 1);
  return cell;
}

Eigen::VectorXd GruCell::step(const Eigen::VectorXd& x, const Eigen::VectorXd& h) const {
  Eigen::VectorXd r = sigmoid(W_r * x + U_r * h + b_r);
  Eigen::VectorXd z = sigmoid(W_z * x + U_z * h + b_z);
  Eigen::VectorXd n = (W_n * x + r.cwiseProduct(U_n * h) + b_n).array().tanh().matrix();
  return (Eigen::VectorXd::Ones(z.size()) - z).cwiseProduct(n) + z.cwiseProduct(h);
}

std::vector<Eigen::MatrixXd> gru_forward_masked(const GruCell& cell, const PackedBatch& batch,
                                                std::span<const Eigen::MatrixXd> inputs) {
  if (inputs.size() != batch.lengths.size()) {
    throw FusionError("got " + std::to_string(inputs.size()) + " input sequences for a batch of " +
                      std::to_string(batch.lengths.size()));
  }
  std::vector<Eigen::MatrixXd> out(inputs.size());
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    if (inputs[s].rows() != cell.input_size() || inputs[s].cols() != batch.lengths[s]) {
      throw FusionError("input " + std::to_string(s) + " is " + std::to_string(inputs[s].rows()) + "x" +
                        std::to_string(inputs[s].cols()) + ", expected " + std::to_string(cell.input_size()) +
                        "x" + std::to_string(batch.lengths[s]));
    }
    out[s].resize(cell.hidden_size(), inputs[s].cols());
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(cell.hidden_size());
  for (std::size_t r = 0; r < batch.rows.size(); ++r) {
    Eigen::VectorXd h = zero;
    for (std::size_t p = 0; p < batch.rows[r].size(); ++p) {
      const auto& slot = batch.rows[r][p];
      if (slot.sequence == PackedSlot::kPadding) {
        h = zero;
        continue;
      }
      Eigen::VectorXd carried = batch.carry[r][p] ? h : zero;
      h = cell.step(inputs[slot.sequence].col(slot.step), carried);
      out[slot.sequence].col(slot.step) = h;
    }
  }
  return out;
}

Eigen::MatrixXd gru_forward(const GruCell& cell, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != cell.input_size()) throw FusionError("input width does not match the cell");
  Eigen::MatrixXd out(cell.hidden_size(), inputs.cols());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(cell.hidden_size());
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    h = cell.step(inputs.col(t), h);
    out.col(t) = h;
  }
  return out;
}

}  // namespace stchunk
