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

#include "stchunk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

namespace stchunk {

LengthDistribution LengthDistribution::fixed(std::uint32_t length) {
  return {Kind::fixed, static_cast<double>(length), 0.0};
}
LengthDistribution LengthDistribution::uniform(std::uint32_t min, std::uint32_t max) {
  return {Kind::uniform, static_cast<double>(min), static_cast<double>(max)};
}
LengthDistribution LengthDistribution::geometric(double mean) { return {Kind::geometric, mean, 0.0}; }
LengthDistribution LengthDistribution::lognormal(double median, double sigma) {
  return {Kind::lognormal, median, sigma};
}

std::string to_string(LengthDistribution::Kind kind) {
  switch (kind) {
    case LengthDistribution::Kind::fixed: return "fixed";
    case LengthDistribution::Kind::uniform: return "uniform";
    case LengthDistribution::Kind::geometric: return "geometric";
    case LengthDistribution::Kind::lognormal: return "lognormal";
  }
  return "?";
}

LengthDistribution::Kind length_kind_from_string(const std::string& name) {
  if (name == "fixed") return LengthDistribution::Kind::fixed;
  if (name == "uniform") return LengthDistribution::Kind::uniform;
  if (name == "geometric") return LengthDistribution::Kind::geometric;
  if (name == "lognormal") return LengthDistribution::Kind::lognormal;
  throw GraphError("unknown presence length distribution '" + name + "'");
}

SyntheticSpec full_scale_spec(double stddev, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.total_vertices = 5'000'000;
  spec.total_edges = 2'000'000;
  spec.num_snapshots = 100;
  spec.edges_per_snapshot_mean = 20'000.0;
  spec.edges_per_snapshot_stddev = stddev;
  spec.presence_length = LengthDistribution::uniform(1, 100);
  spec.rng_seed = seed;
  return spec;
}

namespace {

using Rng = std::mt19937_64;

std::uint32_t draw_length(const LengthDistribution& d, Timestep T, Rng& rng) {
  double x = 1.0;
  switch (d.kind) {
    case LengthDistribution::Kind::fixed:
      x = d.a;
      break;
    case LengthDistribution::Kind::uniform: {
      auto lo = static_cast<std::int64_t>(std::llround(d.a));
      auto hi = static_cast<std::int64_t>(std::llround(d.b));
      x = static_cast<double>(std::uniform_int_distribution<std::int64_t>(lo, std::max(lo, hi))(rng));
      break;
    }
    case LengthDistribution::Kind::geometric: {
      // Support {1, 2, ...} with the requested mean.
      double p = 1.0 / std::max(1.0, d.a);
      x = 1.0 + static_cast<double>(std::geometric_distribution<std::int64_t>(p)(rng));
      break;
    }
    case LengthDistribution::Kind::lognormal:
      x = std::round(std::lognormal_distribution<double>(std::log(std::max(1.0, d.a)), d.b)(rng));
      break;
  }
  return static_cast<std::uint32_t>(std::clamp(x, 1.0, static_cast<double>(T)));
}

// Largest-remainder rounding of weights to integers summing to total.
std::vector<std::uint64_t> apportion(std::span<const double> weights, std::uint64_t total) {
  const auto n = weights.size();
  std::vector<std::uint64_t> out(n, 0);
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (n == 0 || total == 0) return out;
  std::vector<double> w(weights.begin(), weights.end());
  if (sum <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0);
    sum = static_cast<double>(n);
  }
  std::vector<std::pair<double, std::size_t>> rem;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double exact = static_cast<double>(total) * w[i] / sum;
    out[i] = static_cast<std::uint64_t>(std::floor(exact));
    assigned += out[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) ++out[rem[k].second];
  return out;
}

}  // namespace

std::vector<std::uint64_t> snapshot_edge_targets(const SyntheticSpec& spec,
                                                 std::span<const std::uint64_t> snapshot_vertices) {
  Rng rng(spec.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  const Timestep T = spec.num_snapshots;
  std::vector<double> draws(T);
  std::normal_distribution<double> normal(spec.edges_per_snapshot_mean, spec.edges_per_snapshot_stddev);
  for (auto& d : draws) d = spec.edges_per_snapshot_stddev > 0 ? std::max(0.0, normal(rng)) : spec.edges_per_snapshot_mean;

  std::vector<std::uint64_t> capacity(T);
  std::uint64_t total_capacity = 0;
  for (Timestep t = 0; t < T; ++t) {
    auto n = snapshot_vertices[t];
    capacity[t] = n < 2 ? 0 : n * (n - 1) / 2;
    total_capacity += capacity[t];
  }
  if (total_capacity < spec.total_edges) {
    throw GraphError("infeasible synthetic spec: " + std::to_string(spec.total_edges) +
                     " edges requested but snapshots can hold at most " +
                     std::to_string(total_capacity));
  }

  // Snapshots that cannot hold an edge get no share of the total.
  for (Timestep t = 0; t < T; ++t) {
    if (capacity[t] == 0) draws[t] = 0.0;
  }
  auto targets = apportion(draws, spec.total_edges);

  // Spill overflow into snapshots with slack, largest draw first.
  std::uint64_t overflow = 0;
  for (Timestep t = 0; t < T; ++t) {
    if (targets[t] > capacity[t]) {
      overflow += targets[t] - capacity[t];
      targets[t] = capacity[t];
    }
  }
  if (overflow > 0) {
    std::vector<Timestep> order(T);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Timestep a, Timestep b) { return draws[a] > draws[b]; });
    for (auto t : order) {
      auto add = std::min(overflow, capacity[t] - targets[t]);
      targets[t] += add;
      overflow -= add;
      if (overflow == 0) break;
    }
  }
  return targets;
}

DynamicGraph generate(const SyntheticSpec& spec) {
  if (spec.num_snapshots < 1) throw GraphError("synthetic spec needs at least one snapshot");
  if (spec.edges_per_snapshot_mean <= 0.0) throw GraphError("edges_per_snapshot_mean must be > 0");
  if (spec.edges_per_snapshot_stddev < 0.0) throw GraphError("edges_per_snapshot_stddev must be >= 0");
  if (spec.communities < 1) throw GraphError("communities must be >= 1");
  if (spec.intra_community < 0.0 || spec.intra_community > 1.0) {
    throw GraphError("intra_community must lie in [0, 1]");
  }
  const Timestep T = spec.num_snapshots;
  Rng rng(spec.rng_seed);

  // Presences.
  std::vector<VertexInstance> vertices;
  vertices.reserve(spec.total_vertices);
  std::vector<std::uint32_t> community;
  std::vector<std::uint64_t> per_snapshot(T, 0);
  std::uniform_int_distribution<std::uint32_t> pick_community(0, spec.communities - 1);
  EntityId entity = 0;
  while (vertices.size() < spec.total_vertices) {
    auto remaining = spec.total_vertices - vertices.size();
    auto length = std::min<std::uint64_t>(draw_length(spec.presence_length, T, rng), remaining);
    auto start = std::uniform_int_distribution<Timestep>(1, T - static_cast<Timestep>(length) + 1)(rng);
    for (Timestep t = start; t < start + length; ++t) {
      vertices.push_back({entity, t});
      ++per_snapshot[t - 1];
    }
    community.push_back(pick_community(rng));
    ++entity;
  }

  auto targets = snapshot_edge_targets(spec, per_snapshot);

  // Snapshot membership lists by entity, split by community.
  std::vector<std::vector<EntityId>> members(T);
  for (const auto& v : vertices) members[v.t - 1].push_back(v.entity);

  std::vector<EdgeRecord> edges;
  edges.reserve(spec.total_edges);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Timestep t = 1; t <= T; ++t) {
    auto& ids = members[t - 1];
    std::sort(ids.begin(), ids.end());
    const auto n = ids.size();
    const auto want = targets[t - 1];
    if (want == 0) continue;
    const std::uint64_t capacity = n * (n - 1) / 2;

    if (want * 2 > capacity) {
      // Dense snapshot: sample without replacement from all pairs.
      std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
      pairs.reserve(capacity);
      for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
      }
      for (std::uint64_t k = 0; k < want; ++k) {
        auto r = std::uniform_int_distribution<std::uint64_t>(k, pairs.size() - 1)(rng);
        std::swap(pairs[k], pairs[r]);
        edges.push_back({t, ids[pairs[k].first], ids[pairs[k].second]});
      }
      continue;
    }

    std::vector<std::vector<std::uint32_t>> by_community(spec.communities);
    for (std::uint32_t i = 0; i < n; ++i) by_community[community[ids[i]]].push_back(i);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(want * 2);
    std::uniform_int_distribution<std::uint32_t> any(0, static_cast<std::uint32_t>(n - 1));
    std::uint64_t attempts = 0;
    while (seen.size() < want) {
      auto i = any(rng);
      std::uint32_t j = 0;
      const auto& peers = by_community[community[ids[i]]];
      // Saturated communities fall back to uniform pairs.
      bool local = ++attempts < 64 * want && unit(rng) < spec.intra_community;
      if (local && peers.size() > 1) {
        j = peers[std::uniform_int_distribution<std::size_t>(0, peers.size() - 1)(rng)];
      } else {
        j = any(rng);
      }
      if (i == j) continue;
      auto key = (static_cast<std::uint64_t>(std::min(i, j)) << 32) | std::max(i, j);
      if (seen.insert(key).second) edges.push_back({t, ids[std::min(i, j)], ids[std::max(i, j)]});
    }
  }
  return DynamicGraph::build(T, spec.feature_dim, std::move(vertices), edges);
}

}  // namespace stchunk
