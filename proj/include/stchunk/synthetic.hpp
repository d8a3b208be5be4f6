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
#include <string>

#include "stchunk/graph.hpp"

namespace stchunk {

/// Distribution of entity sequence lengths (number of consecutive snapshots
/// an entity is present). Draws are clamped to [1, T].
struct LengthDistribution {
  enum class Kind { fixed, uniform, geometric, lognormal };
  Kind kind = Kind::uniform;
  double a = 1.0;  // fixed: length; uniform: min; geometric: mean; lognormal: median
  double b = 1.0;  // uniform: max; lognormal: sigma of log-length

  static LengthDistribution fixed(std::uint32_t length);
  static LengthDistribution uniform(std::uint32_t min, std::uint32_t max);
  static LengthDistribution geometric(double mean);
  static LengthDistribution lognormal(double median, double sigma);
};

std::string to_string(LengthDistribution::Kind kind);
LengthDistribution::Kind length_kind_from_string(const std::string& name);

/// Parameters of the non-uniform synthetic generator.
///
/// Per-snapshot edge counts are drawn from normal(mean, stddev^2), clamped at
/// zero and renormalized to total_edges. Entities draw a sequence length and a
/// uniform start snapshot until total_vertices instances exist. Entities also
/// draw a community; an edge picks its second endpoint inside the first
/// endpoint's community with probability intra_community.
struct SyntheticSpec {
  std::uint64_t total_vertices = 0;
  std::uint64_t total_edges = 0;
  Timestep num_snapshots = 1;
  double edges_per_snapshot_mean = 1.0;
  double edges_per_snapshot_stddev = 0.0;
  LengthDistribution presence_length = LengthDistribution::uniform(1, 1);
  std::uint32_t feature_dim = 2;
  std::uint32_t communities = 1;
  double intra_community = 0.0;
  std::uint64_t rng_seed = 0;
};

/// 5M vertex instances, 2M edges, 100 snapshots, 20K mean edges per snapshot.
SyntheticSpec full_scale_spec(double stddev, std::uint64_t seed);

/// Deterministic for fixed parameters. Throws GraphError when they are invalid
/// or asks for more edges than the drawn snapshots can hold.
DynamicGraph generate(const SyntheticSpec& spec);

/// Per-snapshot edge counts the generator will realise (exposed for tests).
std::vector<std::uint64_t> snapshot_edge_targets(const SyntheticSpec& spec,
                                                 std::span<const std::uint64_t> snapshot_vertices);

}  // namespace stchunk
