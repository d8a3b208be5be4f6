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

#include "stchunk/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stchunk {

std::string to_string(TemporalFanout fanout) {
  return fanout == TemporalFanout::previous_only ? "previous-only" : "all-snapshots";
}

TemporalFanout fanout_from_string(const std::string& name) {
  if (name == "previous-only") return TemporalFanout::previous_only;
  if (name == "all-snapshots") return TemporalFanout::all_snapshots;
  throw CostModelError("unknown temporal fanout '" + name + "'");
}

void ModelProfile::validate() const {
  if (blocks < 1) throw CostModelError("model profile: blocks must be >= 1");
  if (spatial_msgs_per_block < 1) throw CostModelError("model profile: spatial_msgs_per_block must be >= 1");
  if (embedding_dim < 1) throw CostModelError("model profile: embedding_dim must be >= 1");
  if (bytes_per_scalar < 1) throw CostModelError("model profile: bytes_per_scalar must be >= 1");
}

ModelProfile ModelProfile::tgcn_like(std::uint32_t embedding_dim) {
  return {1, 2, 1, TemporalFanout::previous_only, embedding_dim, 4};
}

ModelProfile ModelProfile::dysat_like(std::uint32_t embedding_dim) {
  return {1, 1, 1, TemporalFanout::all_snapshots, embedding_dim, 4};
}

ModelProfile ModelProfile::mpnn_lstm_like(std::uint32_t embedding_dim) {
  return {1, 2, 2, TemporalFanout::previous_only, embedding_dim, 4};
}

std::uint64_t edge_traffic(const ModelProfile& profile, EdgeKind kind) {
  std::uint64_t msgs = kind == EdgeKind::spatial ? profile.spatial_msgs_per_block
                                                 : profile.temporal_msgs_per_block;
  return static_cast<std::uint64_t>(profile.blocks) * msgs * profile.embedding_dim *
         profile.bytes_per_scalar;
}

std::uint64_t cut_bytes(const ModelProfile& profile, EdgeKind kind) {
  auto one_way = edge_traffic(profile, kind);
  if (kind == EdgeKind::temporal && profile.temporal_fanout == TemporalFanout::previous_only) {
    return one_way;
  }
  return 2 * one_way;
}

std::uint32_t ChunkStats::max_width() const {
  return layer_dims.empty() ? 0 : *std::max_element(layer_dims.begin(), layer_dims.end());
}

std::uint64_t ChunkStats::total_width() const {
  return std::accumulate(layer_dims.begin(), layer_dims.end(), std::uint64_t{0});
}

void Calibration::validate() const {
  for (double c : {structure_fixed, structure_edge, structure_vertex, time_fixed, time_sequence}) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw CostModelError("calibration coefficients must be finite and strictly positive");
    }
  }
}

double true_cost(const ChunkStats& stats, Encoder encoder, const Calibration& coeffs) {
  coeffs.validate();
  if (encoder == Encoder::structure) {
    double feature_work = static_cast<double>(stats.feature_dim) + static_cast<double>(stats.total_width());
    return coeffs.structure_fixed +
           coeffs.structure_edge * static_cast<double>(stats.n_edges) * feature_work +
           coeffs.structure_vertex * static_cast<double>(stats.n_vertices);
  }
  double width_work = std::max<double>(stats.max_width(), 1.0);
  return coeffs.time_fixed +
         coeffs.time_sequence * static_cast<double>(stats.total_sequence_length) * width_work;
}

double mape(std::span<const std::pair<double, double>> predicted_measured) {
  if (predicted_measured.empty()) throw CostModelError("mape of an empty set");
  double sum = 0.0;
  for (const auto& [predicted, measured] : predicted_measured) {
    if (!(measured > 0.0)) throw CostModelError("mape needs strictly positive measurements");
    sum += std::abs(predicted - measured) / measured;
  }
  return sum / static_cast<double>(predicted_measured.size());
}

}  // namespace stchunk
