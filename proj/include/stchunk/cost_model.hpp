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
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stchunk {

class CostModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TemporalFanout { previous_only, all_snapshots };
enum class EdgeKind { spatial, temporal };
enum class Encoder { structure, time };

std::string to_string(TemporalFanout fanout);
TemporalFanout fanout_from_string(const std::string& name);

/// Per-block message counts and embedding width of a DGNN model. Every
/// traffic and cost weight in the library derives from this profile.
struct ModelProfile {
  std::uint32_t blocks = 1;
  std::uint32_t spatial_msgs_per_block = 2;
  std::uint32_t temporal_msgs_per_block = 1;
  TemporalFanout temporal_fanout = TemporalFanout::previous_only;
  std::uint32_t embedding_dim = 4;
  std::uint32_t bytes_per_scalar = 4;

  /// Throws CostModelError when a count that must be >= 1 is zero.
  void validate() const;

  /// Two GCN layers and one GRU layer per block.
  static ModelProfile tgcn_like(std::uint32_t embedding_dim = 4);
  /// One GAT layer and one temporal self-attention layer over all snapshots.
  static ModelProfile dysat_like(std::uint32_t embedding_dim = 4);
  /// Two GCN layers and two LSTM layers per block.
  static ModelProfile mpnn_lstm_like(std::uint32_t embedding_dim = 4);
};

/// Bytes for one directed embedding transfer along an edge of the given kind:
/// blocks * msgs_per_block * embedding_dim * bytes_per_scalar.
std::uint64_t edge_traffic(const ModelProfile& profile, EdgeKind kind);

/// Bytes billed when one link of the given kind has its endpoints on
/// different devices. Spatial edges aggregate in both directions. Temporal
/// links aggregate toward the later instance under previous-only fanout and in
/// both directions under all-snapshots fanout.
std::uint64_t cut_bytes(const ModelProfile& profile, EdgeKind kind);

/// Features of a unit of work (a chunk, a fused group, a device partition).
struct ChunkStats {
  std::uint64_t n_vertices = 0;
  std::uint64_t n_edges = 0;
  std::uint64_t total_sequence_length = 0;
  std::uint32_t feature_dim = 0;
  std::vector<std::uint32_t> layer_dims;

  std::uint32_t depth() const { return static_cast<std::uint32_t>(layer_dims.size()); }
  std::uint32_t max_width() const;
  std::uint64_t total_width() const;
};

/// Coefficients of the analytic ground-truth cost (milliseconds).
///
///   structure = structure_fixed + structure_edge * n_edges * feature_work
///             + structure_vertex * n_vertices
///   time      = time_fixed + time_sequence * total_sequence_length * width_work
///
/// feature_work = feature_dim + total_width, width_work = max(max_width, 1).
struct Calibration {
  double structure_fixed = 0.01;
  double structure_edge = 2.0e-5;
  double structure_vertex = 4.0e-4;
  double time_fixed = 0.005;
  double time_sequence = 1.5e-5;

  void validate() const;
};

double true_cost(const ChunkStats& stats, Encoder encoder, const Calibration& coeffs);
inline double true_cost(const ChunkStats& stats, const Calibration& coeffs) {
  return true_cost(stats, Encoder::structure, coeffs) + true_cost(stats, Encoder::time, coeffs);
}

/// Mean absolute percentage error: (1/n) sum |predicted - measured| / measured.
/// Throws CostModelError for an empty input or a non-positive measurement.
double mape(std::span<const std::pair<double, double>> predicted_measured);

}  // namespace stchunk
