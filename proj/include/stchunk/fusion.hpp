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
#include <vector>

#include <Eigen/Dense>

#include "stchunk/assign.hpp"
#include "stchunk/messages.hpp"
#include "stchunk/partition.hpp"

namespace stchunk {

class FusionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Analytic memory estimate of a unit of work on one device:
///   fixed + vertex * |members + halo| + edge * n_edges + slot * total_sequence_length
struct MemoryCoefficients {
  double fixed_bytes = 1 << 20;
  double vertex_bytes = 256.0;
  double edge_bytes = 64.0;
  double slot_bytes = 128.0;

  void validate() const;
};

struct FusionGroup {
  std::vector<ChunkId> chunks;       // ascending
  std::uint64_t loaded_vertices = 0; // |members + halo| of the fused unit
  double memory_bytes = 0.0;
  std::uint64_t saved_loads = 0;     // sum of member-chunk loads minus loaded_vertices
  std::uint64_t fused_traffic = 0;   // inter-chunk bytes now internal to the group
};

struct FusionPlan {
  std::vector<std::vector<FusionGroup>> devices;

  std::uint64_t saved_loads() const;
  std::size_t group_count() const;
};

/// Estimated memory of an arbitrary instance set.
double unit_memory(UnitAnalyzer& analyzer, std::span<const InstanceId> members, const MemoryCoefficients& coeffs);

/// Greedy pairwise fusion per device: repeatedly merges the two groups with the
/// largest inter-group traffic, skipping pairs whose merged estimate would
/// exceed the budget, until no connected pair fits. Throws FusionError when a
/// single chunk already exceeds the budget.
FusionPlan plan_spatial_fusion(const DynamicGraph& g, const ModelProfile& profile, const ChunkGraph& cg,
                               const Assignment& assignment, double memory_budget,
                               const MemoryCoefficients& coeffs);

/// Same planning for an explicit chunk subset (one device).
std::vector<FusionGroup> fuse_device(const DynamicGraph& g, const ModelProfile& profile, const ChunkGraph& cg,
                                     std::span<const ChunkId> chunks, double memory_budget,
                                     const MemoryCoefficients& coeffs);

// ---- temporal fusion -------------------------------------------------------

struct SequenceSpec {
  std::uint64_t entity = 0;
  std::uint32_t length = 0;
};

/// One slot of a packed row. sequence == kPadding marks padding.
struct PackedSlot {
  static constexpr std::uint32_t kPadding = 0xffffffffu;
  std::uint32_t sequence = kPadding;  // index into the packed input list
  std::uint32_t step = 0;             // position inside that sequence
};

struct PackedBatch {
  std::vector<std::uint32_t> lengths;  // per input sequence
  std::uint32_t row_length = 0;
  std::vector<std::vector<PackedSlot>> rows;
  /// carry[r][p] = 1 iff slot p-1 and slot p of row r hold consecutive steps
  /// of one sequence; carry[r][0] = 0.
  std::vector<std::vector<std::uint8_t>> carry;
  std::uint64_t padding_count = 0;
  std::uint64_t naive_padding = 0;  // per-sequence padding to row_length
};

/// First-fit-decreasing concatenation into rows as long as the longest
/// sequence. Row count is at most floor(11/9 * OPT + 6/9), OPT being the
/// fewest rows any packing needs (Dosa's tight FFD bound), so padding exceeds
/// the optimum by at most (that bound - OPT) * row_length. Throws FusionError
/// on a zero length.
PackedBatch pack_sequences(std::span<const SequenceSpec> sequences);

struct PaddingWaste {
  std::uint64_t packed = 0;
  std::uint64_t naive = 0;
};
PaddingWaste padding_waste(const PackedBatch& batch);

/// GRU cell with separate input and recurrent matrices:
///   r  = sigmoid(W_r x + U_r h + b_r)
///   z  = sigmoid(W_z x + U_z h + b_z)
///   n  = tanh(W_n x + r * (U_n h) + b_n)
///   h' = (1 - z) * n + z * h
struct GruCell {
  Eigen::MatrixXd W_r, W_z, W_n;  // hidden x input
  Eigen::MatrixXd U_r, U_z, U_n;  // hidden x hidden
  Eigen::VectorXd b_r, b_z, b_n;

  Eigen::Index input_size() const { return W_r.cols(); }
  Eigen::Index hidden_size() const { return W_r.rows(); }

  /// Uniform(-1/sqrt(hidden), 1/sqrt(hidden)) parameters.
  static GruCell random(Eigen::Index input, Eigen::Index hidden, std::uint64_t seed);

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& h) const;
};

/// Runs the cell along every packed row. The incoming hidden state of slot p
/// is multiplied by carry[p], so each sequence starts from a zero state.
/// inputs[s] is input_size x length(s); the result has the same layout with
/// hidden_size rows. Throws FusionError on shape mismatches.
std::vector<Eigen::MatrixXd> gru_forward_masked(const GruCell& cell, const PackedBatch& batch,
                                                std::span<const Eigen::MatrixXd> inputs);

/// Plain per-sequence forward from a zero state.
Eigen::MatrixXd gru_forward(const GruCell& cell, const Eigen::MatrixXd& inputs);

}  // namespace stchunk
