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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stchunk/assign.hpp"
#include "stchunk/cost_model.hpp"
#include "stchunk/fusion.hpp"
#include "stchunk/partition.hpp"
#include "stchunk/predictor.hpp"
#include "stchunk/stale.hpp"

namespace stchunk {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { pgc, pss, pts, pss_ts };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
inline constexpr Method kAllMethods[] = {Method::pgc, Method::pss, Method::pts, Method::pss_ts};

struct ClusterSpec {
  std::uint32_t n_devices = 4;
  double memory_budget = 512.0 * (1 << 20);  // bytes per device
  double link_bandwidth = 2.0e4;              // bytes per ms
  double latency_ms = 0.01;                   // per batched message
  double gradient_bytes = 16.0 * 1024;        // model size for the all-reduce

  void validate() const;
};

/// A unit of work run on one device. Structure units aggregate spatial
/// neighbours, time units run the temporal encoder; a unit may do both.
/// Compute is billed per unit. Units sharing a load group are loaded together,
/// so their shared halo is fetched once and their sequences pack together.
struct WorkUnit {
  DeviceId device = 0;
  bool structure = true;
  bool time = true;
  std::vector<InstanceId> members;  // sorted
  std::uint32_t load_group = 0;
};

/// Where every instance lives in each phase, plus the units billed for compute
/// and data loading.
struct Plan {
  Method method = Method::pgc;
  std::uint32_t n_devices = 1;
  DeviceMap structure_device;
  DeviceMap time_device;
  std::vector<WorkUnit> units;

  /// Throws SimError unless both maps cover g with valid devices, the
  /// structure units and the time units each cover every instance exactly once
  /// on the instance's mapped device, and each load group stays on one device.
  void validate(const DynamicGraph& g) const;
};

struct StaleReport {
  double theta = 0.0;
  double max_distance = 0.0;
  std::uint64_t sent_bytes = 0;
  std::uint64_t avoided_bytes = 0;

  /// avoided / (sent + avoided), 0 when nothing was due.
  double reduction() const;
};

struct EpochReport {
  std::string method;
  std::uint32_t epoch = 1;
  std::vector<double> device_compute_ms;
  std::vector<double> device_time_ms;
  std::uint64_t spatial_bytes = 0;
  std::uint64_t temporal_bytes = 0;
  std::uint64_t shuffle_bytes = 0;
  std::uint64_t gradient_sync_bytes = 0;
  std::uint64_t loading_bytes = 0;
  std::uint64_t padding_packed = 0;
  std::uint64_t padding_naive = 0;
  double lambda = 1.0;
  double wall_ms = 0.0;
  StaleReport stale;

  /// Cross-device embedding bytes: spatial + temporal + shuffle.
  std::uint64_t traffic_bytes() const { return spatial_bytes + temporal_bytes + shuffle_bytes; }
};

nlohmann::json to_json(const EpochReport& report);

struct SimulationOptions {
  Calibration calibration;
  StaleConfig stale{StaleMode::off, 0.0};
  DriftSpec drift;
  EpochLossTrace loss;  // empty: synthetic_loss_trace(epochs, 2.0, 0.05, 0.1)
};

/// Runs epochs of one plan. Stale state (the embedding cache and the drift
/// stream) persists across epochs.
class Simulator {
 public:
  Simulator(const DynamicGraph& g, const ModelProfile& profile, const ClusterSpec& cluster, Plan plan,
            SimulationOptions options);

  /// Simulates the next epoch.
  EpochReport run_epoch();

  const Plan& plan() const { return plan_; }

 private:
  struct CutMessage {
    std::uint32_t sender;  // index into boundary_
    DeviceId from;
    DeviceId to;
    EdgeKind kind;
    std::uint64_t bytes;
  };

  const DynamicGraph* g_;
  ModelProfile profile_;
  ClusterSpec cluster_;
  Plan plan_;
  SimulationOptions options_;

  std::vector<double> compute_ms_;
  std::uint64_t loading_bytes_ = 0;
  std::uint64_t padding_packed_ = 0;
  std::uint64_t padding_naive_ = 0;
  std::vector<std::uint64_t> shuffle_out_;                 // per device
  std::vector<std::vector<std::uint8_t>> shuffle_peers_;   // device x device
  std::vector<InstanceId> boundary_;                       // senders of cut messages
  std::vector<CutMessage> cut_;

  std::uint32_t epoch_ = 0;
  std::optional<DriftStream> drift_;
  EmbeddingCache cache_;
};

/// One-shot convenience: a fresh simulator advanced to `epoch`.
EpochReport simulate_epoch(const DynamicGraph& g, const Plan& plan, const ModelProfile& profile,
                           const ClusterSpec& cluster, const SimulationOptions& options, std::uint32_t epoch);

/// Knobs of the partition -> assign -> fuse pipeline.
struct PipelineOptions {
  std::size_t size_cap = 0;  // 0: default_size_cap
  std::size_t max_rounds = 100;
  UpdateSchedule schedule = UpdateSchedule::sequential;
  TemporalTopology topology = TemporalTopology::fanout;
  bool fusion = true;
  MemoryCoefficients memory;
  Calibration calibration;
  const Predictor* predictor = nullptr;  // null: analytic workloads
};

struct PipelineResult {
  Plan plan;
  std::optional<ChunkGraph> chunks;       // PGC only
  std::optional<Assignment> assignment;   // PGC only
  std::optional<FusionPlan> fusion;       // PGC with fusion only
  std::size_t rounds = 0;
  bool converged = true;
};

/// Chunk workloads for assignment: the predictor when given, else true_cost.
std::vector<double> chunk_workloads(const ChunkGraph& cg, const PipelineOptions& options);

PipelineResult build_plan(Method method, const DynamicGraph& g, const ModelProfile& profile,
                          const ClusterSpec& cluster, const PipelineOptions& options);

/// Plan for PGC from an existing chunk graph and assignment, with an optional
/// fusion plan over the same chunks.
Plan pgc_plan(const ChunkGraph& cg, const Assignment& assignment, const FusionPlan* fusion);
/// Plan for a single-map baseline or the hybrid.
Plan baseline_plan(Method method, const DynamicGraph& g, std::uint32_t n_devices);
/// Baseline plan from explicit device maps; PSS and PTS need equal maps.
Plan plan_from_maps(Method method, DeviceMap structure, DeviceMap time, std::uint32_t n_devices);

struct MethodSummary {
  Method method = Method::pgc;
  EpochReport mean;                // averaged over epochs, epoch = count
  std::vector<EpochReport> epochs;
};

/// Runs every method over the same graph, profile, cluster and options.
std::vector<MethodSummary> compare_methods(const DynamicGraph& g, const ModelProfile& profile,
                                           const ClusterSpec& cluster, std::span<const Method> methods,
                                           std::uint32_t epochs, const PipelineOptions& pipeline,
                                           const SimulationOptions& simulation);

/// Averages a run of reports field by field.
EpochReport mean_report(std::span<const EpochReport> reports);

std::string format_table(std::span<const MethodSummary> summaries);
std::string format_csv(std::span<const MethodSummary> summaries);

}  // namespace stchunk
