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
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stchunk/assign.hpp"
#include "stchunk/fusion.hpp"
#include "stchunk/partition.hpp"
#include "stchunk/sim.hpp"
#include "stchunk/synthetic.hpp"

namespace stchunk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one run needs. The JSON form nests one object per section;
/// see default_config_json() for the key set.
struct RunConfig {
  std::uint64_t seed = 1;
  Method method = Method::pgc;
  std::string graph_input;  // edge-list file; empty: synthetic generator
  SyntheticSpec synthetic;  // rng_seed is taken from `seed`
  ModelProfile profile = ModelProfile::dysat_like();
  ClusterSpec cluster;
  std::size_t size_cap = 0;  // 0: default_size_cap
  std::size_t max_rounds = 100;
  UpdateSchedule schedule = UpdateSchedule::sequential;
  TemporalTopology topology = TemporalTopology::fanout;
  bool fusion = true;
  MemoryCoefficients memory;
  Calibration calibration;
  std::string predictor_path;  // empty: analytic workloads
  std::size_t predictor_samples = 50000;
  TrainOptions predictor_training;
  double predictor_noise = 0.05;
  StaleConfig stale;
  DriftSpec drift;  // seed is taken from `seed`
  std::uint32_t epochs = 10;

  RunConfig();

  PipelineOptions pipeline_options() const;
  SimulationOptions simulation_options() const;
  SyntheticSpec synthetic_spec() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Strict: unknown keys and ill-typed values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json default_config_json();

/// Applies `section.key=value` overrides to a config document. Values parse
/// as JSON when possible, otherwise as strings.
void apply_override(nlohmann::json& config, const std::string& dotted_key, const std::string& value);
/// Dotted paths of every leaf of the default config.
std::vector<std::string> config_keys();

// ---- artifact files ---------------------------------------------------------

inline constexpr const char* kGraphFile = "graph.dg";
inline constexpr const char* kChunksFile = "chunks.json";
inline constexpr const char* kAssignmentFile = "assignment.json";
inline constexpr const char* kFusionFile = "fusion.json";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kCompareFile = "compare.csv";
inline constexpr const char* kPredictorFile = "predictor.json";

/// Partition output. For PGC `chunks` are the propagated chunks; for the
/// baselines each chunk is one device's share (chunk k on device k) and the
/// hybrid adds the time-encoder shares.
struct PartitionArtifact {
  Method method = Method::pgc;
  std::size_t rounds = 0;
  bool converged = true;
  std::vector<std::vector<InstanceId>> chunks;
  std::vector<std::vector<InstanceId>> time_chunks;
};

nlohmann::json to_json(const DynamicGraph& g, const PartitionArtifact& partition,
                       const ChunkGraph* chunk_graph);
PartitionArtifact partition_from_json(const DynamicGraph& g, const nlohmann::json& j);

/// Rebuilds the chunk graph of a PGC partition and checks the stored chunk
/// ids are the canonical ones.
ChunkGraph chunk_graph_of(const DynamicGraph& g, const ModelProfile& profile, const PartitionArtifact& partition);

nlohmann::json to_json(Method method, const Assignment& assignment);
Assignment assignment_from_json(const nlohmann::json& j, std::size_t n_chunks);

nlohmann::json to_json(Method method, const FusionPlan& fusion, double memory_budget);
FusionPlan fusion_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MethodSummary& summary);
MethodSummary summary_from_json(const nlohmann::json& j);
EpochReport epoch_report_from_json(const nlohmann::json& j);

/// Reads a JSON artifact, naming the file in any error.
nlohmann::json read_json(const std::filesystem::path& path);
/// Writes JSON with two-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace stchunk
