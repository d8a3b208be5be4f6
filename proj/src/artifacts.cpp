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

#include "stchunk/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace stchunk {

using nlohmann::json;

RunConfig::RunConfig() {
  synthetic.total_vertices = 50000;
  synthetic.total_edges = 20000;
  synthetic.num_snapshots = 100;
  synthetic.edges_per_snapshot_mean = 200.0;
  synthetic.edges_per_snapshot_stddev = 100.0;
  synthetic.presence_length = LengthDistribution::uniform(1, 20);
  cluster.n_devices = 8;
}

PipelineOptions RunConfig::pipeline_options() const {
  PipelineOptions o;
  o.size_cap = size_cap;
  o.max_rounds = max_rounds;
  o.schedule = schedule;
  o.topology = topology;
  o.fusion = fusion;
  o.memory = memory;
  o.calibration = calibration;
  return o;
}

SimulationOptions RunConfig::simulation_options() const {
  SimulationOptions o;
  o.calibration = calibration;
  o.stale = stale;
  o.drift = drift;
  o.drift.seed = seed;
  return o;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  auto spec = synthetic;
  spec.rng_seed = seed;
  return spec;
}

json to_json(const RunConfig& c) {
  const auto& s = c.synthetic;
  return {
      {"seed", c.seed},
      {"method", to_string(c.method)},
      {"epochs", c.epochs},
      {"graph",
       {{"input", c.graph_input},
        {"total_vertices", s.total_vertices},
        {"total_edges", s.total_edges},
        {"snapshots", s.num_snapshots},
        {"edges_mean", s.edges_per_snapshot_mean},
        {"edges_stddev", s.edges_per_snapshot_stddev},
        {"length", {{"kind", to_string(s.presence_length.kind)}, {"a", s.presence_length.a}, {"b", s.presence_length.b}}},
        {"feature_dim", s.feature_dim},
        {"communities", s.communities},
        {"intra_community", s.intra_community}}},
      {"profile",
       {{"blocks", c.profile.blocks},
        {"spatial_msgs_per_block", c.profile.spatial_msgs_per_block},
        {"temporal_msgs_per_block", c.profile.temporal_msgs_per_block},
        {"temporal_fanout", to_string(c.profile.temporal_fanout)},
        {"embedding_dim", c.profile.embedding_dim},
        {"bytes_per_scalar", c.profile.bytes_per_scalar}}},
      {"cluster",
       {{"n_devices", c.cluster.n_devices},
        {"memory_budget", c.cluster.memory_budget},
        {"link_bandwidth", c.cluster.link_bandwidth},
        {"latency_ms", c.cluster.latency_ms},
        {"gradient_bytes", c.cluster.gradient_bytes}}},
      {"partition",
       {{"size_cap", c.size_cap},
        {"max_rounds", c.max_rounds},
        {"schedule", to_string(c.schedule)},
        {"topology", to_string(c.topology)}}},
      {"fusion",
       {{"enabled", c.fusion},
        {"fixed_bytes", c.memory.fixed_bytes},
        {"vertex_bytes", c.memory.vertex_bytes},
        {"edge_bytes", c.memory.edge_bytes},
        {"slot_bytes", c.memory.slot_bytes}}},
      {"calibration",
       {{"structure_fixed", c.calibration.structure_fixed},
        {"structure_edge", c.calibration.structure_edge},
        {"structure_vertex", c.calibration.structure_vertex},
        {"time_fixed", c.calibration.time_fixed},
        {"time_sequence", c.calibration.time_sequence}}},
      {"predictor",
       {{"path", c.predictor_path},
        {"samples", c.predictor_samples},
        {"noise", c.predictor_noise},
        {"epochs", c.predictor_training.epochs},
        {"batch_size", c.predictor_training.batch_size},
        {"learning_rate", c.predictor_training.learning_rate},
        {"validation_fraction", c.predictor_training.validation_fraction}}},
      {"stale",
       {{"mode", to_string(c.stale.mode)},
        {"fraction", c.stale.fraction},
        {"drift_dim", c.drift.dim},
        {"drift_mean_magnitude", c.drift.mean_magnitude},
        {"drift_decay", c.drift.decay},
        {"drift_initial_scale", c.drift.initial_scale}}},
  };
}

json default_config_json() { return to_json(RunConfig{}); }

namespace {

void check_keys(const json& given, const json& defaults, const std::string& prefix) {
  if (!given.is_object()) throw ConfigError("config " + (prefix.empty() ? "document" : "'" + prefix + "'") + " must be an object");
  for (const auto& [key, value] : given.items()) {
    auto path = prefix.empty() ? key : prefix + "." + key;
    auto it = defaults.find(key);
    if (it == defaults.end()) throw ConfigError("unknown config key '" + path + "'");
    if (it->is_object()) check_keys(value, *it, path);
  }
}

// Typed read of j[section][key] (section empty: top level).
class Reader {
 public:
  explicit Reader(const json& j) : j_(j) {}

  template <typename T>
  T get(const std::string& section, const std::string& key) const {
    const json& node = section.empty() ? j_ : j_.at(section);
    const json& v = node.at(key);
    const auto path = section.empty() ? key : section + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("'" + path + "' must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("'" + path + "' must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError("'" + path + "' must be a non-negative integer");
      auto raw = v.get<std::uint64_t>();
      if (raw > std::numeric_limits<T>::max()) throw ConfigError("'" + path + "' is out of range");
      return static_cast<T>(raw);
    } else {
      if (!v.is_number()) throw ConfigError("'" + path + "' must be a number");
      return v.get<T>();
    }
  }

 private:
  const json& j_;
};

template <typename F>
auto parse_enum(const std::string& path, const std::string& value, F&& parse) {
  try {
    return parse(value);
  } catch (const std::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

}  // namespace

RunConfig config_from_json(const json& given) {
  auto merged = default_config_json();
  check_keys(given, merged, "");
  merged.merge_patch(given);
  Reader r(merged);

  RunConfig c;
  c.seed = r.get<std::uint64_t>("", "seed");
  c.method = parse_enum("method", r.get<std::string>("", "method"), method_from_string);
  c.epochs = r.get<std::uint32_t>("", "epochs");
  if (c.epochs < 1) throw ConfigError("'epochs' must be >= 1");

  c.graph_input = r.get<std::string>("graph", "input");
  auto& s = c.synthetic;
  s.total_vertices = r.get<std::uint64_t>("graph", "total_vertices");
  s.total_edges = r.get<std::uint64_t>("graph", "total_edges");
  s.num_snapshots = r.get<Timestep>("graph", "snapshots");
  s.edges_per_snapshot_mean = r.get<double>("graph", "edges_mean");
  s.edges_per_snapshot_stddev = r.get<double>("graph", "edges_stddev");
  Reader length(merged.at("graph"));
  s.presence_length.kind =
      parse_enum("graph.length.kind", length.get<std::string>("length", "kind"), length_kind_from_string);
  s.presence_length.a = length.get<double>("length", "a");
  s.presence_length.b = length.get<double>("length", "b");
  s.feature_dim = r.get<std::uint32_t>("graph", "feature_dim");
  s.communities = r.get<std::uint32_t>("graph", "communities");
  s.intra_community = r.get<double>("graph", "intra_community");

  auto& p = c.profile;
  p.blocks = r.get<std::uint32_t>("profile", "blocks");
  p.spatial_msgs_per_block = r.get<std::uint32_t>("profile", "spatial_msgs_per_block");
  p.temporal_msgs_per_block = r.get<std::uint32_t>("profile", "temporal_msgs_per_block");
  p.temporal_fanout =
      parse_enum("profile.temporal_fanout", r.get<std::string>("profile", "temporal_fanout"), fanout_from_string);
  p.embedding_dim = r.get<std::uint32_t>("profile", "embedding_dim");
  p.bytes_per_scalar = r.get<std::uint32_t>("profile", "bytes_per_scalar");

  c.cluster.n_devices = r.get<std::uint32_t>("cluster", "n_devices");
  c.cluster.memory_budget = r.get<double>("cluster", "memory_budget");
  c.cluster.link_bandwidth = r.get<double>("cluster", "link_bandwidth");
  c.cluster.latency_ms = r.get<double>("cluster", "latency_ms");
  c.cluster.gradient_bytes = r.get<double>("cluster", "gradient_bytes");

  c.size_cap = r.get<std::size_t>("partition", "size_cap");
  c.max_rounds = r.get<std::size_t>("partition", "max_rounds");
  c.schedule = parse_enum("partition.schedule", r.get<std::string>("partition", "schedule"), schedule_from_string);
  c.topology = parse_enum("partition.topology", r.get<std::string>("partition", "topology"), topology_from_string);

  c.fusion = r.get<bool>("fusion", "enabled");
  c.memory.fixed_bytes = r.get<double>("fusion", "fixed_bytes");
  c.memory.vertex_bytes = r.get<double>("fusion", "vertex_bytes");
  c.memory.edge_bytes = r.get<double>("fusion", "edge_bytes");
  c.memory.slot_bytes = r.get<double>("fusion", "slot_bytes");

  c.calibration.structure_fixed = r.get<double>("calibration", "structure_fixed");
  c.calibration.structure_edge = r.get<double>("calibration", "structure_edge");
  c.calibration.structure_vertex = r.get<double>("calibration", "structure_vertex");
  c.calibration.time_fixed = r.get<double>("calibration", "time_fixed");
  c.calibration.time_sequence = r.get<double>("calibration", "time_sequence");

  c.predictor_path = r.get<std::string>("predictor", "path");
  c.predictor_samples = r.get<std::size_t>("predictor", "samples");
  c.predictor_noise = r.get<double>("predictor", "noise");
  c.predictor_training.epochs = r.get<std::uint32_t>("predictor", "epochs");
  c.predictor_training.batch_size = r.get<std::uint32_t>("predictor", "batch_size");
  c.predictor_training.learning_rate = r.get<double>("predictor", "learning_rate");
  c.predictor_training.validation_fraction = r.get<double>("predictor", "validation_fraction");

  c.stale.mode = parse_enum("stale.mode", r.get<std::string>("stale", "mode"), stale_mode_from_string);
  c.stale.fraction = r.get<double>("stale", "fraction");
  c.drift.dim = r.get<std::uint32_t>("stale", "drift_dim");
  c.drift.mean_magnitude = r.get<double>("stale", "drift_mean_magnitude");
  c.drift.decay = r.get<double>("stale", "drift_decay");
  c.drift.initial_scale = r.get<double>("stale", "drift_initial_scale");

  try {
    c.profile.validate();
    c.cluster.validate();
    c.memory.validate();
    c.calibration.validate();
    c.stale.validate();
    c.drift.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.max_rounds < 1) throw ConfigError("'partition.max_rounds' must be >= 1");
  c.predictor_training.seed = c.seed;
  return c;
}

namespace {

void collect_keys(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    auto path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      collect_keys(value, path, out);
    } else {
      out.push_back(path);
    }
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  collect_keys(default_config_json(), "", keys);
  return keys;
}

void apply_override(json& config, const std::string& dotted_key, const std::string& value) {
  const auto defaults = default_config_json();
  const json* def = &defaults;
  json* node = &config;
  std::stringstream parts(dotted_key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  if (path.empty()) throw ConfigError("empty config key");
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto it = def->find(path[i]);
    if (it == def->end()) throw ConfigError("unknown config key '" + dotted_key + "'");
    def = &*it;
    if (i + 1 == path.size()) break;
    if (!node->contains(path[i]) || !(*node)[path[i]].is_object()) (*node)[path[i]] = json::object();
    node = &(*node)[path[i]];
  }
  if (def->is_object()) throw ConfigError("config key '" + dotted_key + "' names a section");
  json parsed;
  if (def->is_string()) {
    parsed = value;
  } else {
    parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) throw ConfigError("'" + dotted_key + "': cannot parse '" + value + "'");
  }
  (*node)[path.back()] = std::move(parsed);
}

// ---- artifacts -------------------------------------------------------------

namespace {

json members_json(const DynamicGraph& g, std::span<const InstanceId> members) {
  json out = json::array();
  for (auto v : members) {
    const auto& inst = g.instance(v);
    out.push_back({inst.entity, inst.t});
  }
  return out;
}

std::vector<InstanceId> members_from_json(const DynamicGraph& g, const json& j) {
  if (!j.is_array()) throw ArtifactError("members must be a list of [entity, t] pairs");
  std::vector<InstanceId> out;
  out.reserve(j.size());
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() || !pair[1].is_number_unsigned()) {
      throw ArtifactError("members must be a list of [entity, t] pairs");
    }
    VertexInstance inst{pair[0].get<EntityId>(), pair[1].get<Timestep>()};
    auto id = g.find(inst);
    if (!id) {
      throw ArtifactError("member (" + std::to_string(inst.entity) + ", " + std::to_string(inst.t) +
                          ") is not in the graph");
    }
    out.push_back(*id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

json stats_json(const ChunkStats& s) {
  return {{"n_vertices", s.n_vertices},
          {"n_edges", s.n_edges},
          {"total_sequence_length", s.total_sequence_length},
          {"feature_dim", s.feature_dim},
          {"layer_dims", s.layer_dims}};
}

json shares_json(const DynamicGraph& g, const std::vector<std::vector<InstanceId>>& shares) {
  json out = json::array();
  for (std::size_t k = 0; k < shares.size(); ++k) {
    out.push_back({{"id", k}, {"members", members_json(g, shares[k])}});
  }
  return out;
}

std::vector<std::vector<InstanceId>> shares_from_json(const DynamicGraph& g, const json& j) {
  if (!j.is_array()) throw ArtifactError("chunk list must be an array");
  std::vector<std::vector<InstanceId>> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& c = j[k];
    if (!c.is_object() || !c.contains("id") || !c.contains("members")) {
      throw ArtifactError("chunk entry " + std::to_string(k) + " needs 'id' and 'members'");
    }
    if (c["id"] != k) throw ArtifactError("chunk ids must run 0, 1, ... in order");
    out.push_back(members_from_json(g, c["members"]));
  }
  return out;
}

void check_cover(const DynamicGraph& g, const std::vector<std::vector<InstanceId>>& shares, const char* what) {
  std::vector<std::uint8_t> seen(g.num_instances(), 0);
  for (const auto& share : shares) {
    for (auto v : share) {
      if (seen[v]++) throw ArtifactError(std::string(what) + " list instance " + std::to_string(v) + " twice");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ArtifactError(std::string(what) + " do not cover every instance");
  }
}

Method method_field(const json& j) {
  if (!j.is_object() || !j.contains("method") || !j["method"].is_string()) {
    throw ArtifactError("artifact has no 'method'");
  }
  return method_from_string(j["method"].get<std::string>());
}

}  // namespace

json to_json(const DynamicGraph& g, const PartitionArtifact& partition, const ChunkGraph* chunk_graph) {
  json j = {{"method", to_string(partition.method)},
            {"rounds", partition.rounds},
            {"converged", partition.converged}};
  if (chunk_graph) {
    json chunks = json::array();
    for (const auto& c : chunk_graph->chunks()) {
      chunks.push_back({{"id", c.id},
                        {"members", members_json(g, c.members)},
                        {"stats", stats_json(c.stats)},
                        {"halo_size", c.halo.size()}});
    }
    j["chunks"] = std::move(chunks);
    json inter = json::array();
    for (const auto& [key, bytes] : chunk_graph->inter_cost_entries()) inter.push_back({key.first, key.second, bytes});
    j["inter_cost"] = std::move(inter);
    j["internal_bytes"] = chunk_graph->internal_bytes();
  } else {
    j["chunks"] = shares_json(g, partition.chunks);
  }
  if (partition.method == Method::pss_ts) j["time_chunks"] = shares_json(g, partition.time_chunks);
  return j;
}

PartitionArtifact partition_from_json(const DynamicGraph& g, const json& j) {
  PartitionArtifact p;
  p.method = method_field(j);
  if (!j.contains("chunks")) throw ArtifactError("partition has no 'chunks'");
  p.rounds = j.value("rounds", std::size_t{0});
  p.converged = j.value("converged", true);
  p.chunks = shares_from_json(g, j["chunks"]);
  check_cover(g, p.chunks, "chunks");
  if (p.method == Method::pss_ts) {
    if (!j.contains("time_chunks")) throw ArtifactError("pss-ts partition has no 'time_chunks'");
    p.time_chunks = shares_from_json(g, j["time_chunks"]);
    check_cover(g, p.time_chunks, "time chunks");
  }
  return p;
}

ChunkGraph chunk_graph_of(const DynamicGraph& g, const ModelProfile& profile, const PartitionArtifact& partition) {
  std::vector<std::uint64_t> membership(g.num_instances());
  for (std::size_t k = 0; k < partition.chunks.size(); ++k) {
    for (auto v : partition.chunks[k]) membership[v] = k;
  }
  auto cg = ChunkGraph::from_membership(g, profile, membership);
  for (std::size_t k = 0; k < partition.chunks.size(); ++k) {
    if (k >= cg.size() || cg.chunk(static_cast<ChunkId>(k)).members != partition.chunks[k]) {
      throw ArtifactError("chunk ids must follow each chunk's smallest instance");
    }
  }
  return cg;
}

json to_json(Method method, const Assignment& a) {
  json devices = json::array();
  for (DeviceId d = 0; d < a.n_devices(); ++d) {
    devices.push_back({{"device", d}, {"chunks", a.queue[d]}, {"load", a.load[d]}});
  }
  return {{"method", to_string(method)},
          {"n_devices", a.n_devices()},
          {"target_load", a.target_load},
          {"devices", std::move(devices)}};
}

Assignment assignment_from_json(const json& j, std::size_t n_chunks) {
  method_field(j);
  if (!j.contains("devices") || !j["devices"].is_array()) throw ArtifactError("assignment has no 'devices'");
  Assignment a;
  a.target_load = j.value("target_load", 0.0);
  a.device_of_chunk.assign(n_chunks, static_cast<DeviceId>(-1));
  const auto& devices = j["devices"];
  for (std::size_t d = 0; d < devices.size(); ++d) {
    const auto& dev = devices[d];
    if (!dev.contains("device") || dev["device"] != d || !dev.contains("chunks")) {
      throw ArtifactError("assignment devices must run 0, 1, ... in order");
    }
    auto queue = dev["chunks"].get<std::vector<ChunkId>>();
    for (auto c : queue) {
      if (c >= n_chunks) throw ArtifactError("assignment names unknown chunk " + std::to_string(c));
      if (a.device_of_chunk[c] != static_cast<DeviceId>(-1)) {
        throw ArtifactError("chunk " + std::to_string(c) + " is assigned twice");
      }
      a.device_of_chunk[c] = static_cast<DeviceId>(d);
    }
    a.queue.push_back(std::move(queue));
    a.load.push_back(dev.value("load", 0.0));
  }
  for (std::size_t c = 0; c < n_chunks; ++c) {
    if (a.device_of_chunk[c] == static_cast<DeviceId>(-1)) {
      throw ArtifactError("chunk " + std::to_string(c) + " is not assigned");
    }
  }
  return a;
}

json to_json(Method method, const FusionPlan& fusion, double memory_budget) {
  json devices = json::array();
  for (std::size_t d = 0; d < fusion.devices.size(); ++d) {
    json groups = json::array();
    for (const auto& grp : fusion.devices[d]) {
      groups.push_back({{"chunks", grp.chunks},
                        {"loaded_vertices", grp.loaded_vertices},
                        {"memory_bytes", grp.memory_bytes},
                        {"saved_loads", grp.saved_loads},
                        {"fused_traffic", grp.fused_traffic}});
    }
    devices.push_back({{"device", d}, {"groups", std::move(groups)}});
  }
  return {{"method", to_string(method)},
          {"memory_budget", memory_budget},
          {"saved_loads", fusion.saved_loads()},
          {"group_count", fusion.group_count()},
          {"devices", std::move(devices)}};
}

FusionPlan fusion_from_json(const json& j) {
  method_field(j);
  if (!j.contains("devices") || !j["devices"].is_array()) throw ArtifactError("fusion plan has no 'devices'");
  FusionPlan plan;
  for (const auto& dev : j["devices"]) {
    std::vector<FusionGroup> groups;
    for (const auto& grp : dev.at("groups")) {
      FusionGroup f;
      f.chunks = grp.at("chunks").get<std::vector<ChunkId>>();
      f.loaded_vertices = grp.value("loaded_vertices", std::uint64_t{0});
      f.memory_bytes = grp.value("memory_bytes", 0.0);
      f.saved_loads = grp.value("saved_loads", std::uint64_t{0});
      f.fused_traffic = grp.value("fused_traffic", std::uint64_t{0});
      groups.push_back(std::move(f));
    }
    plan.devices.push_back(std::move(groups));
  }
  return plan;
}

json to_json(const MethodSummary& summary) {
  json epochs = json::array();
  for (const auto& e : summary.epochs) epochs.push_back(to_json(e));
  return {{"method", to_string(summary.method)}, {"mean", to_json(summary.mean)}, {"epochs", std::move(epochs)}};
}

EpochReport epoch_report_from_json(const json& j) {
  EpochReport r;
  try {
    r.method = j.at("method").get<std::string>();
    r.epoch = j.at("epoch").get<std::uint32_t>();
    r.device_compute_ms = j.at("device_compute_ms").get<std::vector<double>>();
    r.device_time_ms = j.at("device_time_ms").get<std::vector<double>>();
    r.spatial_bytes = j.at("spatial_bytes").get<std::uint64_t>();
    r.temporal_bytes = j.at("temporal_bytes").get<std::uint64_t>();
    r.shuffle_bytes = j.at("shuffle_bytes").get<std::uint64_t>();
    r.gradient_sync_bytes = j.at("gradient_sync_bytes").get<std::uint64_t>();
    r.loading_bytes = j.at("loading_bytes").get<std::uint64_t>();
    r.padding_packed = j.at("padding_packed").get<std::uint64_t>();
    r.padding_naive = j.at("padding_naive").get<std::uint64_t>();
    r.lambda = j.at("lambda").get<double>();
    r.wall_ms = j.at("wall_ms").get<double>();
    const auto& st = j.at("stale");
    r.stale.theta = st.at("theta").get<double>();
    r.stale.max_distance = st.at("max_distance").get<double>();
    r.stale.sent_bytes = st.at("sent_bytes").get<std::uint64_t>();
    r.stale.avoided_bytes = st.at("avoided_bytes").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("malformed epoch report: ") + e.what());
  }
  return r;
}

MethodSummary summary_from_json(const json& j) {
  MethodSummary s;
  s.method = method_field(j);
  if (!j.contains("mean")) throw ArtifactError("method summary has no 'mean'");
  s.mean = epoch_report_from_json(j["mean"]);
  for (const auto& e : j.value("epochs", json::array())) s.epochs.push_back(epoch_report_from_json(e));
  return s;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ArtifactError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << text;
  if (!out) throw ArtifactError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace stchunk
