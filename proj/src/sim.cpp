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

#include "stchunk/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "stchunk/messages.hpp"

namespace stchunk {

std::string to_string(Method method) {
  switch (method) {
    case Method::pgc: return "pgc";
    case Method::pss: return "pss";
    case Method::pts: return "pts";
    case Method::pss_ts: return "pss-ts";
  }
  return "pgc";
}

Method method_from_string(const std::string& name) {
  if (name == "pgc") return Method::pgc;
  if (name == "pss") return Method::pss;
  if (name == "pts") return Method::pts;
  if (name == "pss-ts") return Method::pss_ts;
  throw SimError("unknown method '" + name + "' (expected pgc, pss, pts or pss-ts)");
}

void ClusterSpec::validate() const {
  if (n_devices < 1) throw SimError("cluster needs at least one device");
  for (double x : {memory_budget, link_bandwidth, latency_ms, gradient_bytes}) {
    if (!(x > 0.0) || !std::isfinite(x)) throw SimError("cluster parameters must be finite and > 0");
  }
}

void Plan::validate(const DynamicGraph& g) const {
  const auto n = g.num_instances();
  if (structure_device.size() != n || time_device.size() != n) {
    throw SimError("plan covers " + std::to_string(structure_device.size()) + " instances, graph has " +
                   std::to_string(n));
  }
  std::vector<std::uint8_t> seen_structure(n, 0), seen_time(n, 0);
  std::map<std::uint32_t, DeviceId> group_device;
  for (const auto& unit : units) {
    if (unit.device >= n_devices) throw SimError("work unit on device " + std::to_string(unit.device));
    auto [it, fresh] = group_device.emplace(unit.load_group, unit.device);
    if (!fresh && it->second != unit.device) {
      throw SimError("load group " + std::to_string(unit.load_group) + " spans devices");
    }
    for (auto v : unit.members) {
      if (v >= n) throw SimError("work unit member " + std::to_string(v) + " is not in the graph");
      if (unit.structure) {
        if (seen_structure[v]++ || structure_device[v] != unit.device) {
          throw SimError("instance " + std::to_string(v) + " has an inconsistent structure placement");
        }
      }
      if (unit.time) {
        if (seen_time[v]++ || time_device[v] != unit.device) {
          throw SimError("instance " + std::to_string(v) + " has an inconsistent time placement");
        }
      }
    }
  }
  for (InstanceId v = 0; v < n; ++v) {
    if (!seen_structure[v] || !seen_time[v]) {
      throw SimError("instance " + std::to_string(v) + " is not covered by the plan's work units");
    }
    if (structure_device[v] >= n_devices || time_device[v] >= n_devices) {
      throw SimError("instance " + std::to_string(v) + " is mapped to a device outside the cluster");
    }
  }
}

double StaleReport::reduction() const {
  auto due = sent_bytes + avoided_bytes;
  return due == 0 ? 0.0 : static_cast<double>(avoided_bytes) / static_cast<double>(due);
}

nlohmann::json to_json(const EpochReport& r) {
  return {{"method", r.method},
          {"epoch", r.epoch},
          {"device_compute_ms", r.device_compute_ms},
          {"device_time_ms", r.device_time_ms},
          {"spatial_bytes", r.spatial_bytes},
          {"temporal_bytes", r.temporal_bytes},
          {"shuffle_bytes", r.shuffle_bytes},
          {"traffic_bytes", r.traffic_bytes()},
          {"gradient_sync_bytes", r.gradient_sync_bytes},
          {"loading_bytes", r.loading_bytes},
          {"padding_packed", r.padding_packed},
          {"padding_naive", r.padding_naive},
          {"lambda", r.lambda},
          {"wall_ms", r.wall_ms},
          {"stale",
           {{"theta", r.stale.theta},
            {"max_distance", r.stale.max_distance},
            {"sent_bytes", r.stale.sent_bytes},
            {"avoided_bytes", r.stale.avoided_bytes},
            {"reduction", r.stale.reduction()}}}};
}

namespace {

// Runs of consecutive sequence positions of each entity inside a unit.
std::vector<SequenceSpec> unit_segments(const DynamicGraph& g, std::span<const InstanceId> members) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> keys;  // (entity index, position)
  keys.reserve(members.size());
  for (auto v : members) keys.emplace_back(g.entity_index(v), g.sequence_position(v));
  std::sort(keys.begin(), keys.end());
  std::vector<SequenceSpec> out;
  for (std::size_t i = 0; i < keys.size();) {
    auto j = i + 1;
    while (j < keys.size() && keys[j].first == keys[i].first && keys[j].second == keys[j - 1].second + 1) ++j;
    out.push_back({g.entity_id(keys[i].first), static_cast<std::uint32_t>(j - i)});
    i = j;
  }
  return out;
}

constexpr std::uint32_t kNotBoundary = std::numeric_limits<std::uint32_t>::max();

}  // namespace

Simulator::Simulator(const DynamicGraph& g, const ModelProfile& profile, const ClusterSpec& cluster, Plan plan,
                     SimulationOptions options)
    : g_(&g), profile_(profile), cluster_(cluster), plan_(std::move(plan)), options_(std::move(options)) {
  profile_.validate();
  cluster_.validate();
  options_.calibration.validate();
  options_.stale.validate();
  if (plan_.n_devices != cluster_.n_devices) {
    throw SimError("plan uses " + std::to_string(plan_.n_devices) + " devices, cluster has " +
                   std::to_string(cluster_.n_devices));
  }
  plan_.validate(g);
  const auto n_dev = cluster_.n_devices;
  const std::uint64_t scalar_bytes = profile_.bytes_per_scalar;

  // Compute, data loading and padding are fixed for a plan.
  compute_ms_.assign(n_dev, 0.0);
  UnitAnalyzer analyzer(g, profile_);
  struct LoadGroup {
    std::vector<InstanceId> members;
    bool structure = false;
    bool time = false;
  };
  std::map<std::uint32_t, LoadGroup> groups;
  for (const auto& unit : plan_.units) {
    auto stats = analyzer.stats(unit.members);
    if (unit.structure) compute_ms_[unit.device] += true_cost(stats, Encoder::structure, options_.calibration);
    if (unit.time) compute_ms_[unit.device] += true_cost(stats, Encoder::time, options_.calibration);
    // Units of both phases may share a group id; phases load separately.
    auto& grp = groups[unit.load_group * 2 + (unit.structure ? 0 : 1)];
    grp.members.insert(grp.members.end(), unit.members.begin(), unit.members.end());
    grp.structure |= unit.structure;
    grp.time |= unit.time;
  }
  for (auto& [id, grp] : groups) {
    std::sort(grp.members.begin(), grp.members.end());
    auto halo = analyzer.halo(grp.members, grp.structure, grp.time);
    loading_bytes_ += (grp.members.size() + halo.size()) * g.feature_dim() * scalar_bytes;
    if (grp.time && !grp.members.empty()) {
      auto batch = pack_sequences(unit_segments(g, grp.members));
      padding_packed_ += batch.padding_count;
      padding_naive_ += batch.naive_padding;
    }
  }

  // Hybrid plans move embeddings between the phases of every block.
  shuffle_out_.assign(n_dev, 0);
  shuffle_peers_.assign(n_dev, std::vector<std::uint8_t>(n_dev, 0));
  const std::uint64_t embedding_bytes = std::uint64_t{profile_.embedding_dim} * scalar_bytes;
  for (InstanceId v = 0; v < g.num_instances(); ++v) {
    auto s = plan_.structure_device[v];
    auto t = plan_.time_device[v];
    if (s == t) continue;
    shuffle_out_[s] += profile_.blocks * embedding_bytes;
    shuffle_peers_[s][t] = 1;
    if (profile_.blocks > 1) {
      shuffle_out_[t] += (profile_.blocks - 1) * embedding_bytes;
      shuffle_peers_[t][s] = 1;
    }
  }

  std::vector<std::uint32_t> boundary_index(g.num_instances(), kNotBoundary);
  auto sender_index = [&](InstanceId v) {
    if (boundary_index[v] == kNotBoundary) {
      boundary_index[v] = static_cast<std::uint32_t>(boundary_.size());
      boundary_.push_back(v);
    }
    return boundary_index[v];
  };
  for_each_message_link(g, profile_, [&](const MessageLink& m) {
    const auto& map = m.kind == EdgeKind::spatial ? plan_.structure_device : plan_.time_device;
    auto da = map[m.a];
    auto db = map[m.b];
    if (da == db) return;
    if (m.bytes_ab > 0) cut_.push_back({sender_index(m.a), da, db, m.kind, m.bytes_ab});
    if (m.bytes_ba > 0) cut_.push_back({sender_index(m.b), db, da, m.kind, m.bytes_ba});
  });

  if (options_.stale.mode != StaleMode::off) {
    drift_.emplace(boundary_.size(), options_.drift);
    cache_ = EmbeddingCache(boundary_.size(), options_.drift.dim);
  }
}

EpochReport Simulator::run_epoch() {
  ++epoch_;
  const auto n_dev = cluster_.n_devices;
  EpochReport r;
  r.method = to_string(plan_.method);
  r.epoch = epoch_;
  r.device_compute_ms = compute_ms_;
  r.loading_bytes = loading_bytes_;
  r.padding_packed = padding_packed_;
  r.padding_naive = padding_naive_;

  std::vector<std::uint8_t> sent(boundary_.size(), 1);
  if (drift_) {
    std::vector<std::uint32_t> all(boundary_.size());
    std::iota(all.begin(), all.end(), 0u);
    if (epoch_ > 1) drift_->advance();
    auto batch = drift_->gather(all);
    if (epoch_ > 1) {
      if (options_.loss.size() < epoch_ - 1) {
        options_.loss = synthetic_loss_trace(std::max<std::uint32_t>(epoch_, 2 * epoch_), 2.0, 0.05, 0.1);
      }
      r.stale.max_distance = max_cached_distance(batch, cache_);
      r.stale.theta = threshold(options_.loss, epoch_, r.stale.max_distance, options_.stale);
    }
    auto decision = filter_transmissions(batch, cache_, r.stale.theta);
    std::fill(sent.begin(), sent.end(), 0);
    for (auto k : decision.send) sent[k] = 1;
  }

  std::vector<std::uint64_t> out = shuffle_out_;
  auto peers = shuffle_peers_;
  for (const auto& m : cut_) {
    if (!sent[m.sender]) {
      r.stale.avoided_bytes += m.bytes;
      continue;
    }
    (m.kind == EdgeKind::spatial ? r.spatial_bytes : r.temporal_bytes) += m.bytes;
    out[m.from] += m.bytes;
    peers[m.from][m.to] = 1;
  }
  r.stale.sent_bytes = r.spatial_bytes + r.temporal_bytes;
  r.shuffle_bytes = std::accumulate(shuffle_out_.begin(), shuffle_out_.end(), std::uint64_t{0});

  // Ring all-reduce: each device sends 2 (n - 1) / n of the gradient.
  double sync_per_device =
      n_dev > 1 ? 2.0 * static_cast<double>(n_dev - 1) / n_dev * cluster_.gradient_bytes : 0.0;
  r.gradient_sync_bytes = static_cast<std::uint64_t>(std::llround(sync_per_device * n_dev));
  const double layers = static_cast<double>(profile_.blocks) *
                        (profile_.spatial_msgs_per_block + profile_.temporal_msgs_per_block);

  r.device_time_ms.resize(n_dev);
  for (DeviceId d = 0; d < n_dev; ++d) {
    auto n_peers = std::count(peers[d].begin(), peers[d].end(), std::uint8_t{1});
    double comm = (static_cast<double>(out[d]) + sync_per_device) / cluster_.link_bandwidth +
                  cluster_.latency_ms * layers * static_cast<double>(n_peers);
    r.device_time_ms[d] = compute_ms_[d] + comm;
  }
  r.wall_ms = *std::max_element(r.device_time_ms.begin(), r.device_time_ms.end());
  r.lambda = lambda_divergence(r.device_time_ms);
  return r;
}

EpochReport simulate_epoch(const DynamicGraph& g, const Plan& plan, const ModelProfile& profile,
                           const ClusterSpec& cluster, const SimulationOptions& options, std::uint32_t epoch) {
  if (epoch < 1) throw SimError("epochs are numbered from 1");
  Simulator sim(g, profile, cluster, plan, options);
  EpochReport r;
  for (std::uint32_t k = 1; k <= epoch; ++k) r = sim.run_epoch();
  return r;
}

std::vector<double> chunk_workloads(const ChunkGraph& cg, const PipelineOptions& options) {
  std::vector<double> w;
  w.reserve(cg.size());
  for (const auto& c : cg.chunks()) {
    w.push_back(options.predictor ? options.predictor->predict(c.stats) : true_cost(c.stats, options.calibration));
  }
  return w;
}

Plan pgc_plan(const ChunkGraph& cg, const Assignment& assignment, const FusionPlan* fusion) {
  Plan plan;
  plan.method = Method::pgc;
  plan.n_devices = assignment.n_devices();
  plan.structure_device = device_map(cg, assignment);
  plan.time_device = plan.structure_device;
  for (const auto& c : cg.chunks()) {
    plan.units.push_back({assignment.device_of_chunk[c.id], true, true, c.members, c.id});
  }
  if (fusion) {
    if (fusion->devices.size() != assignment.n_devices()) throw SimError("fusion plan does not match assignment");
    std::uint32_t next = 0;
    std::vector<std::uint8_t> covered(cg.size(), 0);
    for (DeviceId d = 0; d < fusion->devices.size(); ++d) {
      for (const auto& group : fusion->devices[d]) {
        for (auto c : group.chunks) {
          if (c >= cg.size() || covered[c]++) throw SimError("fusion plan lists chunk " + std::to_string(c) + " twice");
          plan.units[c].load_group = next;
        }
        ++next;
      }
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
      throw SimError("fusion plan does not cover every chunk");
    }
  }
  return plan;
}

namespace {

std::vector<WorkUnit> units_of_map(const DeviceMap& map, std::uint32_t n_devices, bool structure, bool time) {
  std::vector<WorkUnit> units(n_devices);
  for (DeviceId d = 0; d < n_devices; ++d) {
    units[d].device = d;
    units[d].load_group = d;
    units[d].structure = structure;
    units[d].time = time;
  }
  for (InstanceId v = 0; v < map.size(); ++v) {
    if (map[v] >= n_devices) throw SimError("instance " + std::to_string(v) + " mapped to missing device");
    units[map[v]].members.push_back(v);
  }
  std::erase_if(units, [](const WorkUnit& u) { return u.members.empty(); });
  return units;
}

}  // namespace

Plan plan_from_maps(Method method, DeviceMap structure, DeviceMap time, std::uint32_t n_devices) {
  if (method == Method::pgc) throw SimError("plan_from_maps does not build PGC plans");
  Plan plan;
  plan.method = method;
  plan.n_devices = n_devices;
  plan.structure_device = std::move(structure);
  plan.time_device = std::move(time);
  if (method == Method::pss_ts) {
    plan.units = units_of_map(plan.structure_device, n_devices, true, false);
    auto time_units = units_of_map(plan.time_device, n_devices, false, true);
    plan.units.insert(plan.units.end(), time_units.begin(), time_units.end());
  } else {
    if (plan.structure_device != plan.time_device) {
      throw SimError(to_string(method) + " places both encoders on the same map");
    }
    plan.units = units_of_map(plan.structure_device, n_devices, true, true);
  }
  return plan;
}

Plan baseline_plan(Method method, const DynamicGraph& g, std::uint32_t n_devices) {
  switch (method) {
    case Method::pss: {
      auto map = partition_pss(g, n_devices);
      return plan_from_maps(method, map, map, n_devices);
    }
    case Method::pts: {
      auto map = partition_pts(g, n_devices);
      return plan_from_maps(method, map, map, n_devices);
    }
    case Method::pss_ts: {
      auto hybrid = partition_pss_ts(g, n_devices);
      return plan_from_maps(method, std::move(hybrid.structure), std::move(hybrid.time), n_devices);
    }
    case Method::pgc: break;
  }
  throw SimError("baseline_plan does not build PGC plans");
}

PipelineResult build_plan(Method method, const DynamicGraph& g, const ModelProfile& profile,
                          const ClusterSpec& cluster, const PipelineOptions& options) {
  cluster.validate();
  PipelineResult result;
  if (method != Method::pgc) {
    result.plan = baseline_plan(method, g, cluster.n_devices);
    return result;
  }
  PropagationOptions prop;
  prop.size_cap = options.size_cap ? options.size_cap : default_size_cap(g.num_instances(), cluster.n_devices);
  prop.max_rounds = options.max_rounds;
  prop.schedule = options.schedule;
  prop.topology = options.topology;
  auto propagated = propagate(g, profile, prop);
  result.rounds = propagated.rounds;
  result.converged = propagated.converged;
  result.chunks = std::move(propagated.chunks);
  auto workloads = chunk_workloads(*result.chunks, options);
  result.assignment = assign_chunks(*result.chunks, workloads, cluster.n_devices);
  if (options.fusion) {
    result.fusion = plan_spatial_fusion(g, profile, *result.chunks, *result.assignment, cluster.memory_budget,
                                        options.memory);
  }
  result.plan = pgc_plan(*result.chunks, *result.assignment, result.fusion ? &*result.fusion : nullptr);
  return result;
}

EpochReport mean_report(std::span<const EpochReport> reports) {
  if (reports.empty()) throw SimError("mean of zero reports");
  EpochReport m;
  m.method = reports.front().method;
  m.epoch = static_cast<std::uint32_t>(reports.size());
  const auto n = static_cast<double>(reports.size());
  const auto devices = reports.front().device_time_ms.size();
  m.device_compute_ms.assign(devices, 0.0);
  m.device_time_ms.assign(devices, 0.0);
  double spatial = 0, temporal = 0, shuffle = 0, sync = 0, loading = 0, packed = 0, naive = 0, sent = 0,
         avoided = 0;
  m.lambda = 0.0;
  for (const auto& r : reports) {
    for (std::size_t d = 0; d < devices; ++d) {
      m.device_compute_ms[d] += r.device_compute_ms[d] / n;
      m.device_time_ms[d] += r.device_time_ms[d] / n;
    }
    spatial += static_cast<double>(r.spatial_bytes);
    temporal += static_cast<double>(r.temporal_bytes);
    shuffle += static_cast<double>(r.shuffle_bytes);
    sync += static_cast<double>(r.gradient_sync_bytes);
    loading += static_cast<double>(r.loading_bytes);
    packed += static_cast<double>(r.padding_packed);
    naive += static_cast<double>(r.padding_naive);
    sent += static_cast<double>(r.stale.sent_bytes);
    avoided += static_cast<double>(r.stale.avoided_bytes);
    m.lambda += r.lambda / n;
    m.wall_ms += r.wall_ms / n;
    m.stale.theta += r.stale.theta / n;
    m.stale.max_distance += r.stale.max_distance / n;
  }
  auto avg = [n](double x) { return static_cast<std::uint64_t>(std::llround(x / n)); };
  m.spatial_bytes = avg(spatial);
  m.temporal_bytes = avg(temporal);
  m.shuffle_bytes = avg(shuffle);
  m.gradient_sync_bytes = avg(sync);
  m.loading_bytes = avg(loading);
  m.padding_packed = avg(packed);
  m.padding_naive = avg(naive);
  m.stale.sent_bytes = avg(sent);
  m.stale.avoided_bytes = avg(avoided);
  return m;
}

std::vector<MethodSummary> compare_methods(const DynamicGraph& g, const ModelProfile& profile,
                                           const ClusterSpec& cluster, std::span<const Method> methods,
                                           std::uint32_t epochs, const PipelineOptions& pipeline,
                                           const SimulationOptions& simulation) {
  if (epochs < 1) throw SimError("compare needs epochs >= 1");
  std::vector<MethodSummary> out;
  for (auto method : methods) {
    auto built = build_plan(method, g, profile, cluster, pipeline);
    Simulator sim(g, profile, cluster, std::move(built.plan), simulation);
    MethodSummary summary;
    summary.method = method;
    for (std::uint32_t r = 1; r <= epochs; ++r) summary.epochs.push_back(sim.run_epoch());
    summary.mean = mean_report(summary.epochs);
    out.push_back(std::move(summary));
  }
  return out;
}

namespace {

struct Column {
  const char* name;
  std::string (*cell)(const EpochReport&);
};

std::string fixed(double x, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

const Column kColumns[] = {
    {"method", [](const EpochReport& r) { return r.method; }},
    {"wall_ms", [](const EpochReport& r) { return fixed(r.wall_ms, 3); }},
    {"lambda", [](const EpochReport& r) { return fixed(r.lambda, 4); }},
    {"traffic_bytes", [](const EpochReport& r) { return std::to_string(r.traffic_bytes()); }},
    {"spatial_bytes", [](const EpochReport& r) { return std::to_string(r.spatial_bytes); }},
    {"temporal_bytes", [](const EpochReport& r) { return std::to_string(r.temporal_bytes); }},
    {"shuffle_bytes", [](const EpochReport& r) { return std::to_string(r.shuffle_bytes); }},
    {"loading_bytes", [](const EpochReport& r) { return std::to_string(r.loading_bytes); }},
    {"padding_packed", [](const EpochReport& r) { return std::to_string(r.padding_packed); }},
    {"padding_naive", [](const EpochReport& r) { return std::to_string(r.padding_naive); }},
    {"stale_reduction", [](const EpochReport& r) { return fixed(r.stale.reduction(), 4); }},
};

}  // namespace

std::string format_table(std::span<const MethodSummary> summaries) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> width;
  for (const auto& c : kColumns) width.push_back(std::string(c.name).size());
  for (const auto& s : summaries) {
    std::vector<std::string> row;
    for (std::size_t k = 0; k < std::size(kColumns); ++k) {
      row.push_back(kColumns[k].cell(s.mean));
      width[k] = std::max(width[k], row.back().size());
    }
    rows.push_back(std::move(row));
  }
  std::ostringstream out;
  for (std::size_t k = 0; k < std::size(kColumns); ++k) {
    out << (k ? "  " : "") << std::setw(static_cast<int>(width[k])) << (k ? std::right : std::left)
        << kColumns[k].name;
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      out << (k ? "  " : "") << std::setw(static_cast<int>(width[k])) << (k ? std::right : std::left) << row[k];
    }
    out << '\n';
  }
  return out.str();
}

std::string format_csv(std::span<const MethodSummary> summaries) {
  std::ostringstream out;
  for (std::size_t k = 0; k < std::size(kColumns); ++k) out << (k ? "," : "") << kColumns[k].name;
  out << '\n';
  for (const auto& s : summaries) {
    for (std::size_t k = 0; k < std::size(kColumns); ++k) out << (k ? "," : "") << kColumns[k].cell(s.mean);
    out << '\n';
  }
  return out.str();
}

}  // namespace stchunk
