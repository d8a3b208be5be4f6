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

#include "stchunk/cli.hpp"

#include <map>
#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "stchunk/messages.hpp"
#include "stchunk/predictor.hpp"

namespace stchunk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path need(const fs::path& dir, const char* name) {
  auto path = dir / name;
  if (!fs::exists(path)) throw ArtifactError("missing upstream artifact " + path.string());
  return path;
}

DynamicGraph read_graph(const fs::path& dir) { return load_graph(need(dir, kGraphFile)); }

void check_method(const RunConfig& config, Method stored, const char* file) {
  if (stored != config.method) {
    throw ArtifactError(std::string(file) + " was built for " + to_string(stored) + ", not " +
                        to_string(config.method));
  }
}

std::unique_ptr<Predictor> load_predictor(const RunConfig& config) {
  if (config.predictor_path.empty()) return nullptr;
  return std::make_unique<Predictor>(Predictor::load(config.predictor_path));
}

// Analytic cost of each share, used as the load of a fixed baseline placement.
std::vector<double> share_costs(const DynamicGraph& g, const RunConfig& config,
                                const std::vector<std::vector<InstanceId>>& shares) {
  UnitAnalyzer analyzer(g, config.profile);
  std::vector<double> out;
  for (const auto& share : shares) out.push_back(true_cost(analyzer.stats(share), config.calibration));
  return out;
}

std::vector<std::vector<InstanceId>> shares_of(const DeviceMap& map, std::uint32_t n_devices) {
  std::vector<std::vector<InstanceId>> shares(n_devices);
  for (InstanceId v = 0; v < map.size(); ++v) shares[map[v]].push_back(v);
  return shares;
}

DeviceMap map_of(const std::vector<std::vector<InstanceId>>& shares, std::size_t instances) {
  DeviceMap map(instances, 0);
  for (DeviceId d = 0; d < shares.size(); ++d) {
    for (auto v : shares[d]) map[v] = d;
  }
  return map;
}

json report_json(std::span<const MethodSummary> summaries) {
  json methods = json::array();
  for (const auto& s : summaries) methods.push_back(to_json(s));
  return {{"methods", std::move(methods)}};
}

template <typename F>
void stage(const char* name, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

void cmd_gen(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  stage("gen", [&] {
    auto g = config.graph_input.empty() ? generate(config.synthetic_spec()) : load_graph(config.graph_input);
    save_graph(g, dir / kGraphFile);
    log << "graph: " << g.num_snapshots() << " snapshots, " << g.num_instances() << " instances, "
        << g.num_spatial_edges() << " edges, " << g.temporal_links().size() << " temporal links\n";
  });
}

void cmd_partition(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  stage("partition", [&] {
    auto g = read_graph(dir);
    PartitionArtifact part;
    part.method = config.method;
    const auto n = config.cluster.n_devices;
    switch (config.method) {
      case Method::pgc: {
        PropagationOptions options;
        options.size_cap = config.size_cap ? config.size_cap : default_size_cap(g.num_instances(), n);
        options.max_rounds = config.max_rounds;
        options.schedule = config.schedule;
        options.topology = config.topology;
        auto result = propagate(g, config.profile, options);
        part.rounds = result.rounds;
        part.converged = result.converged;
        write_json(dir / kChunksFile, to_json(g, part, &result.chunks));
        log << "pgc: " << result.chunks.size() << " chunks after " << result.rounds << " rounds"
            << (result.converged ? "" : " (not converged)") << ", inter-chunk bytes " << result.chunks.inter_bytes()
            << "\n";
        return;
      }
      case Method::pss: part.chunks = shares_of(partition_pss(g, n), n); break;
      case Method::pts: part.chunks = shares_of(partition_pts(g, n), n); break;
      case Method::pss_ts: {
        auto hybrid = partition_pss_ts(g, n);
        part.chunks = shares_of(hybrid.structure, n);
        part.time_chunks = shares_of(hybrid.time, n);
        break;
      }
    }
    write_json(dir / kChunksFile, to_json(g, part, nullptr));
    log << to_string(config.method) << ": " << part.chunks.size() << " device shares\n";
  });
}

void cmd_assign(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  stage("assign", [&] {
    auto g = read_graph(dir);
    auto part = partition_from_json(g, read_json(need(dir, kChunksFile)));
    check_method(config, part.method, kChunksFile);
    Assignment a;
    if (config.method == Method::pgc) {
      auto cg = chunk_graph_of(g, config.profile, part);
      auto predictor = load_predictor(config);
      auto options = config.pipeline_options();
      options.predictor = predictor.get();
      a = assign_chunks(cg, chunk_workloads(cg, options), config.cluster.n_devices);
    } else {
      // Baseline shares are already per device.
      a.load = share_costs(g, config, part.chunks);
      for (DeviceId d = 0; d < part.chunks.size(); ++d) {
        a.device_of_chunk.push_back(d);
        a.queue.push_back({d});
        a.target_load += a.load[d] / static_cast<double>(part.chunks.size());
      }
    }
    write_json(dir / kAssignmentFile, to_json(config.method, a));
    log << "assigned " << a.device_of_chunk.size() << " chunks to " << a.n_devices() << " devices, target load "
        << a.target_load << " ms\n";
  });
}

void cmd_fuse(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  stage("fuse", [&] {
    auto g = read_graph(dir);
    auto part = partition_from_json(g, read_json(need(dir, kChunksFile)));
    check_method(config, part.method, kChunksFile);
    FusionPlan plan;
    if (config.method == Method::pgc && config.fusion) {
      auto cg = chunk_graph_of(g, config.profile, part);
      auto a = assignment_from_json(read_json(need(dir, kAssignmentFile)), cg.size());
      plan = plan_spatial_fusion(g, config.profile, cg, a, config.cluster.memory_budget, config.memory);
    }
    write_json(dir / kFusionFile, to_json(config.method, plan, config.cluster.memory_budget));
    log << "fusion: " << plan.group_count() << " groups, " << plan.saved_loads() << " vertex loads saved\n";
  });
}

void cmd_simulate(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  stage("simulate", [&] {
    auto g = read_graph(dir);
    auto part = partition_from_json(g, read_json(need(dir, kChunksFile)));
    check_method(config, part.method, kChunksFile);
    Plan plan;
    if (config.method == Method::pgc) {
      auto cg = chunk_graph_of(g, config.profile, part);
      auto a = assignment_from_json(read_json(need(dir, kAssignmentFile)), cg.size());
      std::optional<FusionPlan> fusion;
      if (config.fusion) fusion = fusion_from_json(read_json(need(dir, kFusionFile)));
      plan = pgc_plan(cg, a, fusion ? &*fusion : nullptr);
    } else {
      auto a = assignment_from_json(read_json(need(dir, kAssignmentFile)), part.chunks.size());
      auto structure = map_of(part.chunks, g.num_instances());
      for (InstanceId v = 0; v < g.num_instances(); ++v) structure[v] = a.device_of_chunk[structure[v]];
      auto time = config.method == Method::pss_ts ? map_of(part.time_chunks, g.num_instances()) : structure;
      plan = plan_from_maps(config.method, std::move(structure), std::move(time), a.n_devices());
    }
    ClusterSpec cluster = config.cluster;
    cluster.n_devices = plan.n_devices;
    Simulator sim(g, config.profile, cluster, plan, config.simulation_options());
    MethodSummary summary;
    summary.method = config.method;
    for (std::uint32_t e = 0; e < config.epochs; ++e) summary.epochs.push_back(sim.run_epoch());
    summary.mean = mean_report(summary.epochs);
    std::vector<MethodSummary> one{summary};
    write_json(dir / kReportFile, report_json(one));
    log << format_table(one);
  });
}

void cmd_compare(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  stage("compare", [&] {
    if (!fs::exists(dir / kGraphFile)) cmd_gen(config, dir, log);
    auto g = read_graph(dir);
    auto predictor = load_predictor(config);
    auto pipeline = config.pipeline_options();
    pipeline.predictor = predictor.get();
    auto summaries = compare_methods(g, config.profile, config.cluster, kAllMethods, config.epochs, pipeline,
                                     config.simulation_options());
    write_json(dir / kReportFile, report_json(summaries));
    write_text(dir / kCompareFile, format_csv(summaries));
    log << format_table(summaries);
  });
}

void cmd_train_predictor(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  stage("train-predictor", [&] {
    auto samples =
        synthesize_samples(config.predictor_samples, config.calibration, config.predictor_noise, config.seed);
    auto options = config.predictor_training;
    options.seed = config.seed;
    auto predictor = train_predictor(samples, options);
    auto path = config.predictor_path.empty() ? dir / kPredictorFile : fs::path(config.predictor_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    predictor.save(path);
    log << "predictor: train MAPE " << predictor.train_mape() << ", validation MAPE " << predictor.validation_mape()
        << " -> " << path.string() << "\n";
  });
}

void cmd_report(const RunConfig&, const fs::path& dir, std::ostream& log) {
  stage("report", [&] {
    auto j = read_json(need(dir, kReportFile));
    if (!j.contains("methods") || !j["methods"].is_array()) throw ArtifactError("report.json has no 'methods'");
    std::vector<MethodSummary> summaries;
    for (const auto& m : j["methods"]) summaries.push_back(summary_from_json(m));
    log << format_table(summaries);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chunk-based partitioning and simulation of distributed dynamic-graph training"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "artifact directory");

  // Every config key doubles as a flag: --section.key value.
  const auto keys = config_keys();
  std::map<std::string, std::string> overrides;
  for (const auto& key : keys) {
    app.add_option("--" + key, overrides[key], "config key " + key)->group("Config keys");
  }

  using Command = void (*)(const RunConfig&, const fs::path&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"gen", cmd_gen},
      {"partition", cmd_partition},
      {"assign", cmd_assign},
      {"fuse", cmd_fuse},
      {"simulate", cmd_simulate},
      {"compare", cmd_compare},
      {"train-predictor", cmd_train_predictor},
      {"report", cmd_report},
  };
  const char* descriptions[] = {
      "write graph.dg (synthetic or from graph.input)",
      "write chunks.json for --method",
      "write assignment.json",
      "write fusion.json",
      "simulate epochs and write report.json",
      "run every method and write report.json and compare.csv",
      "train the workload predictor",
      "print the table stored in report.json",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) subs.push_back(app.add_subcommand(commands[i].first, descriptions[i]));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::string name = "stchunk";
  try {
    Command command = nullptr;
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) {
        command = commands[i].second;
        name = commands[i].first;
      }
    }
    json doc = config_path.empty() ? json::object() : read_json(config_path);
    for (const auto& key : keys) {
      if (app.count("--" + key) > 0) apply_override(doc, key, overrides[key]);
    }
    auto config = config_from_json(doc);
    fs::create_directories(out_dir);
    command(config, out_dir, out);
    return 0;
  } catch (const StageError& e) {
    err << e.what() << "\n";
  } catch (const std::exception& e) {
    err << name << ": " << e.what() << "\n";
  }
  return 1;
}

}  // namespace stchunk
