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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stchunk/artifacts.hpp"
#include "stchunk/cli.hpp"

using namespace stchunk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "stchunk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("stchunk_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A 200-instance synthetic graph.
const std::vector<std::string> kSmall = {
    "--graph.total_vertices", "200", "--graph.total_edges", "300", "--graph.snapshots", "5",
    "--graph.edges_mean",     "60",  "--graph.edges_stddev", "10",  "--cluster.n_devices", "2",
};

std::vector<std::string> with(std::vector<std::string> head, const fs::path& dir,
                              std::vector<std::string> extra = {}) {
  head.push_back("--out");
  head.push_back(dir.string());
  head.insert(head.end(), kSmall.begin(), kSmall.end());
  head.insert(head.end(), extra.begin(), extra.end());
  return head;
}

bool is_cover(const PartitionArtifact& part, std::size_t instances) {
  std::vector<int> seen(instances, 0);
  for (const auto& chunk : part.chunks) {
    for (auto v : chunk) ++seen[v];
  }
  for (auto s : seen) {
    if (s != 1) return false;
  }
  return true;
}

void run_stages(const fs::path& dir, const std::string& method) {
  for (const char* stage : {"partition", "assign", "fuse", "simulate"}) {
    auto r = cli(with({stage}, dir, {"--method", method, "--epochs", "1"}));
    REQUIRE_MESSAGE(r.status == 0, r.err);
  }
}

}  // namespace

TEST_CASE("compare on a small graph writes one report per method") {
  auto dir = scratch("compare");
  auto r = cli(with({"compare"}, dir, {"--epochs", "1"}));
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(r.err.empty());
  auto report = read_json(dir / kReportFile);
  REQUIRE(report.at("methods").size() == 4);
  std::vector<std::string> names;
  for (const auto& m : report["methods"]) {
    auto s = summary_from_json(m);
    CHECK(s.epochs.size() == 1);
    names.push_back(to_string(s.method));
  }
  CHECK(names == std::vector<std::string>{"pgc", "pss", "pts", "pss-ts"});
  auto csv = slurp(dir / kCompareFile);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(load_graph(dir / kGraphFile).num_instances() == 200);
}

TEST_CASE("partition pgc and pss on the same graph give distinct valid partitions") {
  auto pgc = scratch("part_pgc");
  auto pss = scratch("part_pss");
  REQUIRE(cli(with({"gen"}, pgc)).status == 0);
  fs::copy_file(pgc / kGraphFile, pss / kGraphFile);
  REQUIRE(cli(with({"partition"}, pgc, {"--method", "pgc"})).status == 0);
  REQUIRE(cli(with({"partition"}, pss, {"--method", "pss"})).status == 0);
  CHECK(slurp(pgc / kChunksFile) != slurp(pss / kChunksFile));

  auto g = load_graph(pgc / kGraphFile);
  auto a = partition_from_json(g, read_json(pgc / kChunksFile));
  auto b = partition_from_json(g, read_json(pss / kChunksFile));
  CHECK(a.method == Method::pgc);
  CHECK(b.method == Method::pss);
  CHECK(is_cover(a, g.num_instances()));
  CHECK(is_cover(b, g.num_instances()));
  CHECK(b.chunks.size() == 2);
}

TEST_CASE("compare twice with the same config and seed gives byte-identical files") {
  auto first = scratch("det_a");
  auto second = scratch("det_b");
  for (const auto& dir : {first, second}) {
    auto r = cli(with({"compare"}, dir, {"--epochs", "3", "--seed", "17", "--stale.mode", "adaptive-prose"}));
    REQUIRE_MESSAGE(r.status == 0, r.err);
  }
  for (const char* file : {kGraphFile, kReportFile, kCompareFile}) {
    CHECK_MESSAGE(slurp(first / file) == slurp(second / file), file);
  }
}

TEST_CASE("rerunning every stage leaves all artifacts unchanged") {
  for (const std::string method : {"pgc", "pss", "pts", "pss-ts"}) {
    auto dir = scratch("idem_" + method);
    REQUIRE(cli(with({"gen"}, dir)).status == 0);
    run_stages(dir, method);
    std::vector<std::string> before;
    const char* files[] = {kGraphFile, kChunksFile, kAssignmentFile, kFusionFile, kReportFile};
    for (const char* f : files) before.push_back(slurp(dir / f));
    REQUIRE(cli(with({"gen"}, dir)).status == 0);
    run_stages(dir, method);
    for (std::size_t i = 0; i < std::size(files); ++i) CHECK_MESSAGE(slurp(dir / files[i]) == before[i], files[i]);
  }
}

TEST_CASE("downstream stages never rewrite their inputs") {
  auto dir = scratch("inputs");
  REQUIRE(cli(with({"gen"}, dir)).status == 0);
  auto graph = slurp(dir / kGraphFile);
  auto time = fs::last_write_time(dir / kGraphFile);
  REQUIRE(cli(with({"partition"}, dir)).status == 0);
  auto chunks = slurp(dir / kChunksFile);
  REQUIRE(cli(with({"assign"}, dir)).status == 0);
  auto assignment = slurp(dir / kAssignmentFile);
  REQUIRE(cli(with({"fuse"}, dir)).status == 0);
  REQUIRE(cli(with({"simulate"}, dir, {"--epochs", "1"})).status == 0);
  REQUIRE(cli({"report", "--out", dir.string()}).status == 0);
  CHECK(slurp(dir / kGraphFile) == graph);
  CHECK(fs::last_write_time(dir / kGraphFile) == time);
  CHECK(slurp(dir / kChunksFile) == chunks);
  CHECK(slurp(dir / kAssignmentFile) == assignment);
}

TEST_CASE("the staged pipeline reproduces compare for every method") {
  auto whole = scratch("staged_compare");
  REQUIRE(cli(with({"compare"}, whole, {"--epochs", "1"})).status == 0);
  auto expected = read_json(whole / kReportFile)["methods"];
  for (std::size_t k = 0; k < expected.size(); ++k) {
    auto want = summary_from_json(expected[k]);
    auto dir = scratch("staged_" + to_string(want.method));
    fs::copy_file(whole / kGraphFile, dir / kGraphFile);
    run_stages(dir, to_string(want.method));
    auto got = summary_from_json(read_json(dir / kReportFile)["methods"][0]);
    CAPTURE(to_string(want.method));
    CHECK(got.mean.spatial_bytes == want.mean.spatial_bytes);
    CHECK(got.mean.temporal_bytes == want.mean.temporal_bytes);
    CHECK(got.mean.shuffle_bytes == want.mean.shuffle_bytes);
    CHECK(got.mean.loading_bytes == want.mean.loading_bytes);
    CHECK(got.mean.wall_ms == doctest::Approx(want.mean.wall_ms));
  }
}

TEST_CASE("flags override the config file") {
  auto dir = scratch("override");
  auto config_path = dir / "run.json";
  {
    auto doc = default_config_json();
    doc["cluster"]["n_devices"] = 3;
    doc["graph"]["total_vertices"] = 120;
    doc["graph"]["total_edges"] = 100;
    doc["graph"]["snapshots"] = 4;
    doc["graph"]["edges_mean"] = 25;
    doc["graph"]["edges_stddev"] = 5;
    doc["method"] = "pts";
    write_json(config_path, doc);
  }
  auto stages = [&](std::vector<std::string> extra) {
    for (const char* stage : {"gen", "partition", "assign"}) {
      std::vector<std::string> args{stage, "--config", config_path.string(), "--out", dir.string()};
      args.insert(args.end(), extra.begin(), extra.end());
      auto r = cli(args);
      REQUIRE_MESSAGE(r.status == 0, r.err);
    }
    auto part = partition_from_json(load_graph(dir / kGraphFile), read_json(dir / kChunksFile));
    return assignment_from_json(read_json(dir / kAssignmentFile), part.chunks.size());
  };
  auto from_file = stages({});
  CHECK(from_file.n_devices() == 3);
  CHECK(load_graph(dir / kGraphFile).num_instances() == 120);
  CHECK(partition_from_json(load_graph(dir / kGraphFile), read_json(dir / kChunksFile)).method == Method::pts);

  auto flagged = stages({"--cluster.n_devices", "2", "--method", "pss"});
  CHECK(flagged.n_devices() == 2);
  CHECK(partition_from_json(load_graph(dir / kGraphFile), read_json(dir / kChunksFile)).method == Method::pss);
}

TEST_CASE("errors name the failing stage and exit nonzero") {
  auto empty = scratch("errors_empty");
  for (const char* stage : {"partition", "assign", "fuse", "simulate", "report"}) {
    auto r = cli({stage, "--out", empty.string()});
    CHECK(r.status != 0);
    CHECK_MESSAGE(r.err.rfind(std::string(stage) + ": ", 0) == 0, r.err);
    CHECK(r.err.find("missing upstream artifact") != std::string::npos);
  }

  auto dir = scratch("errors");
  REQUIRE(cli(with({"gen"}, dir)).status == 0);
  REQUIRE(cli(with({"partition"}, dir, {"--method", "pss"})).status == 0);
  auto mismatch = cli(with({"assign"}, dir, {"--method", "pgc"}));
  CHECK(mismatch.status != 0);
  CHECK(mismatch.err.rfind("assign: ", 0) == 0);
  CHECK(mismatch.err.find("pss") != std::string::npos);

  auto bad_method = cli(with({"partition"}, dir, {"--method", "metis"}));
  CHECK(bad_method.status != 0);
  CHECK(bad_method.err.find("metis") != std::string::npos);

  auto bad_devices = cli({"compare", "--out", dir.string(), "--cluster.n_devices", "0"});
  CHECK(bad_devices.status != 0);
  CHECK(bad_devices.err.rfind("compare: ", 0) == 0);

  auto bad_type = cli(with({"gen"}, dir, {"--graph.snapshots", "\"ten\""}));
  CHECK(bad_type.status != 0);
  CHECK(bad_type.err.find("graph.snapshots") != std::string::npos);

  auto config_path = dir / "unknown.json";
  write_json(config_path, {{"cluster", {{"gpus", 4}}}});
  auto unknown = cli({"gen", "--config", config_path.string(), "--out", dir.string()});
  CHECK(unknown.status != 0);
  CHECK(unknown.err.find("cluster.gpus") != std::string::npos);

  CHECK(cli({}).status != 0);
  CHECK(cli({"frobnicate"}).status != 0);
  CHECK(cli({"gen", "--no-such-flag", "1"}).status != 0);
}

TEST_CASE("the installed binary reports its exit status") {
  auto dir = scratch("binary");
  const std::string binary = STCHUNK_CLI_BINARY;
  std::string ok = binary + " compare --out " + dir.string() + " --epochs 1";
  for (const auto& a : kSmall) ok += " " + a;
  ok += " > " + (dir / "log.txt").string() + " 2>&1";
  CHECK(std::system(ok.c_str()) == 0);
  CHECK(fs::exists(dir / kReportFile));
  CHECK(slurp(dir / "log.txt").find("pss-ts") != std::string::npos);

  auto empty = scratch("binary_empty");
  std::string failing = binary + " simulate --out " + empty.string() + " > " + (dir / "err.txt").string() + " 2>&1";
  CHECK(std::system(failing.c_str()) != 0);
  CHECK(slurp(dir / "err.txt").rfind("simulate: ", 0) == 0);
}
