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

#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "stchunk/graph.hpp"
#include "stchunk/synthetic.hpp"

using namespace stchunk;

namespace {

std::set<VertexInstance> as_set(const std::vector<VertexInstance>& v) { return {v.begin(), v.end()}; }

std::vector<std::uint64_t> edges_per_snapshot(const DynamicGraph& g) {
  std::vector<std::uint64_t> counts(g.num_snapshots(), 0);
  for (const auto& e : g.spatial_edges()) ++counts[g.instance(e.u).t - 1];
  return counts;
}

double sample_variance(const std::vector<std::uint64_t>& xs) {
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (auto x : xs) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST_CASE("load: two snapshots with the same two entities give two temporal links") {
  auto g = parse_graph("dg 2 4\nv 0 1\nv 1 1\nv 0 2\nv 1 2\ne 1 0 1\ne 2 0 1\n");
  CHECK(g.num_snapshots() == 2);
  CHECK(g.feature_dim() == 4);
  CHECK(g.num_spatial_edges() == 2);
  CHECK(g.temporal_links().size() == 2);
}

TEST_CASE("load: vertices without an edge section") {
  auto g = parse_graph("# presence only\ndg 3 1\nv 5 1\nv 6 2\nv 7 3\n");
  CHECK(g.num_instances() == 3);
  CHECK(g.num_spatial_edges() == 0);
}

TEST_CASE("load: a presence gap still yields one temporal link") {
  auto g = parse_graph("dg 3 1\nv 9 1\nv 9 3\n");
  REQUIRE(g.temporal_links().size() == 1);
  auto link = g.temporal_links()[0];
  CHECK(g.instance(link.earlier) == VertexInstance{9, 1});
  CHECK(g.instance(link.later) == VertexInstance{9, 3});
}

TEST_CASE("load: errors carry the offending line") {
  auto line_of = [](const char* text) -> std::size_t {
    try {
      parse_graph(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("dg 2 1\nv 0 1\nv x 1\n") == 3);
  CHECK(line_of("dg 2 1\nv 0 1\nv 0 1\n") == 3);     // duplicate presence
  CHECK(line_of("dg 2 1\nv 0 1\nv 1 2\ne 1 0 1\n") == 4);  // endpoint absent at t=1
  CHECK(line_of("dg 2 1\nv 0 3\n") == 2);            // t outside [1, T]
  CHECK(line_of("v 0 1\n") == 1);                    // no header
  CHECK(line_of("dg 2 1\nq 1 2\n") == 2);
  CHECK_THROWS_AS(load_graph("/nonexistent/graph.dg"), GraphError);
}

TEST_CASE("spatial neighbours") {
  auto g = parse_graph(
      "dg 1 1\nv 0 1\nv 1 1\nv 2 1\nv 3 1\nv 10 1\nv 11 1\nv 12 1\nv 13 1\nv 14 1\nv 15 1\nv 99 1\n"
      "e 1 0 1\ne 1 1 2\ne 1 0 2\n"
      "e 1 10 11\ne 1 10 12\ne 1 10 13\ne 1 10 14\ne 1 10 15\n");
  CHECK(g.neighbors_spatial({99, 1}).empty());
  CHECK(as_set(g.neighbors_spatial({1, 1})) == std::set<VertexInstance>{{0, 1}, {2, 1}});
  CHECK(g.neighbors_spatial({10, 1}).size() == 5);
  CHECK_THROWS_AS(g.neighbors_spatial({1, 2}), GraphError);
}

TEST_CASE("temporal neighbours") {
  auto g = parse_graph("dg 5 1\nv 1 3\nv 2 1\nv 2 2\nv 2 3\nv 3 1\nv 3 2\nv 3 3\nv 3 4\nv 3 5\n");
  CHECK(g.neighbors_temporal({1, 3}).empty());
  CHECK(as_set(g.neighbors_temporal({2, 2})) == std::set<VertexInstance>{{2, 1}, {2, 3}});
  CHECK(g.neighbors_temporal({3, 1}).size() == 4);
  CHECK_THROWS_AS(g.neighbors_temporal({4, 1}), GraphError);
}

TEST_CASE("dense ids are snapshot-major and entity-ascending") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    auto g = oracle::random_graph(rng);
    for (InstanceId v = 1; v < g.num_instances(); ++v) {
      const auto& a = g.instance(v - 1);
      const auto& b = g.instance(v);
      CHECK(std::pair(a.t, a.entity) < std::pair(b.t, b.entity));
    }
  }
}

TEST_CASE("property: save then load preserves the graph") {
  std::mt19937_64 rng(11);
  auto dir = std::filesystem::temp_directory_path() / "stchunk_graphstore_roundtrip";
  std::filesystem::create_directories(dir);
  for (int k = 0; k < 100; ++k) {
    auto g = oracle::random_graph(rng);
    auto path = dir / "g.dg";
    save_graph(g, path);
    auto h = load_graph(path);
    REQUIRE(h.num_instances() == g.num_instances());
    CHECK(h.num_snapshots() == g.num_snapshots());
    CHECK(h.feature_dim() == g.feature_dim());
    for (InstanceId v = 0; v < g.num_instances(); ++v) {
      CHECK(h.instance(v) == g.instance(v));
      CHECK(as_set(h.neighbors_spatial(h.instance(v))) == as_set(g.neighbors_spatial(g.instance(v))));
    }
    CHECK(format_graph(h) == format_graph(g));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("property: neighbour sets respect snapshots") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    auto g = oracle::random_graph(rng);
    for (const auto& v : g.instances()) {
      for (const auto& u : g.neighbors_spatial(v)) CHECK(u.t == v.t);
      for (const auto& u : g.neighbors_temporal(v)) {
        CHECK(u.t != v.t);
        CHECK(u.entity == v.entity);
      }
    }
    // Temporal links join consecutive presences in increasing time.
    for (const auto& l : g.temporal_links()) {
      const auto& a = g.instance(l.earlier);
      const auto& b = g.instance(l.later);
      CHECK(a.entity == b.entity);
      CHECK(a.t < b.t);
      for (Timestep t = a.t + 1; t < b.t; ++t) CHECK_FALSE(g.find({a.entity, t}).has_value());
    }
  }
}

TEST_CASE("generate: zero spread puts exactly the mean on every snapshot") {
  SyntheticSpec spec;
  spec.total_vertices = 2000;
  spec.total_edges = 20 * 10;
  spec.num_snapshots = 10;
  spec.edges_per_snapshot_mean = 20;
  spec.edges_per_snapshot_stddev = 0;
  spec.presence_length = LengthDistribution::uniform(1, 5);
  spec.rng_seed = 3;
  auto g = generate(spec);
  for (auto c : edges_per_snapshot(g)) CHECK(c == 20);
  CHECK(g.num_instances() == 2000);
}

TEST_CASE("generate: totals are met and the same seed gives identical bytes") {
  SyntheticSpec spec;
  spec.total_vertices = 5000;
  spec.total_edges = 3000;
  spec.num_snapshots = 20;
  spec.edges_per_snapshot_mean = 150;
  spec.edges_per_snapshot_stddev = 60;
  spec.presence_length = LengthDistribution::geometric(4);
  spec.rng_seed = 99;
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(a.num_instances() == 5000);
  CHECK(a.num_spatial_edges() == 3000);
  CHECK(format_graph(a) == format_graph(b));
  spec.rng_seed = 100;
  CHECK(format_graph(generate(spec)) != format_graph(a));
}

TEST_CASE("generate: reference synthetic scale") {
  auto spec = full_scale_spec(500.0, 1);
  CHECK(spec.total_vertices == 5'000'000);
  CHECK(spec.total_edges == 2'000'000);
  CHECK(spec.num_snapshots == 100);
  CHECK(spec.edges_per_snapshot_mean == 20'000.0);
}

TEST_CASE("generate: infeasible specs are rejected") {
  SyntheticSpec spec;
  spec.total_vertices = 10;
  spec.total_edges = 1000;
  spec.num_snapshots = 2;
  spec.edges_per_snapshot_mean = 500;
  spec.presence_length = LengthDistribution::fixed(1);
  CHECK_THROWS_AS(generate(spec), GraphError);
  spec.total_edges = 4;
  spec.edges_per_snapshot_mean = 0;
  CHECK_THROWS_AS(generate(spec), GraphError);
  spec.edges_per_snapshot_mean = 2;
  spec.edges_per_snapshot_stddev = -1;
  CHECK_THROWS_AS(generate(spec), GraphError);
}

TEST_CASE("property: larger spread gives larger per-snapshot variance over 30 seeds") {
  const double spreads[] = {0.0, 50.0, 100.0, 200.0};
  std::vector<double> mean_variance;
  for (double delta : spreads) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      SyntheticSpec spec;
      spec.total_vertices = 20000;
      spec.total_edges = 20000;
      spec.num_snapshots = 100;
      spec.edges_per_snapshot_mean = 200;
      spec.edges_per_snapshot_stddev = delta;
      spec.presence_length = LengthDistribution::uniform(1, 20);
      spec.rng_seed = seed;
      total += sample_variance(edges_per_snapshot(generate(spec)));
    }
    mean_variance.push_back(total / 30.0);
  }
  for (std::size_t i = 1; i < mean_variance.size(); ++i) CHECK(mean_variance[i] > mean_variance[i - 1]);
}
