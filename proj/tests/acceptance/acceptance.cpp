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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stchunk/cli.hpp"
#include "stchunk/messages.hpp"
#include "stchunk/predictor.hpp"
#include "stchunk/sim.hpp"
#include "stchunk/stale.hpp"
#include "stchunk/synthetic.hpp"

using namespace stchunk;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ClusterSpec cluster_of(std::uint32_t n) {
  ClusterSpec c;
  c.n_devices = n;
  return c;
}

std::vector<std::uint32_t> first_n(std::size_t n) {
  std::vector<std::uint32_t> out(n);
  std::iota(out.begin(), out.end(), 0u);
  return out;
}

// Graph of the non-uniformity sweep at desk scale: 50K instances, 20K edges,
// 100 snapshots, per-snapshot edge counts ~ N(200, delta^2).
DynamicGraph sweep_graph(double delta, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.total_vertices = 50000;
  spec.total_edges = 20000;
  spec.num_snapshots = 100;
  spec.edges_per_snapshot_mean = 200;
  spec.edges_per_snapshot_stddev = delta;
  spec.presence_length = LengthDistribution::uniform(1, 20);
  spec.rng_seed = seed;
  return generate(spec);
}

// ---- 1 ----------------------------------------------------------------------

Verdict traffic_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::uint32_t> devices(2, 4);
  int graphs = 0;
  int mismatches = 0;
  while (graphs < 250) {
    auto g = oracle::random_graph(rng);
    auto p = oracle::random_profile(rng);
    auto cluster = cluster_of(devices(rng));
    if (g.num_snapshots() < cluster.n_devices || g.num_entities() < cluster.n_devices) continue;
    ++graphs;
    for (auto method : kAllMethods) {
      auto plan = build_plan(method, g, p, cluster, PipelineOptions{}).plan;
      auto r = simulate_epoch(g, plan, p, cluster, SimulationOptions{}, 1);
      auto want = oracle::enumerate_traffic(g, p, plan.structure_device, plan.time_device);
      if (r.spatial_bytes != want.spatial || r.temporal_bytes != want.temporal || r.shuffle_bytes != want.shuffle) {
        ++mismatches;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 30.0,
          format("%d graphs x 4 methods, %d mismatches, %.2f s (limit 30 s)", graphs, mismatches, elapsed)};
}

// ---- 2 ----------------------------------------------------------------------

bool disjoint_cover(const ChunkGraph& cg, std::size_t instances) {
  std::vector<int> seen(instances, 0);
  for (const auto& c : cg.chunks()) {
    for (auto v : c.members) ++seen[v];
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

Verdict partition_duality() {
  std::mt19937_64 rng(2002);
  int instances = 0;
  int failures = 0;
  auto check = [&](const DynamicGraph& g, const ModelProfile& p, std::size_t cap, UpdateSchedule schedule) {
    PropagationOptions o;
    o.size_cap = cap;
    o.schedule = schedule;
    auto cg = propagate(g, p, o).chunks;
    std::vector<std::uint64_t> label(cg.membership().begin(), cg.membership().end());
    bool ok = disjoint_cover(cg, g.num_instances());
    for (const auto& c : cg.chunks()) ok = ok && c.members.size() <= cap;
    ok = ok && cg.inter_bytes() == oracle::enumerate_cut(g, p, label);
    ok = ok && cg.internal_bytes() + cg.inter_bytes() == oracle::enumerate_total(g, p);
    ++instances;
    failures += ok ? 0 : 1;
  };
  for (int k = 0; k < 300; ++k) {
    auto g = oracle::random_graph(rng);
    auto p = oracle::random_profile(rng);
    check(g, p, 1 + k % 12, k % 2 ? UpdateSchedule::synchronous : UpdateSchedule::sequential);
  }
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto g = sweep_graph(50.0 * static_cast<double>(seed), seed);
    for (auto p : {ModelProfile::tgcn_like(), ModelProfile::dysat_like()}) {
      check(g, p, default_size_cap(g.num_instances(), 8), UpdateSchedule::sequential);
    }
  }
  return {failures == 0, format("%d partitions (300 random, 8 at 50K instances), %d violations", instances, failures)};
}

// ---- 3 and 10 ---------------------------------------------------------------

struct SweepLine {
  double delta = 0.0;
  int wins = 0;
  int runs = 0;
  double median_relative = 0.0;  // (best baseline - PGC) / best baseline
  double q1_relative = 0.0;
  double q3_relative = 0.0;
  double median_bytes = 0.0;     // best baseline - PGC
  double median_wall_ratio = 0.0;  // best baseline wall / PGC wall
};

std::vector<SweepLine> traffic_sweep(const ModelProfile& profile, int seeds) {
  const auto cluster = cluster_of(8);
  std::vector<SweepLine> lines;
  for (double delta : {0.0, 50.0, 100.0, 200.0}) {
    SweepLine line;
    line.delta = delta;
    std::vector<double> relative, bytes, wall;
    for (int s = 1; s <= seeds; ++s) {
      auto g = sweep_graph(delta, static_cast<std::uint64_t>(s));
      std::vector<EpochReport> r;
      for (auto method : kAllMethods) {
        auto plan = build_plan(method, g, profile, cluster, PipelineOptions{}).plan;
        r.push_back(simulate_epoch(g, plan, profile, cluster, SimulationOptions{}, 1));
      }
      const auto pgc = static_cast<double>(r[0].traffic_bytes());
      const auto best = static_cast<double>(std::min(r[1].traffic_bytes(), r[2].traffic_bytes()));
      line.wins += pgc <= best ? 1 : 0;
      ++line.runs;
      relative.push_back((best - pgc) / best);
      bytes.push_back(best - pgc);
      wall.push_back(std::min(r[1].wall_ms, r[2].wall_ms) / r[0].wall_ms);
    }
    line.median_relative = median(relative);
    std::sort(relative.begin(), relative.end());
    line.q1_relative = relative[relative.size() / 4];
    line.q3_relative = relative[3 * relative.size() / 4];
    line.median_bytes = median(bytes);
    line.median_wall_ratio = median(wall);
    lines.push_back(line);
  }
  return lines;
}

std::string describe(const std::vector<SweepLine>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += format("\n    delta %3.0f: wins %d/%d, median advantage %.4f (quartiles %.4f-%.4f, %.0f B), median wall "
                  "best/PGC %.3f",
                  l.delta, l.wins, l.runs, l.median_relative, l.q1_relative, l.q3_relative, l.median_bytes,
                  l.median_wall_ratio);
  }
  return out;
}

Verdict pgc_quality() {
  const auto start = Clock::now();
  auto lines = traffic_sweep(ModelProfile::dysat_like(), 30);
  const double elapsed = seconds_since(start);
  int wins = 0;
  int runs = 0;
  bool monotone = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    wins += lines[i].wins;
    runs += lines[i].runs;
    if (i > 0 && lines[i].median_relative < lines[i - 1].median_relative) monotone = false;
  }
  const double share = static_cast<double>(wins) / runs;
  return {share >= 0.8 && monotone && elapsed < 600.0,
          format("DySAT-like, 8 devices: PGC <= best{PSS,PTS} in %d/%d runs (%.0f%%, need 80%%), median advantage "
                 "%s in delta, %.1f s (limit 600 s)",
                 wins, runs, 100.0 * share, monotone ? "monotone" : "NOT monotone", elapsed) +
              describe(lines)};
}

void tgcn_sweep_note() {
  auto lines = traffic_sweep(ModelProfile::tgcn_like(), 10);
  std::printf("   info: same sweep, T-GCN-like profile, 10 seeds:%s\n", describe(lines).c_str());
}

std::vector<double> overhead_ratios(const SimulationOptions& simulation) {
  const auto profile = ModelProfile::dysat_like();
  const auto cluster = cluster_of(8);
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = Clock::now();
    auto g = sweep_graph(100.0, seed);
    compare_methods(g, profile, cluster, kAllMethods, 10, PipelineOptions{}, simulation);
    const double total = seconds_since(t0);

    const auto t1 = Clock::now();
    PropagationOptions o;
    o.size_cap = default_size_cap(g.num_instances(), cluster.n_devices);
    auto cg = propagate(g, profile, o).chunks;
    auto w = chunk_workloads(cg, PipelineOptions{});
    assign_chunks(cg, w, cluster.n_devices);
    const double chunking = seconds_since(t1);
    ratios.push_back(chunking / total);
  }
  return ratios;
}

Verdict overhead() {
  auto ratios = overhead_ratios(SimulationOptions{});
  const double m = median(ratios);
  return {m <= 0.10, format("chunk generation + assignment = %.1f%% of the compare pipeline (median of 5 seeds, "
                            "range %.1f-%.1f%%; limit 10%%)",
                            100.0 * m, 100.0 * *std::min_element(ratios.begin(), ratios.end()),
                            100.0 * *std::max_element(ratios.begin(), ratios.end()))};
}

// ---- 4 and 5 ----------------------------------------------------------------

std::vector<std::uint32_t> random_lengths(std::mt19937_64& rng, std::size_t max_count, std::uint32_t max_length) {
  std::uniform_int_distribution<std::size_t> count(1, max_count);
  std::uniform_int_distribution<std::uint32_t> length(1, max_length);
  std::vector<std::uint32_t> out(count(rng));
  for (auto& l : out) l = length(rng);
  return out;
}

std::vector<SequenceSpec> specs_of(const std::vector<std::uint32_t>& lengths) {
  std::vector<SequenceSpec> out;
  for (std::size_t i = 0; i < lengths.size(); ++i) out.push_back({i, lengths[i]});
  return out;
}

Verdict fused_equals_unfused() {
  const auto start = Clock::now();
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    auto cell = GruCell::random(1 + k % 8, 1 + k % 16, rng());
    auto lengths = random_lengths(rng, 12, 16);
    auto batch = pack_sequences(specs_of(lengths));
    std::vector<Eigen::MatrixXd> inputs;
    for (auto l : lengths) {
      Eigen::MatrixXd x(cell.input_size(), l);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
      inputs.push_back(std::move(x));
    }
    auto packed = gru_forward_masked(cell, batch, inputs);
    for (std::size_t s = 0; s < lengths.size(); ++s) {
      auto alone = gru_forward(cell, inputs[s]);
      if (packed[s].rows() != alone.rows() || packed[s].cols() != alone.cols()) {
        worst = std::numeric_limits<double>::infinity();
      } else {
        worst = std::max(worst, (packed[s] - alone).cwiseAbs().maxCoeff());
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-6 && elapsed < 60.0,
          format("1000 triples, max |packed - per-sequence| = %.2e (limit 1e-6), %.2f s (limit 60 s)", worst, elapsed)};
}

Verdict packing() {
  std::mt19937_64 rng(5005);
  int worse_than_naive = 0;
  int small = 0;
  int optimal = 0;
  int over_bound = 0;
  for (int k = 0; k < 1000; ++k) {
    auto lengths = random_lengths(rng, k % 2 ? 8 : 40, 16);
    auto batch = pack_sequences(specs_of(lengths));
    auto waste = padding_waste(batch);
    if (waste.packed > waste.naive) ++worse_than_naive;
    if (lengths.size() > 8) continue;
    ++small;
    const auto sum = std::accumulate(lengths.begin(), lengths.end(), std::uint64_t{0});
    const auto rows = oracle::optimal_rows(lengths, batch.row_length);
    const auto best = rows * batch.row_length - sum;
    // First-fit decreasing uses at most floor((11 OPT + 6) / 9) rows.
    const auto bound_rows = (11 * rows + 6) / 9;
    const auto allowed = (bound_rows - rows) * batch.row_length;
    if (waste.packed == best) ++optimal;
    if (waste.packed < best || waste.packed - best > allowed) ++over_bound;
  }
  return {worse_than_naive == 0 && over_bound == 0,
          format("1000 instances: packed > naive in %d; %d with <= 8 sequences: %d optimal, %d outside the "
                 "first-fit-decreasing bound",
                 worse_than_naive, small, optimal, over_bound)};
}

// ---- 6 and 7 ----------------------------------------------------------------

std::pair<int, int> gradient_check() {
  Mlp<double> net(predictor_widths());
  net.initialize(6);
  std::mt19937_64 rng(6006);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int batch = 32;
  Mlp<double>::Matrix x(kPredictorFeatures, batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  auto out = net.predict(x);
  Mlp<double>::RowVector y(batch);
  for (int i = 0; i < batch; ++i) y[i] = std::exp(out[i]) * (2.0 + std::fabs(gauss(rng)));
  net.reset_gradients();
  mape_loss_and_gradient(net, x, y, 1.0);
  auto loss = [&]() {
    auto o = net.predict(x);
    double l = 0.0;
    for (int i = 0; i < batch; ++i) l += std::fabs(std::exp(o[i]) - y[i]) / y[i];
    return l / batch;
  };
  std::uniform_int_distribution<std::size_t> coord(0, net.parameter_count() - 1);
  int checked = 0;
  int matched = 0;
  for (int k = 0; k < 2000 && checked < 300; ++k) {
    const auto i = coord(rng);
    const double analytic = net.gradient(i);
    double& w = net.parameter(i);
    const double saved = w;
    const double h = 1e-6 * std::max(1.0, std::fabs(saved));
    w = saved + h;
    const double up = loss();
    w = saved - h;
    const double down = loss();
    w = saved;
    const double numeric = (up - down) / (2 * h);
    if (std::fabs(numeric) < 1e-7 && std::fabs(analytic) < 1e-7) continue;  // inactive ReLU path
    ++checked;
    if (std::fabs(numeric - analytic) <= 1e-4 * std::max(std::fabs(numeric), std::fabs(analytic))) ++matched;
  }
  return {checked, matched};
}

Verdict predictor_accuracy(Predictor& trained) {
  const auto start = Clock::now();
  auto samples = synthesize_samples(50000, Calibration{}, 0.05, 6);
  TrainOptions options;
  options.epochs = 100;
  trained = train_predictor(samples, options);
  auto held_out = synthesize_samples(5000, Calibration{}, 0.05, 66);
  std::vector<std::pair<double, double>> pairs;
  for (const auto& s : held_out) pairs.emplace_back(trained.predict(s.stats), s.total_ms());
  const double held = mape(pairs);
  const double elapsed = seconds_since(start);
  auto [checked, matched] = gradient_check();
  return {held < 0.10 && trained.validation_mape() < 0.10 && checked >= 100 && matched == checked,
          format("50K samples x 100 epochs (%.0f s): validation MAPE %.2f%%, held-out MAPE %.2f%% (limit 10%%); "
                 "gradients %d/%d coordinates within rel. 1e-4",
                 elapsed, 100.0 * trained.validation_mape(), 100.0 * held, matched, checked)};
}

// 24 chunks of 5-40 vertices in one snapshot, each with its own edge
// density, plus sparse links between chunks. Equal vertex counts can hide
// very different work.
ChunkGraph random_chunk_set(std::mt19937_64& rng, const ModelProfile& profile, DynamicGraph& g) {
  std::uniform_int_distribution<int> size(5, 40);
  std::uniform_real_distribution<double> density(0.02, 0.9);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<VertexInstance> vertices;
  std::vector<EdgeRecord> edges;
  std::vector<std::uint64_t> chunk_of_entity;
  EntityId next = 0;
  for (int c = 0; c < 24; ++c) {
    const int n = size(rng);
    const double d = density(rng);
    const EntityId base = next;
    for (int i = 0; i < n; ++i) {
      vertices.push_back({next++, 1});
      chunk_of_entity.push_back(static_cast<std::uint64_t>(c));
    }
    for (EntityId i = base; i < next; ++i) {
      for (EntityId j = i + 1; j < next; ++j) {
        if (coin(rng) < d) edges.push_back({1, i, j});
      }
    }
  }
  for (EntityId i = 0; i < next; ++i) {
    for (EntityId j = i + 1; j < next; ++j) {
      if (chunk_of_entity[i] != chunk_of_entity[j] && coin(rng) < 0.01) edges.push_back({1, i, j});
    }
  }
  g = DynamicGraph::build(1, 4, vertices, edges);
  std::vector<std::uint64_t> label;
  for (const auto& v : g.instances()) label.push_back(chunk_of_entity[v.entity]);
  return ChunkGraph::from_membership(g, profile, label);
}

Verdict load_balance(const Predictor& predictor) {
  const auto profile = ModelProfile::tgcn_like();
  const auto cluster = cluster_of(4);
  double by_prediction = 0.0;
  double by_count = 0.0;
  double by_count_greedy = 0.0;
  const int seeds = 30;
  for (int s = 1; s <= seeds; ++s) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(7000 + s));
    DynamicGraph g;
    auto cg = random_chunk_set(rng, profile, g);
    std::vector<double> predicted, counts;
    for (const auto& c : cg.chunks()) {
      predicted.push_back(predictor.predict(c.stats));
      counts.push_back(static_cast<double>(c.members.size()));
    }
    auto lambda = [&](const Assignment& a) {
      return simulate_epoch(g, pgc_plan(cg, a, nullptr), profile, cluster, SimulationOptions{}, 1).lambda;
    };
    by_prediction += lambda(assign_chunks(cg, predicted, cluster.n_devices));
    by_count += lambda(assign_chunks(cg, counts, cluster.n_devices));
    by_count_greedy += lambda(assign_by_count(cg, cluster.n_devices));
  }
  by_prediction /= seeds;
  by_count /= seeds;
  by_count_greedy /= seeds;
  return {by_prediction <= by_count,
          format("30 seeds, 4 devices: mean lambda %.3f with predicted workloads vs %.3f with vertex counts "
                 "(least-count greedy without scores: %.3f)",
                 by_prediction, by_count, by_count_greedy)};
}

// ---- 8 ----------------------------------------------------------------------

std::string staleness_traffic(bool& ok) {
  const auto profile = ModelProfile::tgcn_like();
  const auto cluster = cluster_of(4);
  SyntheticSpec spec;
  spec.total_vertices = 5000;
  spec.total_edges = 4000;
  spec.num_snapshots = 20;
  spec.edges_per_snapshot_mean = 200;
  spec.edges_per_snapshot_stddev = 50;
  spec.presence_length = LengthDistribution::uniform(1, 10);
  spec.rng_seed = 8;
  auto g = generate(spec);
  auto plan = build_plan(Method::pgc, g, profile, cluster, PipelineOptions{}).plan;
  const std::uint32_t epochs = 10;

  auto run = [&](double fraction) {
    SimulationOptions o;
    o.stale = {StaleMode::fixed, fraction};
    Simulator sim(g, profile, cluster, plan, o);
    std::vector<std::uint64_t> bytes;
    for (std::uint32_t e = 0; e < epochs; ++e) {
      auto r = sim.run_epoch();
      bytes.push_back(r.spatial_bytes + r.temporal_bytes);
    }
    return bytes;
  };

  // (a) the grid {0, 0.1 D, ..., 0.9 D}
  std::vector<std::uint64_t> totals;
  for (int tenth = 0; tenth <= 9; ++tenth) {
    auto b = run(tenth / 10.0);
    totals.push_back(std::accumulate(b.begin(), b.end(), std::uint64_t{0}));
  }
  bool monotone = std::is_sorted(totals.rbegin(), totals.rend());
  // (b) theta = D_r
  auto at_d = run(1.0);
  bool silent = at_d[0] > 0 && std::all_of(at_d.begin() + 1, at_d.end(), [](auto b) { return b == 0; });
  ok = ok && monotone && silent && totals.front() > totals.back();
  std::string grid;
  for (auto t : totals) grid += " " + std::to_string(t);
  return format("(a) PGC plan, 10 epochs, cut bytes over theta = 0..0.9 D:%s -> %s; (b) theta = D_r: epoch 1 "
                "%llu B, later epochs %s",
                grid.c_str(), monotone ? "non-increasing" : "NOT monotone",
                static_cast<unsigned long long>(at_d[0]), silent ? "0 B" : "NOT silent");
}

std::string bounded_staleness(bool& ok) {
  // Adaptive thresholds on a decaying drift stream over 100 epochs.
  DriftSpec spec;
  spec.decay = 0.97;
  const std::size_t n = 1000;
  DriftStream drift(n, spec);
  EmbeddingCache cache(n, spec.dim);
  auto trace = synthetic_loss_trace(100, 2.0, 0.05, 0.1);
  filter_transmissions(drift.gather(first_n(n)), cache, 0.0);
  double max_theta = 0.0;
  double max_gap = 0.0;
  for (std::uint32_t r = 2; r <= 100; ++r) {
    drift.advance();
    auto batch = drift.gather(first_n(n));
    const double theta = threshold(trace, r, max_cached_distance(batch, cache), {StaleMode::adaptive_prose, 0.0});
    max_theta = std::max(max_theta, theta);
    filter_transmissions(batch, cache, theta);
    max_gap = std::max(max_gap, accumulate_error_bound(cache, batch));
  }
  const bool bounded = max_gap <= max_theta + 1e-6;

  // Constant drift: every vertex moves 0.1 per epoch along its own fixed
  // direction, with theta fixed at 0.25.
  const double step = 0.1;
  const double theta = 0.25;
  const std::uint32_t dim = 8;
  const std::size_t m = 200;
  std::mt19937_64 rng(8008);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> direction(m * dim);
  for (std::size_t v = 0; v < m; ++v) {
    double norm = 0.0;
    for (std::uint32_t i = 0; i < dim; ++i) norm += std::pow(direction[v * dim + i] = gauss(rng), 2);
    for (std::uint32_t i = 0; i < dim; ++i) direction[v * dim + i] /= std::sqrt(norm);
  }
  PreviousEpochFilter previous(m, dim);
  EmbeddingCache last_sent(m, dim);
  double previous_gap = 0.0;
  double last_sent_gap = 0.0;
  bool growing = true;
  for (std::uint32_t e = 0; e <= 100; ++e) {
    EmbeddingBatch batch;
    batch.dim = dim;
    batch.vertices = first_n(m);
    for (std::size_t v = 0; v < m; ++v) {
      for (std::uint32_t i = 0; i < dim; ++i) batch.values.push_back(static_cast<float>(e * step * direction[v * dim + i]));
    }
    previous.filter(batch, theta);
    filter_transmissions(batch, last_sent, theta);
    const double gap = accumulate_error_bound(previous.receiver_view(), batch);
    if (e > 0 && gap <= previous_gap) growing = false;
    previous_gap = gap;
    last_sent_gap = std::max(last_sent_gap, accumulate_error_bound(last_sent, batch));
  }
  ok = ok && bounded && growing && last_sent_gap <= theta + 1e-6 && previous_gap > 10 * theta;
  return format("(c) adaptive theta, 100 epochs: max gap %.4f <= max theta %.4f: %s; constant drift 0.1/epoch at theta "
                "0.25: last-sent gap <= %.3f, previous-epoch gap %s to %.2f by epoch 100",
                max_gap, max_theta, bounded ? "yes" : "NO", last_sent_gap,
                growing ? "grows every epoch" : "does NOT grow steadily", previous_gap);
}

std::string calibrated_share(bool& ok) {
  DriftSpec spec;
  spec.mean_magnitude = drift_mean_for_quantile(0.85, 1.0);
  const std::size_t n = 20000;
  DriftStream drift(n, spec);
  EmbeddingCache cache(n, spec.dim);
  filter_transmissions(drift.gather(first_n(n)), cache, 0.0);
  drift.advance();
  auto sent = filter_transmissions(drift.gather(first_n(n)), cache, 1.0).send.size();
  const double share = static_cast<double>(sent) / static_cast<double>(n);
  const bool within = std::fabs(share - 0.15) <= 0.02;
  ok = ok && within;
  return format("(d) drift with 85%% of distances < 1.0, theta 1.0: %.2f%% transmitted (target 15 +/- 2%%)",
                100.0 * share);
}

Verdict staleness() {
  bool ok = true;
  std::string detail = staleness_traffic(ok);
  detail += "\n    " + bounded_staleness(ok);
  detail += "\n    " + calibrated_share(ok);
  return {ok, detail};
}

// ---- 9 ----------------------------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  const auto root = fs::temp_directory_path() / "stchunk_acceptance_determinism";
  fs::remove_all(root);
  std::vector<fs::path> dirs{root / "first", root / "second"};
  for (const auto& dir : dirs) {
    std::vector<std::string> args{"stchunk", "compare", "--out", dir.string(), "--seed", "9",
                                  "--graph.total_vertices", "20000", "--graph.total_edges", "8000",
                                  "--graph.snapshots", "40", "--graph.edges_mean", "200", "--graph.edges_stddev", "80",
                                  "--cluster.n_devices", "4", "--stale.mode", "adaptive-prose", "--epochs", "5"};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != 0) {
      return {false, "compare failed: " + err.str()};
    }
  }
  const bool report = slurp(dirs[0] / kReportFile) == slurp(dirs[1] / kReportFile);
  const bool csv = slurp(dirs[0] / kCompareFile) == slurp(dirs[1] / kCompareFile);
  const auto size = fs::file_size(dirs[0] / kReportFile);
  fs::remove_all(root);
  return {report && csv, format("two compare runs (20K instances, 4 methods, 5 epochs, adaptive staleness): report.json "
                                "%s (%llu bytes), compare.csv %s",
                                report ? "identical" : "DIFFERS", static_cast<unsigned long long>(size),
                                csv ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* title, const Verdict& v) {
    std::printf("C%-2d %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", title, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  };
  Predictor predictor;
  report(1, "traffic oracle", traffic_oracle());
  report(2, "partition validity and duality", partition_duality());
  report(3, "PGC traffic quality", pgc_quality());
  tgcn_sweep_note();
  report(4, "fused equals unfused", fused_equals_unfused());
  report(5, "packing", packing());
  report(6, "predictor", predictor_accuracy(predictor));
  report(7, "load balance", load_balance(predictor));
  report(8, "staleness", staleness());
  report(9, "determinism", determinism());
  report(10, "overhead", overhead());
  SimulationOptions adaptive;
  adaptive.stale = {StaleMode::adaptive_prose, 0.0};
  std::printf("   info: with adaptive staleness in the simulated epochs the same ratio is %.1f%%\n",
              100.0 * median(overhead_ratios(adaptive)));
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
