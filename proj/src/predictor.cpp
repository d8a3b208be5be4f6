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

#include "stchunk/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

namespace stchunk {

namespace {

constexpr const char* kPredictorFormat = "stchunk.predictor/3";

// Counts span orders of magnitude; the networks see log1p of every feature,
// standardized on the training split.
std::array<double, kPredictorFeatures> model_input(const ChunkStats& stats) {
  auto f = encode_features(stats);
  for (auto& v : f) v = std::log1p(v);
  return f;
}

using MatrixF = Mlp<float>::Matrix;
using RowF = Mlp<float>::RowVector;

nlohmann::json mlp_to_json(const Mlp<float>& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const auto& w = net.weight(k);
    const auto& b = net.bias(k);
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weight", std::vector<float>(w.data(), w.data() + w.size())},
                      {"bias", std::vector<float>(b.data(), b.data() + b.size())}});
  }
  return {{"widths", net.widths()}, {"layers", layers}};
}

Mlp<float> mlp_from_json(const nlohmann::json& j) {
  Mlp<float> net(j.at("widths").get<std::vector<int>>());
  const auto& layers = j.at("layers");
  if (layers.size() != net.num_layers()) throw CostModelError("predictor file: layer count mismatch");
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    auto w = layers[k].at("weight").get<std::vector<float>>();
    auto b = layers[k].at("bias").get<std::vector<float>>();
    if (w.size() != static_cast<std::size_t>(net.weight(k).size()) ||
        b.size() != static_cast<std::size_t>(net.bias(k).size())) {
      throw CostModelError("predictor file: layer " + std::to_string(k) + " has wrong shape");
    }
    std::copy(w.begin(), w.end(), net.weight(k).data());
    std::copy(b.begin(), b.end(), net.bias(k).data());
  }
  return net;
}

std::uint32_t pick(std::mt19937_64& rng, std::initializer_list<std::uint32_t> values) {
  std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
  return *(values.begin() + d(rng));
}

}  // namespace

std::array<double, kPredictorFeatures> encode_features(const ChunkStats& stats) {
  return {static_cast<double>(stats.n_vertices),
          static_cast<double>(stats.n_edges),
          static_cast<double>(stats.total_sequence_length),
          static_cast<double>(stats.feature_dim),
          static_cast<double>(stats.depth()),
          static_cast<double>(stats.max_width()),
          static_cast<double>(stats.total_width())};
}

std::vector<int> predictor_widths() {
  std::vector<int> widths{kPredictorFeatures};
  for (int k = 0; k < kPredictorHiddenLayers; ++k) widths.push_back(kPredictorHidden);
  widths.push_back(1);
  return widths;
}

Predictor::Predictor() : structure_(predictor_widths()), time_(predictor_widths()) {
  stddev_.fill(1.0);
}

double Predictor::raw(const ChunkStats& stats, Encoder encoder) const {
  auto f = model_input(stats);
  MatrixF x(kPredictorFeatures, 1);
  for (int i = 0; i < kPredictorFeatures; ++i) {
    x(i, 0) = static_cast<float>((f[static_cast<std::size_t>(i)] - mean_[static_cast<std::size_t>(i)]) /
                                 stddev_[static_cast<std::size_t>(i)]);
  }
  const auto& net = encoder == Encoder::structure ? structure_ : time_;
  const double scale = encoder == Encoder::structure ? structure_scale_ : time_scale_;
  return scale * std::exp(std::min(static_cast<double>(net.predict(x)[0]), kMaxLogOutput));
}

double Predictor::predict(const ChunkStats& stats, Encoder encoder) const {
  return std::max(0.0, raw(stats, encoder));
}

double Predictor::predict(const ChunkStats& stats) const {
  return std::max(0.0, raw(stats, Encoder::structure) + raw(stats, Encoder::time));
}

nlohmann::json Predictor::to_json() const {
  return {{"format", kPredictorFormat},
          {"feature_mean", mean_},
          {"feature_stddev", stddev_},
          {"structure", mlp_to_json(structure_)},
          {"time", mlp_to_json(time_)},
          {"structure_scale", structure_scale_},
          {"time_scale", time_scale_},
          {"train_mape", train_mape_},
          {"validation_mape", validation_mape_}};
}

Predictor Predictor::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kPredictorFormat) {
    throw CostModelError("not a predictor file (expected format " + std::string(kPredictorFormat) + ")");
  }
  Predictor p;
  p.mean_ = j.at("feature_mean").get<std::array<double, kPredictorFeatures>>();
  p.stddev_ = j.at("feature_stddev").get<std::array<double, kPredictorFeatures>>();
  p.structure_ = mlp_from_json(j.at("structure"));
  p.time_ = mlp_from_json(j.at("time"));
  p.structure_scale_ = j.at("structure_scale").get<double>();
  p.time_scale_ = j.at("time_scale").get<double>();
  p.train_mape_ = j.value("train_mape", 0.0);
  p.validation_mape_ = j.value("validation_mape", 0.0);
  return p;
}

void Predictor::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CostModelError("cannot write predictor file " + path.string());
  out << to_json().dump();
}

Predictor Predictor::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CostModelError("cannot open predictor file " + path.string());
  return from_json(nlohmann::json::parse(in));
}

Predictor train_predictor(std::span<const PredictorSample> samples, const TrainOptions& options) {
  if (samples.size() < 100) throw CostModelError("train_predictor needs at least 100 samples");
  for (const auto& s : samples) {
    if (!(s.structure_ms > 0.0) || !(s.time_ms > 0.0)) {
      throw CostModelError("train_predictor needs strictly positive measured times");
    }
  }
  if (options.batch_size < 1) throw CostModelError("batch_size must be >= 1");

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(options.validation_fraction * static_cast<double>(samples.size()));
  n_val = std::min(n_val, samples.size() - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  Predictor p;
  // Standardize features on the training split.
  for (int i = 0; i < kPredictorFeatures; ++i) {
    auto fi = static_cast<std::size_t>(i);
    double sum = 0.0, sq = 0.0;
    for (auto k : train) {
      double v = model_input(samples[k].stats)[fi];
      sum += v;
      sq += v * v;
    }
    double n = static_cast<double>(train.size());
    p.mean_[fi] = sum / n;
    double var = std::max(0.0, sq / n - p.mean_[fi] * p.mean_[fi]);
    p.stddev_[fi] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  // Geometric mean targets: the heads regress log(target / scale).
  double s_log = 0.0, t_log = 0.0;
  for (auto k : train) {
    s_log += std::log(samples[k].structure_ms);
    t_log += std::log(samples[k].time_ms);
  }
  p.structure_scale_ = std::exp(s_log / static_cast<double>(train.size()));
  p.time_scale_ = std::exp(t_log / static_cast<double>(train.size()));

  auto features_of = [&](std::span<const std::size_t> idx) {
    MatrixF x(kPredictorFeatures, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
      auto f = model_input(samples[idx[c]].stats);
      for (int i = 0; i < kPredictorFeatures; ++i) {
        auto fi = static_cast<std::size_t>(i);
        x(i, static_cast<Eigen::Index>(c)) = static_cast<float>((f[fi] - p.mean_[fi]) / p.stddev_[fi]);
      }
    }
    return x;
  };

  Adam<float>::Options adam_options;
  adam_options.learning_rate = options.learning_rate;
  struct Head {
    Mlp<float>* net;
    double scale;
    bool structure;
  };
  std::uniform_int_distribution<std::uint64_t> seeds;
  // A damped last layer starts every prediction near the scale.
  for (auto* net : {&p.structure_, &p.time_}) {
    net->initialize(seeds(rng));
    auto last = net->num_layers() - 1;
    net->weight(last) *= 0.01f;
    net->bias(last).setZero();
  }

  for (Head head : {Head{&p.structure_, p.structure_scale_, true}, Head{&p.time_, p.time_scale_, false}}) {
    Adam<float> adam(*head.net, adam_options);
    std::vector<std::size_t> epoch_order = train;
    for (std::uint32_t epoch = 0; epoch < options.epochs; ++epoch) {
      // Cosine decay to zero over the run; the L1 loss otherwise keeps the
      // weights jittering at the full rate.
      const double progress = static_cast<double>(epoch) / options.epochs;
      adam.set_learning_rate(options.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
      std::shuffle(epoch_order.begin(), epoch_order.end(), rng);
      double epoch_loss = 0.0;
      for (std::size_t start = 0; start < epoch_order.size(); start += options.batch_size) {
        auto end = std::min(epoch_order.size(), start + options.batch_size);
        std::span<const std::size_t> batch(epoch_order.data() + start, end - start);
        auto x = features_of(batch);
        RowF y(static_cast<Eigen::Index>(batch.size()));
        for (std::size_t c = 0; c < batch.size(); ++c) {
          const auto& s = samples[batch[c]];
          y[static_cast<Eigen::Index>(c)] = static_cast<float>(head.structure ? s.structure_ms : s.time_ms);
        }
        head.net->reset_gradients();
        double loss = mape_loss_and_gradient(*head.net, x, y, static_cast<float>(head.scale));
        if (!std::isfinite(loss)) {
          throw CostModelError("predictor training diverged: non-finite loss at epoch " +
                               std::to_string(epoch + 1));
        }
        epoch_loss += loss * static_cast<double>(batch.size());
        adam.step(*head.net);
      }
      if (!std::isfinite(epoch_loss)) throw CostModelError("predictor training diverged");
    }
  }

  auto evaluate = [&](const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(idx.size());
    for (auto k : idx) pairs.emplace_back(p.predict(samples[k].stats), samples[k].total_ms());
    return mape(pairs);
  };
  p.train_mape_ = evaluate(train);
  p.validation_mape_ = evaluate(val);
  return p;
}

ChunkStats random_chunk_stats(std::mt19937_64& rng) {
  // Covers what the pipeline hands the predictor: single-vertex chunks up to
  // a few thousand members, dense cut-heavy chunks, all-snapshots sequence
  // totals and narrow embedding widths.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ChunkStats s;
  s.n_vertices = static_cast<std::uint64_t>(std::exp(unit(rng) * std::log(4096.0)));
  s.n_edges = static_cast<std::uint64_t>(static_cast<double>(s.n_vertices) * 16.0 * unit(rng));
  s.total_sequence_length =
      static_cast<std::uint64_t>(static_cast<double>(s.n_vertices) * std::exp(unit(rng) * std::log(24.0)));
  s.feature_dim = pick(rng, {2, 4, 8, 16});
  auto depth = std::uniform_int_distribution<std::uint32_t>(1, 4)(rng);
  for (std::uint32_t k = 0; k < depth; ++k) s.layer_dims.push_back(pick(rng, {4, 8, 16, 32, 64}));
  return s;
}

std::vector<PredictorSample> synthesize_samples(std::size_t count, const Calibration& coeffs, double noise,
                                                std::uint64_t seed) {
  coeffs.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<PredictorSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PredictorSample s;
    s.stats = random_chunk_stats(rng);
    double cs = true_cost(s.stats, Encoder::structure, coeffs);
    double ct = true_cost(s.stats, Encoder::time, coeffs);
    s.structure_ms = std::max(0.01 * cs, cs * (1.0 + noise * gauss(rng)));
    s.time_ms = std::max(0.01 * ct, ct * (1.0 + noise * gauss(rng)));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace stchunk
