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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "stchunk/cost_model.hpp"
#include "stchunk/mlp.hpp"

namespace stchunk {

/// Flattened predictor input: n_vertices, n_edges, total_sequence_length,
/// feature_dim, then layer dims as (depth, max width, total width).
inline constexpr int kPredictorFeatures = 7;
inline constexpr int kPredictorHidden = 256;
inline constexpr int kPredictorHiddenLayers = 3;

std::array<double, kPredictorFeatures> encode_features(const ChunkStats& stats);

/// One measured chunk: both encoder timings are recorded separately so each
/// MLP learns its own target.
struct PredictorSample {
  ChunkStats stats;
  double structure_ms = 0.0;
  double time_ms = 0.0;

  double total_ms() const { return structure_ms + time_ms; }
};

struct TrainOptions {
  std::uint32_t epochs = 100;
  std::uint32_t batch_size = 128;
  double learning_rate = 1e-3;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
};

/// Chunk workload predictor: one MLP for the structure encoder and one for
/// the time encoder, each 3 x 256 ReLU hidden layers over standardized
/// features. Each head outputs log(ms / scale). A default-constructed
/// predictor has zero scales and predicts 0.
class Predictor {
 public:
  Predictor();

  /// structure head + time head, clamped at 0.
  double predict(const ChunkStats& stats) const;
  double predict(const ChunkStats& stats, Encoder encoder) const;

  double train_mape() const { return train_mape_; }
  double validation_mape() const { return validation_mape_; }

  nlohmann::json to_json() const;
  static Predictor from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Predictor load(const std::filesystem::path& path);

 private:
  friend Predictor train_predictor(std::span<const PredictorSample>, const TrainOptions&);

  double raw(const ChunkStats& stats, Encoder encoder) const;

  std::array<double, kPredictorFeatures> mean_{};
  std::array<double, kPredictorFeatures> stddev_{};
  Mlp<float> structure_;
  Mlp<float> time_;
  double structure_scale_ = 0.0;
  double time_scale_ = 0.0;
  double train_mape_ = 0.0;
  double validation_mape_ = 0.0;
};

/// Layer widths shared by both predictor MLPs.
std::vector<int> predictor_widths();

/// Adam on the MAPE loss. Needs >= 100 samples with positive timings; throws
/// CostModelError on a non-finite loss. Deterministic for a fixed seed.
Predictor train_predictor(std::span<const PredictorSample> samples, const TrainOptions& options);

/// Draws random chunk statistics and labels them with true_cost times
/// (1 + noise * N(0, 1)), floored at 1% of the clean value.
std::vector<PredictorSample> synthesize_samples(std::size_t count, const Calibration& coeffs,
                                                double noise, std::uint64_t seed);

/// Random chunk statistics in the range the synthetic sample set covers.
ChunkStats random_chunk_stats(std::mt19937_64& rng);

}  // namespace stchunk
