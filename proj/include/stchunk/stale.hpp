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
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stchunk {

class StaleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StaleMode {
  off,             // theta = 0: every changed embedding is sent
  fixed,           // theta = fraction * D_r
  adaptive_paper,  // theta = D_r / (1 + exp(norm(l_{r-1})))
  adaptive_prose,  // theta = D_r / (1 + exp(-norm(l_{r-1})))
};

std::string to_string(StaleMode mode);
StaleMode stale_mode_from_string(const std::string& name);

struct StaleConfig {
  StaleMode mode = StaleMode::adaptive_prose;
  double fraction = 0.0;  // fixed mode only, in [0, 1]

  void validate() const;
};

/// Per-epoch training losses, l_1 first.
using EpochLossTrace = std::vector<double>;

/// norm(l_{r-1}) = (l_1 - l_{r-1}) / l_1.
double normalized_progress(const EpochLossTrace& trace, std::uint32_t r);

/// Threshold for epoch r >= 2 given the epoch's maximum distance D_r.
double threshold(const EpochLossTrace& trace, std::uint32_t r, double max_distance, const StaleConfig& config);

/// l_r = l_1 * (floor + (1 - floor) * exp(-rate * (r - 1))).
EpochLossTrace synthetic_loss_trace(std::uint32_t epochs, double l1, double rate, double floor);

/// Last transmitted embedding of every vertex that has ever been sent.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  EmbeddingCache(std::size_t vertices, std::uint32_t dim);

  std::uint32_t dim() const { return dim_; }
  std::size_t capacity() const { return present_.size(); }
  bool contains(std::size_t v) const { return present_[v] != 0; }
  std::span<const float> get(std::size_t v) const { return {data_.data() + v * dim_, dim_}; }
  void put(std::size_t v, std::span<const float> embedding);
  std::size_t size() const { return count_; }

 private:
  std::uint32_t dim_ = 0;
  std::vector<float> data_;
  std::vector<std::uint8_t> present_;
  std::size_t count_ = 0;
};

double l2_distance(std::span<const float> a, std::span<const float> b);

/// Current embeddings of a set of vertices: row k of `values` (dim floats)
/// belongs to vertices[k].
struct EmbeddingBatch {
  std::vector<std::uint32_t> vertices;
  std::vector<float> values;
  std::uint32_t dim = 0;

  std::span<const float> row(std::size_t k) const { return {values.data() + k * dim, dim}; }
};

/// D_r: the largest distance between a current embedding and its cached copy.
/// Vertices without a cached copy do not contribute.
double max_cached_distance(const EmbeddingBatch& current, const EmbeddingCache& cache);

struct TransmissionSet {
  std::vector<std::uint32_t> send;   // ascending
  std::vector<std::uint32_t> reuse;  // ascending
  double max_distance = 0.0;         // D_r
};

/// Sends a vertex iff it has no cached copy or its distance to the cached copy
/// exceeds theta; sent vertices refresh the cache.
TransmissionSet filter_transmissions(const EmbeddingBatch& current, EmbeddingCache& cache, double theta);

/// Largest distance between a cached embedding and the current one.
double accumulate_error_bound(const EmbeddingCache& cache, const EmbeddingBatch& current);

/// Alternative rule that compares against the previous epoch's embedding
/// instead of the last transmitted one. Kept to show how its receiver-side
/// error accumulates.
class PreviousEpochFilter {
 public:
  PreviousEpochFilter(std::size_t vertices, std::uint32_t dim);

  TransmissionSet filter(const EmbeddingBatch& current, double theta);
  /// What receivers hold (the last value actually sent).
  const EmbeddingCache& receiver_view() const { return received_; }

 private:
  EmbeddingCache previous_;
  EmbeddingCache received_;
};

/// Synthetic embedding drift. Each vertex draws a magnitude m_v from an
/// exponential law with mean `mean_magnitude`; at epoch r >= 2 its embedding
/// moves by m_v * decay^(r-2) in a fresh uniformly random direction.
struct DriftSpec {
  std::uint32_t dim = 8;
  double mean_magnitude = 0.52709;  // P(m_v < 1) = 0.85
  double decay = 0.9;
  double initial_scale = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Mean magnitude for which a fraction q of vertices moves less than `bound`.
double drift_mean_for_quantile(double q, double bound);

class DriftStream {
 public:
  DriftStream(std::size_t vertices, const DriftSpec& spec);

  std::uint32_t epoch() const { return epoch_; }
  std::uint32_t dim() const { return spec_.dim; }
  std::size_t vertices() const { return magnitude_.size(); }
  /// Embedding of vertex v at the current epoch.
  std::span<const float> embedding(std::size_t v) const { return {values_.data() + v * spec_.dim, spec_.dim}; }
  double magnitude(std::size_t v) const { return magnitude_[v]; }
  /// Step length of v between the previous and the current epoch (0 at epoch 1).
  double step_length(std::size_t v) const;
  /// Moves to the next epoch.
  void advance();
  /// Gathers the current embeddings of the given vertices.
  EmbeddingBatch gather(std::span<const std::uint32_t> vertices) const;

 private:
  DriftSpec spec_;
  std::mt19937_64 rng_;
  std::uint32_t epoch_ = 1;
  std::vector<double> magnitude_;
  std::vector<float> values_;
};

/// Embeddings of `vertices` instances for epochs 1..epochs.
std::vector<EmbeddingBatch> drift_stream(std::size_t vertices, std::uint32_t epochs, const DriftSpec& spec);

}  // namespace stchunk
