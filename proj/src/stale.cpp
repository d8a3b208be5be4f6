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

#include "stchunk/stale.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stchunk {

std::string to_string(StaleMode mode) {
  switch (mode) {
    case StaleMode::off: return "off";
    case StaleMode::fixed: return "static";
    case StaleMode::adaptive_paper: return "adaptive-paper";
    case StaleMode::adaptive_prose: return "adaptive-prose";
  }
  return "off";
}

StaleMode stale_mode_from_string(const std::string& name) {
  if (name == "off") return StaleMode::off;
  if (name == "static") return StaleMode::fixed;
  if (name == "adaptive-paper") return StaleMode::adaptive_paper;
  if (name == "adaptive-prose") return StaleMode::adaptive_prose;
  throw StaleError("unknown stale mode '" + name + "'");
}

void StaleConfig::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw StaleError("static stale fraction must lie in [0, 1]");
}

double normalized_progress(const EpochLossTrace& trace, std::uint32_t r) {
  if (r < 2) throw StaleError("threshold needs epoch r >= 2");
  if (trace.size() < r - 1) {
    throw StaleError("loss trace has " + std::to_string(trace.size()) + " epochs, epoch " + std::to_string(r) +
                     " needs " + std::to_string(r - 1));
  }
  if (!(trace[0] > 0.0)) throw StaleError("first epoch loss must be > 0");
  return (trace[0] - trace[r - 2]) / trace[0];
}

double threshold(const EpochLossTrace& trace, std::uint32_t r, double max_distance, const StaleConfig& config) {
  config.validate();
  if (!(max_distance >= 0.0)) throw StaleError("D_r must be >= 0");
  switch (config.mode) {
    case StaleMode::off: return 0.0;
    case StaleMode::fixed: return config.fraction * max_distance;
    case StaleMode::adaptive_paper: return max_distance / (1.0 + std::exp(normalized_progress(trace, r)));
    case StaleMode::adaptive_prose: return max_distance / (1.0 + std::exp(-normalized_progress(trace, r)));
  }
  return 0.0;
}

EpochLossTrace synthetic_loss_trace(std::uint32_t epochs, double l1, double rate, double floor) {
  if (!(l1 > 0.0)) throw StaleError("first epoch loss must be > 0");
  EpochLossTrace trace(epochs);
  for (std::uint32_t r = 1; r <= epochs; ++r) {
    trace[r - 1] = l1 * (floor + (1.0 - floor) * std::exp(-rate * static_cast<double>(r - 1)));
  }
  return trace;
}

EmbeddingCache::EmbeddingCache(std::size_t vertices, std::uint32_t dim)
    : dim_(dim), data_(vertices * dim, 0.0f), present_(vertices, 0) {}

void EmbeddingCache::put(std::size_t v, std::span<const float> embedding) {
  if (embedding.size() != dim_) throw StaleError("embedding width does not match the cache");
  std::copy(embedding.begin(), embedding.end(), data_.begin() + static_cast<std::ptrdiff_t>(v * dim_));
  if (!present_[v]) {
    present_[v] = 1;
    ++count_;
  }
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

void check_widths(const EmbeddingBatch& current, const EmbeddingCache& cache) {
  if (current.dim != cache.dim()) throw StaleError("embedding width does not match the cache");
  if (current.values.size() != current.vertices.size() * current.dim) throw StaleError("malformed embedding batch");
}

}  // namespace

double max_cached_distance(const EmbeddingBatch& current, const EmbeddingCache& cache) {
  check_widths(current, cache);
  double d = 0.0;
  for (std::size_t k = 0; k < current.vertices.size(); ++k) {
    auto v = current.vertices[k];
    if (cache.contains(v)) d = std::max(d, l2_distance(current.row(k), cache.get(v)));
  }
  return d;
}

TransmissionSet filter_transmissions(const EmbeddingBatch& current, EmbeddingCache& cache, double theta) {
  check_widths(current, cache);
  TransmissionSet out;
  for (std::size_t k = 0; k < current.vertices.size(); ++k) {
    auto v = current.vertices[k];
    bool send = true;
    if (cache.contains(v)) {
      double d = l2_distance(current.row(k), cache.get(v));
      out.max_distance = std::max(out.max_distance, d);
      send = d > theta;
    }
    if (send) {
      cache.put(v, current.row(k));
      out.send.push_back(v);
    } else {
      out.reuse.push_back(v);
    }
  }
  std::sort(out.send.begin(), out.send.end());
  std::sort(out.reuse.begin(), out.reuse.end());
  return out;
}

double accumulate_error_bound(const EmbeddingCache& cache, const EmbeddingBatch& current) {
  return max_cached_distance(current, cache);
}

PreviousEpochFilter::PreviousEpochFilter(std::size_t vertices, std::uint32_t dim)
    : previous_(vertices, dim), received_(vertices, dim) {}

TransmissionSet PreviousEpochFilter::filter(const EmbeddingBatch& current, double theta) {
  check_widths(current, previous_);
  TransmissionSet out;
  for (std::size_t k = 0; k < current.vertices.size(); ++k) {
    auto v = current.vertices[k];
    bool send = true;
    if (previous_.contains(v)) {
      double d = l2_distance(current.row(k), previous_.get(v));
      out.max_distance = std::max(out.max_distance, d);
      send = d > theta;
    }
    previous_.put(v, current.row(k));
    if (send) {
      received_.put(v, current.row(k));
      out.send.push_back(v);
    } else {
      out.reuse.push_back(v);
    }
  }
  std::sort(out.send.begin(), out.send.end());
  std::sort(out.reuse.begin(), out.reuse.end());
  return out;
}

void DriftSpec::validate() const {
  if (dim < 1) throw StaleError("drift dim must be >= 1");
  if (!(mean_magnitude >= 0.0)) throw StaleError("drift mean magnitude must be >= 0");
  if (!(decay >= 0.0)) throw StaleError("drift decay must be >= 0");
}

double drift_mean_for_quantile(double q, double bound) {
  if (!(q > 0.0 && q < 1.0) || !(bound > 0.0)) throw StaleError("quantile must be in (0, 1) and bound > 0");
  // P(m < bound) = 1 - exp(-bound / mean) = q
  return bound / -std::log(1.0 - q);
}

DriftStream::DriftStream(std::size_t vertices, const DriftSpec& spec)
    : spec_(spec), rng_(spec.seed), magnitude_(vertices), values_(vertices * spec.dim) {
  spec_.validate();
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& x : values_) x = static_cast<float>(spec_.initial_scale * gauss(rng_));
  if (spec_.mean_magnitude > 0.0) {
    std::exponential_distribution<double> exp_law(1.0 / spec_.mean_magnitude);
    for (auto& m : magnitude_) m = exp_law(rng_);
  }
}

double DriftStream::step_length(std::size_t v) const {
  if (epoch_ < 2) return 0.0;
  return magnitude_[v] * std::pow(spec_.decay, static_cast<double>(epoch_ - 2));
}

void DriftStream::advance() {
  ++epoch_;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> dir(spec_.dim);
  for (std::size_t v = 0; v < magnitude_.size(); ++v) {
    double norm = 0.0;
    for (auto& d : dir) {
      d = gauss(rng_);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    double len = step_length(v);
    for (std::uint32_t i = 0; i < spec_.dim; ++i) {
      auto& x = values_[v * spec_.dim + i];
      x = static_cast<float>(static_cast<double>(x) + (norm > 0.0 ? len * dir[i] / norm : 0.0));
    }
  }
}

EmbeddingBatch DriftStream::gather(std::span<const std::uint32_t> vertices) const {
  EmbeddingBatch batch;
  batch.dim = spec_.dim;
  batch.vertices.assign(vertices.begin(), vertices.end());
  batch.values.reserve(vertices.size() * spec_.dim);
  for (auto v : vertices) {
    auto e = embedding(v);
    batch.values.insert(batch.values.end(), e.begin(), e.end());
  }
  return batch;
}

std::vector<EmbeddingBatch> drift_stream(std::size_t vertices, std::uint32_t epochs, const DriftSpec& spec) {
  if (epochs < 1) throw StaleError("drift_stream needs epochs >= 1");
  DriftStream stream(vertices, spec);
  std::vector<std::uint32_t> all(vertices);
  std::iota(all.begin(), all.end(), 0u);
  std::vector<EmbeddingBatch> out;
  for (std::uint32_t r = 1; r <= epochs; ++r) {
    if (r > 1) stream.advance();
    out.push_back(stream.gather(all));
  }
  return out;
}

}  // namespace stchunk
