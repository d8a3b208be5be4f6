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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace stchunk {

/// Fully connected ReLU network with a scalar linear output.
///
/// Inputs are column batches (features x batch). Hidden layers use ReLU;
/// the output layer is affine so that the loss sees an unclamped value.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  Mlp() = default;

  /// Zero-initialised network with the given layer widths (input first,
  /// output width 1 last).
  explicit Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2 || widths_.back() != 1) {
      throw std::invalid_argument("Mlp needs at least an input and a scalar output layer");
    }
    for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
      weights_.push_back(Matrix::Zero(widths_[k + 1], widths_[k]));
      biases_.push_back(Vector::Zero(widths_[k + 1]));
    }
    reset_gradients();
  }

  /// He-uniform weights, zero biases.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& w : weights_) {
      double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
    }
    for (auto& b : biases_) b.setZero();
  }

  const std::vector<int>& widths() const { return widths_; }
  std::size_t num_layers() const { return weights_.size(); }
  const Matrix& weight(std::size_t k) const { return weights_[k]; }
  const Vector& bias(std::size_t k) const { return biases_[k]; }
  Matrix& weight(std::size_t k) { return weights_[k]; }
  Vector& bias(std::size_t k) { return biases_[k]; }

  /// Forward pass without keeping activations.
  RowVector predict(const Matrix& x) const {
    Matrix a = x;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      Matrix z = (weights_[k] * a).colwise() + biases_[k];
      a = k + 1 < weights_.size() ? Matrix(z.cwiseMax(Scalar(0))) : z;
    }
    return a.row(0);
  }

  /// Forward pass recording activations for backward().
  RowVector forward(const Matrix& x) {
    activations_.resize(weights_.size() + 1);
    activations_[0] = x;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      Matrix z = (weights_[k] * activations_[k]).colwise() + biases_[k];
      activations_[k + 1] = k + 1 < weights_.size() ? Matrix(z.cwiseMax(Scalar(0))) : z;
    }
    return activations_.back().row(0);
  }

  /// Accumulates parameter gradients given dLoss/dOutput for the last forward().
  void backward(const RowVector& grad_output) {
    Matrix delta = grad_output;
    for (std::size_t k = weights_.size(); k-- > 0;) {
      grad_weights_[k].noalias() += delta * activations_[k].transpose();
      grad_biases_[k] += delta.rowwise().sum();
      if (k == 0) break;
      Matrix back = weights_[k].transpose() * delta;
      // ReLU derivative; activation > 0 iff pre-activation > 0.
      delta = back.cwiseProduct(
          activations_[k].unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); }));
    }
  }

  void reset_gradients() {
    grad_weights_.clear();
    grad_biases_.clear();
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      grad_weights_.push_back(Matrix::Zero(weights_[k].rows(), weights_[k].cols()));
      grad_biases_.push_back(Vector::Zero(biases_[k].size()));
    }
  }

  // Flat parameter view: layer by layer, weights (column-major) then bias.
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) n += weights_[k].size() + biases_[k].size();
    return n;
  }
  Scalar& parameter(std::size_t index) { return locate(index, false); }
  Scalar gradient(std::size_t index) { return locate(index, true); }

  const std::vector<Matrix>& weight_gradients() const { return grad_weights_; }
  const std::vector<Vector>& bias_gradients() const { return grad_biases_; }

 private:
  Scalar& locate(std::size_t index, bool grad) {
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      auto nw = static_cast<std::size_t>(weights_[k].size());
      if (index < nw) return grad ? grad_weights_[k].data()[index] : weights_[k].data()[index];
      index -= nw;
      auto nb = static_cast<std::size_t>(biases_[k].size());
      if (index < nb) return grad ? grad_biases_[k].data()[index] : biases_[k].data()[index];
      index -= nb;
    }
    throw std::out_of_range("Mlp parameter index");
  }

  std::vector<int> widths_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  std::vector<Matrix> grad_weights_;
  std::vector<Vector> grad_biases_;
  std::vector<Matrix> activations_;
};

/// Adaptive-moment optimizer over every parameter of one Mlp.
template <typename Scalar>
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  using Matrix = typename Mlp<Scalar>::Matrix;
  using Vector = typename Mlp<Scalar>::Vector;

  explicit Adam(const Mlp<Scalar>& net, Options options = {}) : options_(options) {
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
      m_w_.push_back(Matrix::Zero(net.weight(k).rows(), net.weight(k).cols()));
      v_w_.push_back(m_w_.back());
      m_b_.push_back(Vector::Zero(net.bias(k).size()));
      v_b_.push_back(m_b_.back());
    }
  }

  void set_learning_rate(double rate) { options_.learning_rate = rate; }

  void step(Mlp<Scalar>& net) {
    ++t_;
    const Scalar b1 = static_cast<Scalar>(options_.beta1);
    const Scalar b2 = static_cast<Scalar>(options_.beta2);
    const Scalar lr = static_cast<Scalar>(options_.learning_rate *
                                          std::sqrt(1.0 - std::pow(options_.beta2, t_)) /
                                          (1.0 - std::pow(options_.beta1, t_)));
    const Scalar eps = static_cast<Scalar>(options_.epsilon);
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
      update(net.weight(k), net.weight_gradients()[k], m_w_[k], v_w_[k], b1, b2, lr, eps);
      update(net.bias(k), net.bias_gradients()[k], m_b_[k], v_b_[k], b1, b2, lr, eps);
    }
  }

 private:
  template <typename Param, typename Grad, typename State>
  static void update(Param& p, const Grad& g, State& m, State& v, Scalar b1, Scalar b2, Scalar lr,
                     Scalar eps) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    p -= lr * (m.array() / (v.array().sqrt() + eps)).matrix();
  }

  Options options_;
  long t_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
};

/// Largest exponent the output link accepts; keeps exp finite in float.
inline constexpr double kMaxLogOutput = 40.0;

/// MAPE of scale * exp(net(x)) against targets y; accumulates gradients into
/// net. The subgradient at predicted == measured is 0.
template <typename Scalar>
double mape_loss_and_gradient(Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x,
                              const typename Mlp<Scalar>::RowVector& y, Scalar scale) {
  auto out = net.forward(x);
  const auto n = static_cast<Scalar>(x.cols());
  typename Mlp<Scalar>::RowVector grad(out.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const Scalar z = std::min(out[i], static_cast<Scalar>(kMaxLogOutput));
    const Scalar predicted = scale * std::exp(z);
    const Scalar diff = predicted - y[i];
    loss += std::abs(static_cast<double>(diff)) / static_cast<double>(y[i]);
    Scalar sign = diff > Scalar(0) ? Scalar(1) : (diff < Scalar(0) ? Scalar(-1) : Scalar(0));
    if (out[i] > static_cast<Scalar>(kMaxLogOutput)) sign = Scalar(0);
    grad[i] = sign * predicted / (y[i] * n);
  }
  net.backward(grad);
  return loss / static_cast<double>(x.cols());
}

}  // namespace stchunk
