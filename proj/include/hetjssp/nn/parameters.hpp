#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetjssp/nn/tensor.hpp"

namespace hetjssp::nn {

/// Ordered registry of named parameters. Handles are positions, so a store
/// (and any layer holding handles into it) copies by value.
template <typename Scalar>
class ParameterStore {
 public:
  using Param = Parameter<Scalar>;

  int add(std::string name, Matrix<Scalar> init) {
    if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
    by_name_[name] = static_cast<int>(params_.size());
    params_.push_back({std::move(name), std::move(init), Matrix<Scalar>()});
    params_.back().grad = Matrix<Scalar>::Zero(params_.back().value.rows(), params_.back().value.cols());
    return static_cast<int>(params_.size()) - 1;
  }

  Param& operator[](int handle) { return params_.at(handle); }
  const Param& operator[](int handle) const { return params_.at(handle); }
  Param& at(const std::string& name) { return params_.at(index_of(name)); }
  const Param& at(const std::string& name) const { return params_.at(index_of(name)); }
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }
  int index_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw std::out_of_range("no parameter named '" + name + "'");
    return it->second;
  }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  /// Total number of scalars.
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  Scalar grad_norm() const {
    Scalar sq = 0;
    for (const auto& p : params_) sq += p.grad.squaredNorm();
    return std::sqrt(sq);
  }

 private:
  std::vector<Param> params_;
  std::map<std::string, int> by_name_;
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
};

/// Adam with global-norm gradient clipping. Moments are kept per parameter,
/// in registry order.
template <typename Scalar>
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  long step_count() const { return steps_; }
  const std::vector<Matrix<Scalar>>& first_moments() const { return m_; }
  const std::vector<Matrix<Scalar>>& second_moments() const { return v_; }

  void restore(long steps, std::vector<Matrix<Scalar>> m, std::vector<Matrix<Scalar>> v) {
    steps_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  /// Clips gradients in place to the configured global norm, then applies
  /// one Adam update. Returns the pre-clip norm. Throws on non-finite grads.
  Scalar step(ParameterStore<Scalar>& store) {
    for (const auto& p : store) {
      if (!p.grad.allFinite()) throw std::runtime_error("adam_step: non-finite gradient in parameter '" + p.name + "'");
    }
    const Scalar norm = store.grad_norm();
    if (config_.max_grad_norm > 0 && norm > config_.max_grad_norm) {
      const Scalar scale = static_cast<Scalar>(config_.max_grad_norm) / norm;
      for (auto& p : store) p.grad *= scale;
    }
    if (m_.size() != store.size()) {
      m_.clear();
      v_.clear();
      for (const auto& p : store) {
        m_.push_back(Matrix<Scalar>::Zero(p.value.rows(), p.value.cols()));
        v_.push_back(Matrix<Scalar>::Zero(p.value.rows(), p.value.cols()));
      }
    }
    ++steps_;
    const Scalar b1 = config_.beta1, b2 = config_.beta2;
    const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(steps_));
    const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(steps_));
    const Scalar lr = config_.lr;
    const Scalar eps = config_.eps;
    std::size_t k = 0;
    for (auto& p : store) {
      m_[k] = b1 * m_[k] + (Scalar(1) - b1) * p.grad;
      v_[k] = b2 * v_[k] + (Scalar(1) - b2) * p.grad.cwiseAbs2();
      p.value.array() -= lr * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps);
      ++k;
    }
    return norm;
  }

 private:
  AdamConfig config_;
  long steps_ = 0;
  std::vector<Matrix<Scalar>> m_;
  std::vector<Matrix<Scalar>> v_;
};

}  // namespace hetjssp::nn
