#pragma once

#include <cstdint>
#include <vector>

#include "trajnav/nn/layers.hpp"

namespace trajnav::nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double grad_clip = 0.0;  // global L2 norm; 0 disables clipping
};

// Adam with decoupled weight decay. Decay applies to matrices only (rank
// >= 2); biases, norms and token vectors are left undecayed.
template <typename T>
class AdamW {
 public:
  AdamW(ParameterList<T> params, AdamWConfig cfg);

  // Every parameter must carry a gradient; throws OptimizerError otherwise.
  void step();
  void zero_grad();

  std::uint64_t steps() const noexcept { return step_; }
  const AdamWConfig& config() const noexcept { return cfg_; }
  void set_lr(double lr) noexcept { cfg_.lr = lr; }

  std::span<const double> first_moment(std::size_t i) const { return m_[i]; }
  std::span<const double> second_moment(std::size_t i) const { return v_[i]; }
  const ParameterList<T>& parameters() const noexcept { return params_; }

 private:
  ParameterList<T> params_;
  AdamWConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t step_ = 0;
};

// Global L2 norm of all present gradients.
template <typename T>
double gradient_norm(const ParameterList<T>& params);

}  // namespace trajnav::nn
