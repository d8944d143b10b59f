#include "trajnav/nn/optim.hpp"

#include <cmath>

namespace trajnav::nn {

template <typename T>
AdamW<T>::AdamW(ParameterList<T> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

template <typename T>
double gradient_norm(const ParameterList<T>& params) {
  double total = 0.0;
  for (const auto& p : params) {
    for (T g : p.tensor.grad()) total += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(total);
}

template <typename T>
void AdamW<T>::step() {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) throw OptimizerError("AdamW: parameter '" + p.name + "' has no gradient");
  }
  double clip = 1.0;
  if (cfg_.grad_clip > 0.0) {
    const double norm = gradient_norm(params_);
    if (norm > cfg_.grad_clip) clip = cfg_.grad_clip / norm;
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor<T> param = params_[i].tensor;
    const bool decay = param.rank() >= 2 && cfg_.weight_decay > 0.0;
    auto values = param.mutable_data();
    const auto grads = param.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = static_cast<double>(grads[j]) * clip;
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      double w = static_cast<double>(values[j]);
      if (decay) w -= cfg_.lr * cfg_.weight_decay * w;
      w -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      values[j] = static_cast<T>(w);
    }
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template class AdamW<float>;
template class AdamW<double>;
template double gradient_norm(const ParameterList<float>&);
template double gradient_norm(const ParameterList<double>&);

}  // namespace trajnav::nn
