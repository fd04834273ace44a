#include "ctxsum/nn/optim.h"

#include <cmath>

namespace ctxsum::nn {

template <typename T>
double clip_grad_norm(ParameterSet<T>& params, double max_norm) {
  double sq = 0.0;
  for (auto& [name, t] : params.items()) {
    if (!t.has_grad()) continue;
    for (T g : t.grad()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T f = static_cast<T>(max_norm / norm);
    for (auto& [name, t] : params.items()) {
      if (!t.has_grad()) continue;
      for (T& g : t.grad()) g *= f;
    }
  }
  return norm;
}

template <typename T>
void SgdMomentum<T>::step(ParameterSet<T>& params) {
  auto& items = params.items();
  if (velocity_.size() != items.size()) {
    velocity_.clear();
    for (auto& [name, t] : items) velocity_.emplace_back(t.size(), 0.0);
  }
  for (std::size_t p = 0; p < items.size(); ++p) {
    Tensor<T>& t = items[p].second;
    if (!t.has_grad()) continue;
    auto g = t.grad();
    auto& w = t.values();
    auto& v = velocity_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      w[i] -= static_cast<T>(this->lr_ * v[i]);
    }
  }
}

template <typename T>
void Adam<T>::step(ParameterSet<T>& params) {
  auto& items = params.items();
  if (m_.size() != items.size()) {
    m_.clear();
    v_.clear();
    for (auto& [name, t] : items) {
      m_.emplace_back(t.size(), 0.0);
      v_.emplace_back(t.size(), 0.0);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t p = 0; p < items.size(); ++p) {
    Tensor<T>& t = items[p].second;
    if (!t.has_grad()) continue;
    auto g = t.grad();
    auto& w = t.values();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
      w[i] -= static_cast<T>(this->lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_));
    }
  }
}

template double clip_grad_norm(ParameterSet<float>&, double);
template double clip_grad_norm(ParameterSet<double>&, double);
template class SgdMomentum<float>;
template class SgdMomentum<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace ctxsum::nn
