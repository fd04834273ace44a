#pragma once

#include <vector>

#include "ctxsum/nn/layers.h"

namespace ctxsum::nn {

// Rescales all gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(ParameterSet<T>& params, double max_norm);

template <typename T>
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // Applies the accumulated gradients, then leaves them untouched.
  virtual void step(ParameterSet<T>& params) = 0;
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 protected:
  explicit Optimizer(double lr) : lr_(lr) {}
  double lr_;
};

// v = mu v + g ; w -= lr v
template <typename T>
class SgdMomentum : public Optimizer<T> {
 public:
  explicit SgdMomentum(double lr, double momentum = 0.9)
      : Optimizer<T>(lr), momentum_(momentum) {}
  void step(ParameterSet<T>& params) override;

 private:
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

template <typename T>
class Adam : public Optimizer<T> {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : Optimizer<T>(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ParameterSet<T>& params) override;

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace ctxsum::nn
