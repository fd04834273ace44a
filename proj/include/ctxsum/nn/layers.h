#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctxsum/nn/ops.h"
#include "ctxsum/nn/tensor.h"
#include "ctxsum/rng.h"

namespace ctxsum::nn {

// Ordered, named collection of trainable tensors. Names are unique and
// insertion order is the serialization order.
template <typename T>
class ParameterSet {
 public:
  Tensor<T> add(const std::string& name, Shape shape);
  Tensor<T>& get(const std::string& name);
  const Tensor<T>& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<std::pair<std::string, Tensor<T>>>& items() { return items_; }
  const std::vector<std::pair<std::string, Tensor<T>>>& items() const {
    return items_;
  }
  std::size_t size() const { return items_.size(); }
  std::size_t num_values() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor<T>>> items_;
};

enum class InitKind { kUniform, kNormal };

// Uniform in [-scale, scale] or normal(0, scale).
struct InitSpec {
  InitKind kind = InitKind::kUniform;
  double scale = 0.1;
};

template <typename T>
void init_tensor(Tensor<T>& t, const InitSpec& spec, Rng& rng);

// Fills every parameter in insertion order. Biases are initialised like
// weights; callers override special biases afterwards.
template <typename T>
void init_params(ParameterSet<T>& params, const InitSpec& spec, Rng& rng);

template <typename T>
struct Linear {
  Tensor<T> weight;  // in x out
  Tensor<T> bias;    // 1 x out

  Linear() = default;
  Linear(ParameterSet<T>& params, const std::string& name, std::size_t in,
         std::size_t out);
  Tensor<T> operator()(const Tensor<T>& x) const;
};

// h_t = sigmoid(x_t W_hx + h_{t-1} W_hh), y_t = h_t W_yh.
template <typename T>
struct RnnCellParams {
  Tensor<T> w_hx;  // in x H
  Tensor<T> w_hh;  // H x H
  Tensor<T> w_yh;  // H x out; may be undefined

  RnnCellParams() = default;
  RnnCellParams(ParameterSet<T>& params, const std::string& name,
                std::size_t in, std::size_t hidden, std::size_t out);
};

template <typename T>
std::pair<Tensor<T>, Tensor<T>> rnn_step(const Tensor<T>& x,
                                         const Tensor<T>& h_prev,
                                         const RnnCellParams<T>& p);

// Gates computed together as [x, h] W + b with column blocks
// (input, forget, output, candidate).
template <typename T>
struct LstmCellParams {
  Tensor<T> weight;  // (in + H) x 4H
  Tensor<T> bias;    // 1 x 4H
  std::size_t input_size = 0;
  std::size_t hidden = 0;

  LstmCellParams() = default;
  LstmCellParams(ParameterSet<T>& params, const std::string& name,
                 std::size_t in, std::size_t hidden);
  void set_forget_bias(T value);
};

template <typename T>
struct LstmState {
  std::vector<Tensor<T>> h;  // one B x H per layer
  std::vector<Tensor<T>> c;
};

// c_t = f * c_prev + i * g ; h_t = o * tanh(c_t)
template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_step(const Tensor<T>& x,
                                          const Tensor<T>& h_prev,
                                          const Tensor<T>& c_prev,
                                          const LstmCellParams<T>& p);

template <typename T>
class LstmStack {
 public:
  LstmStack() = default;
  LstmStack(ParameterSet<T>& params, const std::string& name,
            std::size_t input_size, std::size_t hidden, std::size_t layers);

  std::size_t layers() const { return cells_.size(); }
  std::size_t hidden() const { return hidden_; }
  std::size_t input_size() const { return input_size_; }
  LstmState<T> zero_state(std::size_t batch) const;
  void set_forget_bias(T value);

  // One time step through every layer. Rows whose mask entry is 0 keep their
  // previous state, so padded positions do not alter the encoding. An empty
  // mask means all rows are active.
  LstmState<T> step(const Tensor<T>& x, const LstmState<T>& state,
                    std::span<const T> mask = {}) const;

 private:
  std::vector<LstmCellParams<T>> cells_;
  std::size_t input_size_ = 0;
  std::size_t hidden_ = 0;
};

// Valid 1-D convolution over time (window `width`, stride 1) + bias + ReLU,
// followed by non-overlapping max-pooling of `pool` steps. The input sequence
// (T steps of B x k) is zero-padded to at least `width` steps, and the
// convolution output to a multiple of `pool`.
template <typename T>
std::vector<Tensor<T>> conv1d_maxpool(const std::vector<Tensor<T>>& seq,
                                      const Tensor<T>& filters,
                                      const Tensor<T>& bias, std::size_t width,
                                      std::size_t pool);

}  // namespace ctxsum::nn
