#include "ctxsum/nn/layers.h"

#include <algorithm>

#include "ctxsum/error.h"

namespace ctxsum::nn {

template <typename T>
Tensor<T> ParameterSet<T>::add(const std::string& name, Shape shape) {
  if (contains(name)) throw DuplicateId("parameter already defined: " + name);
  items_.emplace_back(name, Tensor<T>::zeros(std::move(shape), true));
  return items_.back().second;
}

template <typename T>
Tensor<T>& ParameterSet<T>::get(const std::string& name) {
  for (auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw FormatError("no parameter named " + name);
}

template <typename T>
const Tensor<T>& ParameterSet<T>::get(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw FormatError("no parameter named " + name);
}

template <typename T>
bool ParameterSet<T>::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(),
                     [&](const auto& it) { return it.first == name; });
}

template <typename T>
std::size_t ParameterSet<T>::num_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += t.size();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& [name, t] : items_) t.zero_grad();
}

template <typename T>
void init_tensor(Tensor<T>& t, const InitSpec& spec, Rng& rng) {
  if (spec.kind == InitKind::kUniform) {
    std::uniform_real_distribution<double> d(-spec.scale, spec.scale);
    for (T& x : t.values()) x = static_cast<T>(d(rng));
  } else {
    std::normal_distribution<double> d(0.0, spec.scale);
    for (T& x : t.values()) x = static_cast<T>(d(rng));
  }
}

template <typename T>
void init_params(ParameterSet<T>& params, const InitSpec& spec, Rng& rng) {
  for (auto& [name, t] : params.items()) init_tensor(t, spec, rng);
}

template <typename T>
Linear<T>::Linear(ParameterSet<T>& params, const std::string& name,
                  std::size_t in, std::size_t out)
    : weight(params.add(name + ".weight", {in, out})),
      bias(params.add(name + ".bias", {1, out})) {}

template <typename T>
Tensor<T> Linear<T>::operator()(const Tensor<T>& x) const {
  return add(matmul(x, weight), bias);
}

template <typename T>
RnnCellParams<T>::RnnCellParams(ParameterSet<T>& params,
                                const std::string& name, std::size_t in,
                                std::size_t hidden, std::size_t out)
    : w_hx(params.add(name + ".w_hx", {in, hidden})),
      w_hh(params.add(name + ".w_hh", {hidden, hidden})) {
  if (out > 0) w_yh = params.add(name + ".w_yh", {hidden, out});
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> rnn_step(const Tensor<T>& x,
                                         const Tensor<T>& h_prev,
                                         const RnnCellParams<T>& p) {
  if (x.cols() != p.w_hx.rows() || h_prev.cols() != p.w_hh.rows() ||
      x.rows() != h_prev.rows()) {
    throw ShapeMismatch("rnn_step: input or state has the wrong shape");
  }
  Tensor<T> h = sigmoid(add(matmul(x, p.w_hx), matmul(h_prev, p.w_hh)));
  Tensor<T> y = p.w_yh.defined() ? matmul(h, p.w_yh) : Tensor<T>{};
  return {h, y};
}

template <typename T>
LstmCellParams<T>::LstmCellParams(ParameterSet<T>& params,
                                  const std::string& name, std::size_t in,
                                  std::size_t hidden_size)
    : weight(params.add(name + ".weight", {in + hidden_size, 4 * hidden_size})),
      bias(params.add(name + ".bias", {1, 4 * hidden_size})),
      input_size(in),
      hidden(hidden_size) {}

template <typename T>
void LstmCellParams<T>::set_forget_bias(T value) {
  auto& b = bias.values();
  std::fill(b.begin() + static_cast<std::ptrdiff_t>(hidden),
            b.begin() + static_cast<std::ptrdiff_t>(2 * hidden), value);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_step(const Tensor<T>& x,
                                          const Tensor<T>& h_prev,
                                          const Tensor<T>& c_prev,
                                          const LstmCellParams<T>& p) {
  const std::size_t H = p.hidden;
  if (x.cols() != p.input_size || h_prev.cols() != H || c_prev.cols() != H ||
      x.rows() != h_prev.rows() || x.rows() != c_prev.rows()) {
    throw ShapeMismatch("lstm_step: input or state has the wrong shape");
  }
  Tensor<T> gates = add(matmul(concat_cols<T>({x, h_prev}), p.weight), p.bias);
  Tensor<T> i = sigmoid(slice_cols(gates, 0, H));
  Tensor<T> f = sigmoid(slice_cols(gates, H, 2 * H));
  Tensor<T> o = sigmoid(slice_cols(gates, 2 * H, 3 * H));
  Tensor<T> g = tanh(slice_cols(gates, 3 * H, 4 * H));
  Tensor<T> c = add(mul(f, c_prev), mul(i, g));
  Tensor<T> h = mul(o, tanh(c));
  return {h, c};
}

template <typename T>
LstmStack<T>::LstmStack(ParameterSet<T>& params, const std::string& name,
                        std::size_t input_size, std::size_t hidden,
                        std::size_t layers)
    : input_size_(input_size), hidden_(hidden) {
  for (std::size_t l = 0; l < layers; ++l) {
    cells_.emplace_back(params, name + ".layer" + std::to_string(l),
                        l == 0 ? input_size : hidden, hidden);
  }
}

template <typename T>
LstmState<T> LstmStack<T>::zero_state(std::size_t batch) const {
  LstmState<T> s;
  for (std::size_t l = 0; l < cells_.size(); ++l) {
    s.h.push_back(Tensor<T>::zeros({batch, hidden_}));
    s.c.push_back(Tensor<T>::zeros({batch, hidden_}));
  }
  return s;
}

template <typename T>
void LstmStack<T>::set_forget_bias(T value) {
  for (auto& cell : cells_) cell.set_forget_bias(value);
}

template <typename T>
LstmState<T> LstmStack<T>::step(const Tensor<T>& x, const LstmState<T>& state,
                                std::span<const T> mask) const {
  LstmState<T> next;
  Tensor<T> input = x;
  for (std::size_t l = 0; l < cells_.size(); ++l) {
    auto [h, c] = lstm_step(input, state.h[l], state.c[l], cells_[l]);
    if (!mask.empty()) {
      h = select_rows(mask, h, state.h[l]);
      c = select_rows(mask, c, state.c[l]);
    }
    next.h.push_back(h);
    next.c.push_back(c);
    input = h;
  }
  return next;
}

template <typename T>
std::vector<Tensor<T>> conv1d_maxpool(const std::vector<Tensor<T>>& seq,
                                      const Tensor<T>& filters,
                                      const Tensor<T>& bias, std::size_t width,
                                      std::size_t pool) {
  if (seq.empty()) throw ShapeMismatch("conv1d_maxpool: empty sequence");
  const std::size_t batch = seq[0].rows();
  const std::size_t k = seq[0].cols();
  if (filters.rows() != width * k || bias.cols() != filters.cols()) {
    throw ShapeMismatch("conv1d_maxpool: filter shape does not match input");
  }
  std::vector<Tensor<T>> padded = seq;
  while (padded.size() < width) padded.push_back(Tensor<T>::zeros({batch, k}));

  std::vector<Tensor<T>> conv;
  for (std::size_t t = 0; t + width <= padded.size(); ++t) {
    std::vector<Tensor<T>> window(padded.begin() + static_cast<std::ptrdiff_t>(t),
                                  padded.begin() + static_cast<std::ptrdiff_t>(t + width));
    conv.push_back(relu(add(matmul(concat_cols(window), filters), bias)));
  }
  const std::size_t F = filters.cols();
  while (conv.size() % pool != 0) conv.push_back(Tensor<T>::zeros({batch, F}));

  std::vector<Tensor<T>> pooled;
  for (std::size_t t = 0; t < conv.size(); t += pool) {
    pooled.push_back(maximum(std::vector<Tensor<T>>(
        conv.begin() + static_cast<std::ptrdiff_t>(t),
        conv.begin() + static_cast<std::ptrdiff_t>(t + pool))));
  }
  return pooled;
}

#define CTXSUM_INSTANTIATE_LAYERS(T)                                          \
  template class ParameterSet<T>;                                             \
  template void init_tensor(Tensor<T>&, const InitSpec&, Rng&);               \
  template void init_params(ParameterSet<T>&, const InitSpec&, Rng&);         \
  template struct Linear<T>;                                                  \
  template struct RnnCellParams<T>;                                           \
  template std::pair<Tensor<T>, Tensor<T>> rnn_step(                          \
      const Tensor<T>&, const Tensor<T>&, const RnnCellParams<T>&);           \
  template struct LstmCellParams<T>;                                          \
  template std::pair<Tensor<T>, Tensor<T>> lstm_step(                         \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                   \
      const LstmCellParams<T>&);                                              \
  template class LstmStack<T>;                                                \
  template std::vector<Tensor<T>> conv1d_maxpool(                             \
      const std::vector<Tensor<T>>&, const Tensor<T>&, const Tensor<T>&,      \
      std::size_t, std::size_t);

CTXSUM_INSTANTIATE_LAYERS(float)
CTXSUM_INSTANTIATE_LAYERS(double)

}  // namespace ctxsum::nn
