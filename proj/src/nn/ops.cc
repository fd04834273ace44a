#include "ctxsum/nn/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctxsum/error.h"

namespace ctxsum::nn {
namespace {

template <typename T>
inline void axpy(T* __restrict y, T a, const T* __restrict x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void require_2d_same(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(op) + ": operand shapes differ");
  }
}

template <typename T>
Shape shape2(const Tensor<T>& like) {
  return {like.rows(), like.cols()};
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// Elementwise unary op whose derivative is expressed through its output.
template <typename T, typename F, typename D>
Tensor<T> unary(const Tensor<T>& a, F f, D dfdy) {
  Tensor<T> out = make_result<T>(shape2(a), {a}, [dfdy](Node<T>& self) {
    auto& pg = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < self.value.size(); ++i) {
      pg[i] += self.grad[i] * dfdy(self.value[i], self.parents[0]->value[i]);
    }
  });
  auto& y = out.values();
  const auto& x = a.values();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return out;
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) throw ShapeMismatch("matmul: inner dimensions differ");
  Tensor<T> out = make_result<T>({m, n}, {a, b}, [m, k, n](Node<T>& self) {
    Node<T>& A = *self.parents[0];
    Node<T>& B = *self.parents[1];
    const T* dc = self.grad.data();
    if (A.requires_grad) {
      auto& da = A.ensure_grad();
      std::vector<T> bt(n * k);
      for (std::size_t p = 0; p < k; ++p)
        for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = B.value[p * n + j];
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const T g = dc[i * n + j];
          if (g != T(0)) axpy(da.data() + i * k, g, bt.data() + j * k, k);
        }
      }
    }
    if (B.requires_grad) {
      auto& db = B.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const T av = A.value[i * k + p];
          if (av != T(0)) axpy(db.data() + p * n, av, dc + i * n, n);
        }
      }
    }
  });
  T* c = out.values().data();
  const T* av = a.values().data();
  const T* bv = b.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T x = av[i * k + p];
      if (x != T(0)) axpy(c + i * n, x, bv + p * n, n);
    }
  }
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const std::size_t m = a.rows(), n = a.cols();
  const bool broadcast = b.rows() == 1 && m != 1;
  if (b.cols() != n || (!broadcast && b.rows() != m)) {
    throw ShapeMismatch("add: operand shapes differ");
  }
  Tensor<T> out = make_result<T>({m, n}, {a, b}, [m, n, broadcast](Node<T>& self) {
    Node<T>& A = *self.parents[0];
    Node<T>& B = *self.parents[1];
    if (A.requires_grad) {
      auto& g = A.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (B.requires_grad) {
      auto& g = B.ensure_grad();
      if (broadcast) {
        for (std::size_t r = 0; r < m; ++r)
          axpy(g.data(), T(1), self.grad.data() + r * n, n);
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
  auto& y = out.values();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t r = 0; r < m; ++r) {
    const T* brow = bv.data() + (broadcast ? 0 : r * n);
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] = av[r * n + j] + brow[j];
  }
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_2d_same(a, b, "sub");
  Tensor<T> out = make_result<T>(shape2(a), {a, b}, [](Node<T>& self) {
    Node<T>& A = *self.parents[0];
    Node<T>& B = *self.parents[1];
    if (A.requires_grad) {
      auto& g = A.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (B.requires_grad) {
      auto& g = B.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
  auto& y = out.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] - b.values()[i];
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_2d_same(a, b, "mul");
  Tensor<T> out = make_result<T>(shape2(a), {a, b}, [](Node<T>& self) {
    Node<T>& A = *self.parents[0];
    Node<T>& B = *self.parents[1];
    if (A.requires_grad) {
      auto& g = A.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * B.value[i];
    }
    if (B.requires_grad) {
      auto& g = B.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * A.value[i];
    }
  });
  auto& y = out.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * b.values()[i];
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  return unary(
      a, [factor](T x) { return factor * x; },
      [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return unary(
      a, [](T x) { return stable_sigmoid(x); },
      [](T y, T) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  return unary(
      a, [](T x) { return std::tanh(x); }, [](T y, T) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T, T x) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.rows() != m) throw ShapeMismatch("concat_cols: row counts differ");
    widths.push_back(p.cols());
    n += p.cols();
  }
  Tensor<T> out = make_result<T>({m, n}, parts, [m, n, widths](Node<T>& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      Node<T>& P = *self.parents[k];
      const std::size_t w = widths[k];
      if (P.requires_grad) {
        auto& g = P.ensure_grad();
        for (std::size_t r = 0; r < m; ++r)
          axpy(g.data() + r * w, T(1), self.grad.data() + r * n + off, w);
      }
      off += w;
    }
  });
  auto& y = out.values();
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t w = widths[k];
    const auto& v = parts[k].values();
    for (std::size_t r = 0; r < m; ++r)
      std::copy_n(v.data() + r * w, w, y.data() + r * n + off);
    off += w;
  }
  return out;
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, std::size_t begin, std::size_t end) {
  const std::size_t m = a.rows(), n = a.cols();
  if (begin > end || end > n) throw ShapeMismatch("slice_cols: bad range");
  const std::size_t w = end - begin;
  Tensor<T> out = make_result<T>({m, w}, {a}, [m, n, w, begin](Node<T>& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < m; ++r)
      axpy(g.data() + r * n + begin, T(1), self.grad.data() + r * w, w);
  });
  auto& y = out.values();
  for (std::size_t r = 0; r < m; ++r)
    std::copy_n(a.values().data() + r * n + begin, w, y.data() + r * w);
  return out;
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const int> ids) {
  const std::size_t n = table.cols();
  const std::size_t m = ids.size();
  for (int id : ids) {
    if (id >= 0 && static_cast<std::size_t>(id) >= table.rows()) {
      throw ShapeMismatch("gather_rows: id out of range");
    }
  }
  std::vector<int> idv(ids.begin(), ids.end());
  Tensor<T> out = make_result<T>({m, n}, {table}, [n, idv](Node<T>& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < idv.size(); ++r) {
      if (idv[r] < 0) continue;
      axpy(g.data() + static_cast<std::size_t>(idv[r]) * n, T(1),
           self.grad.data() + r * n, n);
    }
  });
  auto& y = out.values();
  for (std::size_t r = 0; r < m; ++r) {
    if (ids[r] < 0) continue;
    std::copy_n(table.values().data() + static_cast<std::size_t>(ids[r]) * n, n,
                y.data() + r * n);
  }
  return out;
}

template <typename T>
Tensor<T> select_rows(std::span<const T> mask, const Tensor<T>& a,
                      const Tensor<T>& b) {
  require_2d_same(a, b, "select_rows");
  const std::size_t m = a.rows(), n = a.cols();
  if (mask.size() != m) throw ShapeMismatch("select_rows: mask length");
  std::vector<char> take_a(m);
  for (std::size_t r = 0; r < m; ++r) take_a[r] = mask[r] != T(0);
  Tensor<T> out = make_result<T>({m, n}, {a, b}, [m, n, take_a](Node<T>& self) {
    for (int which = 0; which < 2; ++which) {
      Node<T>& P = *self.parents[which];
      if (!P.requires_grad) continue;
      auto& g = P.ensure_grad();
      for (std::size_t r = 0; r < m; ++r) {
        if ((take_a[r] != 0) != (which == 0)) continue;
        axpy(g.data() + r * n, T(1), self.grad.data() + r * n, n);
      }
    }
  });
  auto& y = out.values();
  for (std::size_t r = 0; r < m; ++r) {
    const auto& src = take_a[r] ? a.values() : b.values();
    std::copy_n(src.data() + r * n, n, y.data() + r * n);
  }
  return out;
}

template <typename T>
Tensor<T> maximum(const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw ShapeMismatch("maximum: no inputs");
  for (const auto& x : xs) require_2d_same(x, xs[0], "maximum");
  const std::size_t size = xs[0].size();
  std::vector<std::size_t> argmax(size, 0);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t k = 1; k < xs.size(); ++k) {
      if (xs[k].values()[i] > xs[argmax[i]].values()[i]) argmax[i] = k;
    }
  }
  Tensor<T> out = make_result<T>(shape2(xs[0]), xs, [argmax](Node<T>& self) {
    for (std::size_t i = 0; i < argmax.size(); ++i) {
      Node<T>& P = *self.parents[argmax[i]];
      if (P.requires_grad) P.ensure_grad()[i] += self.grad[i];
    }
  });
  auto& y = out.values();
  for (std::size_t i = 0; i < size; ++i) y[i] = xs[argmax[i]].values()[i];
  return out;
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& a, double keep_prob, Rng& rng,
                  bool training) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw BadProb("dropout keep probability must be in (0, 1]");
  }
  if (!training || keep_prob == 1.0) return a;
  std::bernoulli_distribution keep(keep_prob);
  std::vector<T> mask(a.size());
  const T inv = static_cast<T>(1.0 / keep_prob);
  for (T& m : mask) m = keep(rng) ? inv : T(0);
  Tensor<T> out = make_result<T>(shape2(a), {a}, [mask](Node<T>& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
  auto& y = out.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * mask[i];
  return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  Tensor<T> out = make_result<T>({1}, {a}, [](Node<T>& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (T& x : g) x += self.grad[0];
  });
  T s = 0;
  for (T x : a.values()) s += x;
  out.values()[0] = s;
  return out;
}

template <typename T>
Tensor<T> add_n(const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw ShapeMismatch("add_n: no inputs");
  for (const auto& x : xs) require_2d_same(x, xs[0], "add_n");
  Tensor<T> out = make_result<T>(xs[0].shape(), xs, [](Node<T>& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
  auto& y = out.values();
  for (const auto& x : xs)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += x.values()[i];
  return out;
}

template <typename T>
std::vector<T> log_softmax(std::span<const T> logits) {
  std::vector<T> out(logits.size());
  if (logits.empty()) return out;
  const T mx = *std::max_element(logits.begin(), logits.end());
  T z = 0;
  for (T x : logits) z += std::exp(x - mx);
  const T lz = mx + std::log(z);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
  return out;
}

template <typename T>
std::pair<T, std::vector<T>> softmax_xent(std::span<const T> logits,
                                          std::size_t target) {
  if (target >= logits.size()) throw ShapeMismatch("softmax_xent: bad target");
  std::vector<T> grad = log_softmax(logits);
  const T loss = -grad[target];
  for (T& g : grad) g = std::exp(g);
  grad[target] -= T(1);
  return {loss, std::move(grad)};
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets,
                        T normalizer) {
  const std::size_t m = logits.rows(), c = logits.cols();
  if (targets.size() != m) throw ShapeMismatch("cross_entropy: target count");
  std::vector<T> dlogits(m * c, T(0));
  T total = 0;
  for (std::size_t r = 0; r < m; ++r) {
    if (targets[r] < 0) continue;
    auto [loss, g] = softmax_xent<T>(
        std::span<const T>(logits.values().data() + r * c, c),
        static_cast<std::size_t>(targets[r]));
    total += loss;
    for (std::size_t j = 0; j < c; ++j) dlogits[r * c + j] = g[j] / normalizer;
  }
  Tensor<T> out = make_result<T>({1}, {logits}, [dlogits](Node<T>& self) {
    auto& g = self.parents[0]->ensure_grad();
    const T s = self.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * dlogits[i];
  });
  out.values()[0] = total / normalizer;
  return out;
}

#define CTXSUM_INSTANTIATE_OPS(T)                                              \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> scale(const Tensor<T>&, T);                               \
  template Tensor<T> sigmoid(const Tensor<T>&);                                \
  template Tensor<T> tanh(const Tensor<T>&);                                   \
  template Tensor<T> relu(const Tensor<T>&);                                   \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);               \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);   \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const int>);      \
  template Tensor<T> select_rows(std::span<const T>, const Tensor<T>&,         \
                                 const Tensor<T>&);                            \
  template Tensor<T> maximum(const std::vector<Tensor<T>>&);                   \
  template Tensor<T> dropout(const Tensor<T>&, double, Rng&, bool);            \
  template Tensor<T> sum(const Tensor<T>&);                                    \
  template Tensor<T> add_n(const std::vector<Tensor<T>>&);                     \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>, T); \
  template std::pair<T, std::vector<T>> softmax_xent(std::span<const T>,       \
                                                     std::size_t);             \
  template std::vector<T> log_softmax(std::span<const T>);

CTXSUM_INSTANTIATE_OPS(float)
CTXSUM_INSTANTIATE_OPS(double)

}  // namespace ctxsum::nn
