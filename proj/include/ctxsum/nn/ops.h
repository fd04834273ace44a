#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ctxsum/nn/tensor.h"
#include "ctxsum/rng.h"

// Differentiable operations on 2-D tensors (rows x cols). Every op records
// its backward pass when gradients are enabled and any input requires them.
namespace ctxsum::nn {

// (m x k) . (k x n)
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Elementwise; `b` may also be a single row broadcast over the rows of `a`.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a);

template <typename T>
Tensor<T> tanh(const Tensor<T>& a);

template <typename T>
Tensor<T> relu(const Tensor<T>& a);

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);

// Columns [begin, end).
template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, std::size_t begin, std::size_t end);

// Row ids[r] of `table` for each r; negative ids give a zero row.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const int> ids);

// Row r comes from `a` when mask[r] != 0, else from `b`.
template <typename T>
Tensor<T> select_rows(std::span<const T> mask, const Tensor<T>& a,
                      const Tensor<T>& b);

// Elementwise maximum; ties go to the earliest input.
template <typename T>
Tensor<T> maximum(const std::vector<Tensor<T>>& xs);

// Inverted dropout; identity outside training. Throws BadProb unless
// 0 < keep_prob <= 1.
template <typename T>
Tensor<T> dropout(const Tensor<T>& a, double keep_prob, Rng& rng,
                  bool training);

template <typename T>
Tensor<T> sum(const Tensor<T>& a);

template <typename T>
Tensor<T> add_n(const std::vector<Tensor<T>>& xs);

// Sum over rows with targets[r] >= 0 of -log softmax(logits[r])[targets[r]],
// divided by `normalizer`. Returns a scalar.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets,
                        T normalizer);

// Single-example softmax cross-entropy: loss and d loss / d logits.
template <typename T>
std::pair<T, std::vector<T>> softmax_xent(std::span<const T> logits,
                                          std::size_t target);

template <typename T>
std::vector<T> log_softmax(std::span<const T> logits);

}  // namespace ctxsum::nn
