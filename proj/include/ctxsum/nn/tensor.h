#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ctxsum::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // allocated lazily
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates this node's grad into its parents' grads.
  std::function<void(Node&)> backward_fn;

  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Handle to a node of the computation graph. Copies share the node.
// Two-dimensional shapes are rows x cols, row-major.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> data,
                     bool requires_grad = false);
  static Tensor scalar(T value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  // Rank-1 tensors are row vectors (1 x n); higher ranks fold trailing dims.
  std::size_t rows() const {
    return node_->shape.size() < 2 ? 1 : node_->shape[0];
  }
  std::size_t cols() const {
    const std::size_t r = rows();
    return r == 0 ? 0 : node_->value.size() / r;
  }
  std::size_t size() const { return node_->value.size(); }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  std::vector<T>& values() { return node_->value; }
  const std::vector<T>& values() const { return node_->value; }
  T& at(std::size_t r, std::size_t c) { return node_->value[r * cols() + c]; }
  T at(std::size_t r, std::size_t c) const {
    return node_->value[r * cols() + c];
  }
  T item() const { return node_->value.at(0); }

  bool requires_grad() const { return node_->requires_grad; }
  std::span<T> grad() { return node_->ensure_grad(); }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  void zero_grad();

  // Reverse-mode sweep seeded with d(this)/d(this) = 1. Requires a scalar.
  void backward();

  // Same values, no history.
  Tensor detach() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Creates the output node of an op. When recording is on and any parent
// needs gradients the parents and backward function are kept.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<Tensor<T>> parents,
                      std::function<void(Node<T>&)> backward_fn);

}  // namespace ctxsum::nn
