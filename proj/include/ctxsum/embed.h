#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ctxsum/corpus.h"
#include "ctxsum/rng.h"

namespace ctxsum {

struct SgnsConfig {
  int dim = 32;  // 300 at paper scale
  int window = 5;
  int negatives = 5;
  int epochs = 15;
  double learning_rate = 0.025;  // decayed linearly to 1e-4 of itself
  double subsample_threshold = 1e-3;
  std::uint64_t seed = 7;

  static SgnsConfig paper() {
    SgnsConfig c;
    c.dim = 300;
    return c;
  }
};

// Input (word) vectors are the embeddings; output (context) vectors are only
// needed while training. Both are row-major rows x dim.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), input_(rows * dim), output_(rows * dim) {}

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<float> row(std::size_t id) { return {input_.data() + id * dim_, dim_}; }
  std::span<const float> row(std::size_t id) const {
    return {input_.data() + id * dim_, dim_};
  }
  std::span<float> output_row(std::size_t id) {
    return {output_.data() + id * dim_, dim_};
  }
  std::span<const float> output_row(std::size_t id) const {
    return {output_.data() + id * dim_, dim_};
  }

  std::vector<float>& input() { return input_; }
  const std::vector<float>& input() const { return input_; }
  std::vector<float>& output() { return output_; }
  const std::vector<float>& output() const { return output_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> input_;
  std::vector<float> output_;
};

// Input rows uniform in [-0.5/dim, 0.5/dim], output rows zero.
EmbeddingMatrix init_embeddings(std::size_t rows, std::size_t dim, Rng& rng);

// For every position i a radius b is drawn uniformly from 1..window and i is
// paired with each neighbour within distance b, in left-to-right order.
std::vector<std::pair<WordId, WordId>> generate_skipgram_pairs(
    std::span<const WordId> tokens, int window, Rng& rng);

// Draws ids proportionally to count^0.75.
class NegativeSampler {
 public:
  explicit NegativeSampler(std::span<const std::int64_t> counts);
  WordId operator()(Rng& rng) { return static_cast<WordId>(dist_(rng)); }
  std::vector<WordId> sample(std::size_t n, Rng& rng);

 private:
  std::discrete_distribution<std::size_t> dist_;
};

std::vector<WordId> negative_sample(std::span<const std::int64_t> counts,
                                    std::size_t n, Rng& rng);

// Loss -log s(u.v_ctx) - sum log s(-u.v_neg) and its gradient with respect to
// the centre input vector u, the context output vector and each negative
// output vector. Gradients are written (not accumulated) into the outputs.
template <typename T>
T sgns_loss_and_grad(std::span<const T> center, std::span<const T> context,
                     const std::vector<std::span<const T>>& negatives,
                     std::span<T> grad_center, std::span<T> grad_context,
                     const std::vector<std::span<T>>& grad_negatives);

// One gradient-descent step on a (centre, context, negatives) example.
// Returns the loss before the update.
double sgns_step(WordId center, WordId context,
                 std::span<const WordId> negatives, double lr,
                 EmbeddingMatrix& m);

struct SgnsLog {
  std::vector<double> epoch_loss;  // mean loss per example, one per epoch
};

// Trains on titles and body sentences of `docs`. Deterministic in
// (docs, vocab, config). Throws EmptyCorpus when no in-vocabulary tokens.
EmbeddingMatrix train_sgns(std::span<const Document> docs,
                           const Vocabulary& vocab, const SgnsConfig& config,
                           SgnsLog* log = nullptr);

// In-vocabulary ids of each training unit (title, then every sentence).
std::vector<std::vector<WordId>> training_units(std::span<const Document> docs,
                                                const Vocabulary& vocab);

// Cosine similarity; 0 when either vector is all zero. Throws DimMismatch.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace ctxsum
