#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ctxsum/corpus.h"
#include "ctxsum/rng.h"

namespace ctxsum {

using Matrix = std::vector<std::vector<double>>;  // row-major

// Uniformly random order of all sentences.
std::vector<std::size_t> fuzzy_ranking(const Document& doc, Rng& rng);

// n distinct sentences drawn uniformly, document order. Same draws as the
// first n of fuzzy_ranking.
std::vector<std::size_t> fuzzy_summarize(const Document& doc, std::size_t n,
                                         Rng& rng);

// Multinomial naive Bayes with add-one smoothing over the training
// vocabulary. Words never seen in training are ignored at prediction time.
class NaiveBayes {
 public:
  // Throws EmptyTrainingSet, SingleClassData.
  void train(const std::vector<std::vector<std::string>>& docs,
             std::span<const int> labels);
  // log P(c) + sum_w log P(w | c), unnormalised.
  double log_joint(std::span<const std::string> tokens, int cls) const;
  double predict_proba(std::span<const std::string> tokens) const;  // P(c=1)
  int predict(std::span<const std::string> tokens) const;

 private:
  double log_prior_[2] = {0, 0};
  std::map<std::string, double> log_likelihood_[2];
};

using FeatureVector = std::map<std::string, double>;

// tf * idf over in-vocabulary words, L2-normalised.
FeatureVector tfidf_features(std::span<const std::string> tokens,
                             const IdfTable& idf, const Vocabulary& vocab);

struct SvmOptions {
  double lambda = 1e-4;
  int epochs = 20;
  std::uint64_t seed = 7;
};

// Pegasos subgradient descent on the L2-regularised hinge loss.
class LinearSvm {
 public:
  void train(const std::vector<FeatureVector>& x, std::span<const int> labels,
             const SvmOptions& options = {});
  double score(const FeatureVector& x) const;
  int predict(const FeatureVector& x) const { return score(x) > 0 ? 1 : 0; }
  const std::map<std::string, double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::map<std::string, double> weights_;
  double bias_ = 0.0;
};

struct SvdResult {
  std::vector<double> singular_values;  // descending
  Matrix v;  // n x n; column k is the k-th right singular vector
};

// One-sided Jacobi on an m x n matrix.
SvdResult jacobi_svd(const Matrix& a);

// Term x sentence tf-idf matrix of a document; rows follow the sorted set of
// in-vocabulary terms.
Matrix term_sentence_matrix(const Document& doc, const IdfTable& idf,
                            const Vocabulary& vocab);

// For each right singular vector in order, the not yet chosen sentence with
// the largest |loading|; then the remaining sentences in document order.
std::vector<std::size_t> lsa_ranking(const Document& doc, const IdfTable& idf,
                                     const Vocabulary& vocab);

// First n of lsa_ranking, document order.
std::vector<std::size_t> lsa_summarize(const Document& doc, std::size_t n,
                                       const IdfTable& idf,
                                       const Vocabulary& vocab);

struct PageRankResult {
  std::vector<double> scores;
  std::size_t iterations = 0;
};

// Power iteration on x = (1 - d)/n + d P^T x, with P the row-normalised
// weights (all-zero rows jump uniformly). Stops when the L1 change is below
// `tolerance`.
PageRankResult pagerank(const Matrix& weights, double damping = 0.85,
                        double tolerance = 1e-8, std::size_t max_iter = 1000);

// Cosine of sentence tf-idf vectors, entries below threshold and the diagonal
// zeroed.
Matrix lexrank_graph(const Document& doc, const IdfTable& idf,
                     const Vocabulary& vocab, double threshold = 0.1);

// |shared distinct words| / (log|S_i| + log|S_j|) over non-stopword tokens;
// zero when either sentence has fewer than two tokens.
Matrix textrank_graph(const Document& doc, const WordSet& stopwords);

std::vector<std::size_t> top_n_by_score(std::span<const double> scores,
                                        std::size_t n);

std::vector<std::size_t> lexrank(const Document& doc, const IdfTable& idf,
                                 const Vocabulary& vocab, std::size_t n,
                                 double threshold = 0.1, double damping = 0.85);
std::vector<std::size_t> textrank(const Document& doc, const WordSet& stopwords,
                                  std::size_t n, double damping = 0.85);

}  // namespace ctxsum
