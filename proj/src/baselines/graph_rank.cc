#include <algorithm>
#include <cmath>
#include <set>

#include "ctxsum/baselines.h"
#include "ctxsum/error.h"

namespace ctxsum {

PageRankResult pagerank(const Matrix& weights, double damping,
                        double tolerance, std::size_t max_iter) {
  const std::size_t n = weights.size();
  PageRankResult r;
  if (n == 0) return r;
  Matrix p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i].size() != n) throw ShapeMismatch("pagerank: matrix is not square");
    double row = 0.0;
    for (double w : weights[i]) {
      if (w < 0) throw ShapeMismatch("pagerank: negative edge weight");
      row += w;
    }
    for (std::size_t j = 0; j < n; ++j) {
      p[i][j] = row > 0 ? weights[i][j] / row : 1.0 / static_cast<double>(n);
    }
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n)), next(n);
  const double teleport = (1.0 - damping) / static_cast<double>(n);
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    std::fill(next.begin(), next.end(), teleport);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += damping * p[i][j] * x[i];
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) change += std::abs(next[j] - x[j]);
    x.swap(next);
    if (change < tolerance) break;
  }
  r.iterations = std::min(r.iterations, max_iter);
  r.scores = std::move(x);
  return r;
}

Matrix lexrank_graph(const Document& doc, const IdfTable& idf,
                     const Vocabulary& vocab, double threshold) {
  const std::size_t n = doc.sentences.size();
  std::vector<FeatureVector> f;
  for (const auto& s : doc.sentences) f.push_back(tfidf_features(s.tokens, idf, vocab));
  Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (const auto& [word, x] : f[i]) {
        auto it = f[j].find(word);
        if (it != f[j].end()) dot += x * it->second;
      }
      if (dot >= threshold) w[i][j] = w[j][i] = dot;
    }
  }
  return w;
}

Matrix textrank_graph(const Document& doc, const WordSet& stopwords) {
  const std::size_t n = doc.sentences.size();
  std::vector<std::vector<std::string>> content(n);
  std::vector<std::set<std::string>> distinct(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : doc.sentences[i].tokens) {
      if (stopwords.count(t)) continue;
      content[i].push_back(t);
      distinct[i].insert(t);
    }
  }
  Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (content[i].size() < 2 || content[j].size() < 2) continue;
      std::size_t shared = 0;
      for (const auto& t : distinct[i]) shared += distinct[j].count(t);
      const double denom = std::log(static_cast<double>(content[i].size())) +
                           std::log(static_cast<double>(content[j].size()));
      w[i][j] = w[j][i] = static_cast<double>(shared) / denom;
    }
  }
  return w;
}

std::vector<std::size_t> lexrank(const Document& doc, const IdfTable& idf,
                                 const Vocabulary& vocab, std::size_t n,
                                 double threshold, double damping) {
  auto r = pagerank(lexrank_graph(doc, idf, vocab, threshold), damping);
  return top_n_by_score(r.scores, n);
}

std::vector<std::size_t> textrank(const Document& doc, const WordSet& stopwords,
                                  std::size_t n, double damping) {
  auto r = pagerank(textrank_graph(doc, stopwords), damping);
  return top_n_by_score(r.scores, n);
}

}  // namespace ctxsum
