#include <algorithm>
#include <cmath>
#include <functional>

#include "ctxsum/error.h"
#include "ctxsum/metrics.h"

namespace ctxsum {

double ndcg_at_k(std::span<const double> relevance, std::size_t k) {
  auto dcg = [k](std::span<const double> rel) {
    double s = 0.0;
    for (std::size_t i = 0; i < rel.size() && i < k; ++i) {
      s += rel[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
  };
  std::vector<double> ideal(relevance.begin(), relevance.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double best = dcg(ideal);
  if (best <= 0.0) return 0.0;
  return dcg(relevance) / best;
}

double average_precision_at_k(std::span<const int> relevance, std::size_t k) {
  std::size_t relevant = 0;
  for (int r : relevance) relevant += r > 0;
  const std::size_t denom = std::min(k, relevant);
  if (denom == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < relevance.size() && i < k; ++i) {
    if (relevance[i] > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(denom);
}

double map_at_k(const std::vector<std::vector<int>>& relevance, std::size_t k) {
  if (relevance.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : relevance) total += average_precision_at_k(r, k);
  return total / static_cast<double>(relevance.size());
}

ClassificationReport classification_report(std::span<const int> predictions,
                                            std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw DimMismatch("predictions and labels differ in length");
  }
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};  // [label][prediction]
  for (std::size_t i = 0; i < labels.size(); ++i) {
    confusion[labels[i] != 0][predictions[i] != 0]++;
  }
  ClassificationReport rep;
  const std::size_t n = labels.size();
  if (n > 0) {
    rep.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) /
                   static_cast<double>(n);
  }
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(confusion[c][c]);
    const double predicted = static_cast<double>(confusion[0][c] + confusion[1][c]);
    const double actual = static_cast<double>(confusion[c][0] + confusion[c][1]);
    PrfScore& s = rep.per_class[c];
    s.precision = predicted > 0 ? tp / predicted : 0.0;
    s.recall = actual > 0 ? tp / actual : 0.0;
    s.f1 = s.precision + s.recall > 0
               ? 2 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    rep.support[c] = static_cast<std::size_t>(actual);
  }
  return rep;
}

}  // namespace ctxsum
