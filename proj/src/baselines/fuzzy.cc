#include <algorithm>
#include <numeric>

#include "ctxsum/baselines.h"
#include "ctxsum/context.h"

namespace ctxsum {

namespace {

// First n steps of Fisher-Yates.
std::vector<std::size_t> shuffled_prefix(std::size_t count, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  n = std::min(n, idx.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace

std::vector<std::size_t> fuzzy_ranking(const Document& doc, Rng& rng) {
  return shuffled_prefix(doc.sentences.size(), doc.sentences.size(), rng);
}

std::vector<std::size_t> fuzzy_summarize(const Document& doc, std::size_t n,
                                         Rng& rng) {
  auto idx = shuffled_prefix(doc.sentences.size(), n, rng);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> top_n_by_score(std::span<const double> scores,
                                        std::size_t n) {
  auto order = rank_order(scores);
  order.resize(std::min(n, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace ctxsum
