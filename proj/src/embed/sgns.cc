#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxsum/embed.h"
#include "ctxsum/error.h"

namespace ctxsum {
namespace {

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// -log(sigmoid(x)), stable for large |x|.
template <typename T>
T neg_log_sigmoid(T x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(-x, T(0));
}

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw DimMismatch("cosine of vectors with different dimensions");
  }
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += double(u[i]) * double(v[i]);
    uu += double(u[i]) * double(u[i]);
    vv += double(v[i]) * double(v[i]);
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

}  // namespace

EmbeddingMatrix init_embeddings(std::size_t rows, std::size_t dim, Rng& rng) {
  EmbeddingMatrix m(rows, dim);
  const double bound = 0.5 / static_cast<double>(dim);
  std::uniform_real_distribution<double> uni(-bound, bound);
  for (float& x : m.input()) x = static_cast<float>(uni(rng));
  return m;
}

std::vector<std::pair<WordId, WordId>> generate_skipgram_pairs(
    std::span<const WordId> tokens, int window, Rng& rng) {
  std::vector<std::pair<WordId, WordId>> pairs;
  if (window < 1) return pairs;
  std::uniform_int_distribution<int> radius(1, window);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(tokens.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t b = radius(rng);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - b);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + b);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j != i) pairs.emplace_back(tokens[i], tokens[j]);
    }
  }
  return pairs;
}

namespace {

std::vector<double> unigram_weights(std::span<const std::int64_t> counts) {
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    w[i] = std::pow(static_cast<double>(counts[i]), 0.75);
  }
  return w;
}

}  // namespace

NegativeSampler::NegativeSampler(std::span<const std::int64_t> counts) {
  const std::vector<double> w = unigram_weights(counts);
  dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

std::vector<WordId> NegativeSampler::sample(std::size_t n, Rng& rng) {
  std::vector<WordId> out(n);
  for (auto& id : out) id = (*this)(rng);
  return out;
}

std::vector<WordId> negative_sample(std::span<const std::int64_t> counts,
                                    std::size_t n, Rng& rng) {
  if (n == 0) return {};
  NegativeSampler sampler(counts);
  return sampler.sample(n, rng);
}

template <typename T>
T sgns_loss_and_grad(std::span<const T> center, std::span<const T> context,
                     const std::vector<std::span<const T>>& negatives,
                     std::span<T> grad_center, std::span<T> grad_context,
                     const std::vector<std::span<T>>& grad_negatives) {
  const std::size_t k = center.size();
  std::fill(grad_center.begin(), grad_center.end(), T(0));

  // d/dx -log s(x) = s(x) - 1 ; d/dx -log s(-x) = s(x)
  const T pos = dot(center, context);
  T loss = neg_log_sigmoid(pos);
  const T g_pos = sigmoid(pos) - T(1);
  for (std::size_t j = 0; j < k; ++j) {
    grad_center[j] += g_pos * context[j];
    grad_context[j] = g_pos * center[j];
  }
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const T x = dot(center, negatives[n]);
    loss += neg_log_sigmoid(-x);
    const T g = sigmoid(x);
    for (std::size_t j = 0; j < k; ++j) {
      grad_center[j] += g * negatives[n][j];
      grad_negatives[n][j] = g * center[j];
    }
  }
  return loss;
}

template float sgns_loss_and_grad<float>(
    std::span<const float>, std::span<const float>,
    const std::vector<std::span<const float>>&, std::span<float>,
    std::span<float>, const std::vector<std::span<float>>&);
template double sgns_loss_and_grad<double>(
    std::span<const double>, std::span<const double>,
    const std::vector<std::span<const double>>&, std::span<double>,
    std::span<double>, const std::vector<std::span<double>>&);

double sgns_step(WordId center, WordId context,
                 std::span<const WordId> negatives, double lr,
                 EmbeddingMatrix& m) {
  const std::size_t k = m.dim();
  std::vector<float> g_center(k), g_context(k);
  std::vector<std::vector<float>> g_neg(negatives.size(), std::vector<float>(k));
  std::vector<std::span<const float>> neg_rows;
  std::vector<std::span<float>> neg_grads;
  neg_rows.reserve(negatives.size());
  neg_grads.reserve(negatives.size());
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    neg_rows.push_back(std::as_const(m).output_row(negatives[n]));
    neg_grads.emplace_back(g_neg[n]);
  }
  const float loss = sgns_loss_and_grad<float>(
      std::as_const(m).row(center), std::as_const(m).output_row(context),
      neg_rows, g_center, g_context, neg_grads);
  if (lr == 0.0) return loss;

  const float step = static_cast<float>(lr);
  auto apply = [&](std::span<float> dst, const std::vector<float>& g) {
    for (std::size_t j = 0; j < k; ++j) dst[j] -= step * g[j];
  };
  apply(m.output_row(context), g_context);
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    apply(m.output_row(negatives[n]), g_neg[n]);
  }
  apply(m.row(center), g_center);
  return loss;
}

std::vector<std::vector<WordId>> training_units(std::span<const Document> docs,
                                                const Vocabulary& vocab) {
  std::vector<std::vector<WordId>> units;
  auto to_ids = [&](const std::vector<std::string>& tokens) {
    std::vector<WordId> ids;
    for (const auto& t : tokens) {
      if (auto id = vocab.find(t)) ids.push_back(*id);
    }
    if (!ids.empty()) units.push_back(std::move(ids));
  };
  for (const Document& doc : docs) {
    to_ids(tokenize(doc.title));
    for (const Sentence& s : doc.sentences) to_ids(s.tokens);
  }
  return units;
}

EmbeddingMatrix train_sgns(std::span<const Document> docs,
                           const Vocabulary& vocab, const SgnsConfig& config,
                           SgnsLog* log) {
  const auto units = training_units(docs, vocab);
  std::size_t total_tokens = 0;
  for (const auto& u : units) total_tokens += u.size();
  if (total_tokens == 0) throw EmptyCorpus("no in-vocabulary tokens");

  Rng rng(config.seed);
  EmbeddingMatrix m =
      init_embeddings(vocab.size(), static_cast<std::size_t>(config.dim), rng);
  if (config.epochs <= 0) return m;

  NegativeSampler sampler(vocab.counts());

  // Frequent-word subsampling keep probabilities (word2vec formula).
  std::vector<double> keep(vocab.size(), 1.0);
  if (config.subsample_threshold > 0) {
    const double t = config.subsample_threshold * static_cast<double>(total_tokens);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const double f = static_cast<double>(vocab.count(static_cast<WordId>(i)));
      keep[i] = std::min(1.0, (std::sqrt(f / t) + 1.0) * t / f);
    }
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double schedule_len =
      static_cast<double>(config.epochs) * static_cast<double>(total_tokens);
  double processed = 0;
  std::vector<WordId> kept_ids;
  std::vector<WordId> negs(static_cast<std::size_t>(config.negatives));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0;
    std::size_t examples = 0;
    for (const auto& unit : units) {
      kept_ids.clear();
      for (WordId id : unit) {
        if (keep[id] >= 1.0 || coin(rng) < keep[id]) kept_ids.push_back(id);
      }
      const double lr = config.learning_rate *
                        std::max(1e-4, 1.0 - processed / schedule_len);
      processed += static_cast<double>(unit.size());
      for (const auto& [center, context] :
           generate_skipgram_pairs(kept_ids, config.window, rng)) {
        for (auto& n : negs) n = sampler(rng);
        loss_sum += sgns_step(center, context, negs, lr, m);
        ++examples;
      }
    }
    if (log) {
      log->epoch_loss.push_back(examples ? loss_sum / double(examples) : 0.0);
    }
  }
  return m;
}

double cosine(std::span<const float> u, std::span<const float> v) {
  return cosine_impl(u, v);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  return cosine_impl(u, v);
}

}  // namespace ctxsum
