#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.h"

namespace ctxsum {

template <typename T>
ExtractiveNet<T>::ExtractiveNet(const ExtractiveModelConfig& config,
                                std::size_t vocab_size)
    : config_(config) {
  const std::size_t E = config.embed_dim;
  embedding_ = params_.add("embedding", {vocab_size, E});
  std::size_t lstm_in = E;
  if (config.kind == ExtractiveKind::kCnnRnn) {
    conv_filters_ = params_.add("conv.filters", {config.conv_width * E, config.conv_filters});
    conv_bias_ = params_.add("conv.bias", {1, config.conv_filters});
    lstm_in = config.conv_filters;
  }
  lstm_ = nn::LstmStack<T>(params_, "lstm", lstm_in, config.hidden, config.layers);
  output_ = nn::Linear<T>(params_, "output", config.hidden, 2);
}

template <typename T>
void ExtractiveNet<T>::init(Rng& rng) {
  nn::InitSpec spec;
  spec.kind = config_.kind == ExtractiveKind::kCnnRnn ? nn::InitKind::kNormal
                                                      : nn::InitKind::kUniform;
  spec.scale = config_.init_scale;
  nn::init_params(params_, spec, rng);
  lstm_.set_forget_bias(T(1));
}

template <typename T>
nn::Tensor<T> ExtractiveNet<T>::logits(
    const std::vector<std::vector<int>>& tokens, std::span<const T> contexts,
    Rng* rng, bool training) const {
  const std::size_t B = tokens.size();
  std::size_t L = 0;
  for (const auto& row : tokens) L = std::max(L, row.size());

  auto ids_at = [&](std::size_t t) {
    std::vector<int> ids(B, -1);
    for (std::size_t r = 0; r < B; ++r) {
      if (t < tokens[r].size()) ids[r] = tokens[r][t];
    }
    return ids;
  };

  nn::LstmState<T> state = lstm_.zero_state(B);
  if (config_.kind == ExtractiveKind::kCnnRnn) {
    // Fixed-length input so a sentence's output does not depend on the
    // rest of its batch.
    const std::size_t steps = std::max<std::size_t>({L, config_.max_sentence_len, 1});
    std::vector<nn::Tensor<T>> seq;
    for (std::size_t t = 0; t < steps; ++t) {
      auto ids = ids_at(t);
      seq.push_back(nn::gather_rows(embedding_, std::span<const int>(ids)));
    }
    auto pooled = nn::conv1d_maxpool(seq, conv_filters_, conv_bias_,
                                     config_.conv_width, config_.pool);
    for (auto& p : pooled) {
      nn::Tensor<T> x = p;
      if (training && rng != nullptr) x = nn::dropout(p, config_.keep_prob, *rng, true);
      state = lstm_.step(x, state);
    }
    return output_(state.h.back());
  }

  if (config_.context_enabled()) {
    if (contexts.size() != B * config_.embed_dim) {
      throw DimMismatch("context block does not match batch x embed_dim");
    }
    auto x0 = nn::Tensor<T>::from({B, config_.embed_dim},
                                  std::vector<T>(contexts.begin(), contexts.end()));
    state = lstm_.step(x0, state);
  }
  std::vector<T> mask(B);
  for (std::size_t t = 0; t < L; ++t) {
    auto ids = ids_at(t);
    for (std::size_t r = 0; r < B; ++r) mask[r] = ids[r] >= 0 ? T(1) : T(0);
    auto x = nn::gather_rows(embedding_, std::span<const int>(ids));
    state = lstm_.step(x, state, std::span<const T>(mask));
  }
  return output_(state.h.back());
}

template class ExtractiveNet<float>;
template class ExtractiveNet<double>;

ExtractiveModel::ExtractiveModel(const ExtractiveModelConfig& config,
                                 ModelVocab v)
    : vocab(std::move(v)), net(config, vocab.size()) {}

std::vector<ClassifierExample> classifier_examples(
    std::span<const Document> docs, std::span<const DocumentContext> contexts,
    std::span<const LabeledSentence> labels) {
  if (docs.size() != contexts.size()) {
    throw DimMismatch("one context per document is required");
  }
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < docs.size(); ++i) by_id.emplace(docs[i].id, i);
  std::vector<ClassifierExample> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto it = by_id.find(l.doc_id);
    if (it == by_id.end()) throw UnknownWord("label for unknown document " + l.doc_id);
    const Document& doc = docs[it->second];
    if (l.sentence_index >= doc.sentences.size()) {
      throw DimMismatch("label sentence index out of range in " + l.doc_id);
    }
    out.push_back({doc.sentences[l.sentence_index].tokens,
                   contexts[it->second].vector.v, l.label});
  }
  return out;
}

namespace {

std::vector<int> sentence_ids(const ExtractiveModel& model,
                              std::span<const std::string> tokens) {
  auto ids = model.vocab.encode(tokens);
  if (ids.size() > model.config().max_sentence_len) {
    ids.resize(model.config().max_sentence_len);
  }
  return ids;
}

double summary_probability(const nn::Tensor<float>& logits, std::size_t row) {
  const double d = static_cast<double>(logits.at(row, 0)) - logits.at(row, 1);
  return 1.0 / (1.0 + std::exp(d));
}

}  // namespace

ExtractiveModel train_classifier(std::span<const ClassifierExample> examples,
                                 const ModelVocab& vocab,
                                 const ExtractiveModelConfig& config,
                                 const EmbeddingMatrix* embeddings,
                                 TrainLog* log) {
  if (examples.empty()) throw EmptyTrainingSet();
  const bool has_pos = std::any_of(examples.begin(), examples.end(), [](const auto& e) {
    return e.label == Label::kPositive;
  });
  const bool has_neg = std::any_of(examples.begin(), examples.end(), [](const auto& e) {
    return e.label == Label::kNegative;
  });
  if (!has_pos || !has_neg) throw SingleClassData();

  ExtractiveModel model(config, vocab);
  Rng rng(config.seed);
  model.net.init(rng);
  if (embeddings != nullptr) detail::load_embedding_rows(model.net.embedding(), *embeddings);

  std::vector<std::vector<int>> ids;
  ids.reserve(examples.size());
  for (const auto& e : examples) ids.push_back(sentence_ids(model, e.tokens));

  auto opt = detail::make_optimizer(config.optimizer, config.learning_rate, 0.9);
  auto& params = model.net.params();
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, config.batch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<std::vector<int>> rows;
      std::vector<const std::vector<double>*> ctx;
      std::vector<int> targets;
      for (std::size_t i = start; i < end; ++i) {
        const auto& e = examples[order[i]];
        rows.push_back(ids[order[i]]);
        ctx.push_back(&e.context);
        targets.push_back(e.label == Label::kPositive ? 1 : 0);
      }
      auto block = detail::stack_contexts(ctx, config.embed_dim, config.context_enabled());
      auto logits = model.net.logits(rows, block, &rng, true);
      auto loss = nn::cross_entropy(logits, std::span<const int>(targets),
                                    static_cast<float>(rows.size()));
      detail::check_finite(loss.item());
      params.zero_grad();
      loss.backward();
      nn::clip_grad_norm(params, config.clip_norm);
      opt->step(params);
      total += loss.item();
      ++batches;
    }
    if (log != nullptr) log->epoch_loss.push_back(total / static_cast<double>(batches));
  }
  return model;
}

double classify_sentence(const ExtractiveModel& model,
                         std::span<const std::string> tokens,
                         const std::vector<double>* v_d) {
  nn::NoGradGuard guard;
  const auto& cfg = model.config();
  auto block = detail::stack_contexts({v_d}, cfg.embed_dim, cfg.context_enabled());
  auto logits = model.net.logits({sentence_ids(model, tokens)}, block, nullptr, false);
  return summary_probability(logits, 0);
}

std::vector<double> classify_sentences(const ExtractiveModel& model,
                                       const Document& doc,
                                       const std::vector<double>* v_d) {
  nn::NoGradGuard guard;
  const auto& cfg = model.config();
  if (doc.sentences.empty()) return {};
  std::vector<std::vector<int>> rows;
  for (const auto& s : doc.sentences) rows.push_back(sentence_ids(model, s.tokens));
  std::vector<const std::vector<double>*> ctx(rows.size(), v_d);
  auto block = detail::stack_contexts(ctx, cfg.embed_dim, cfg.context_enabled());
  auto logits = model.net.logits(rows, block, nullptr, false);
  std::vector<double> probs(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) probs[r] = summary_probability(logits, r);
  return probs;
}

}  // namespace ctxsum
