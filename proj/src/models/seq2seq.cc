#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "internal.h"

namespace ctxsum {

template <typename T>
Seq2SeqNet<T>::Seq2SeqNet(const Seq2SeqConfig& config, std::size_t vocab_size)
    : config_(config), vocab_size_(vocab_size) {
  const std::size_t E = config.embed_dim, H = config.hidden;
  embedding_ = params_.add("embedding", {vocab_size, E});
  encoder_ = nn::LstmStack<T>(params_, "encoder", E, H, config.layers);
  decoder_ = nn::LstmStack<T>(params_, "decoder", E, H, config.layers);
  bridge_ = nn::Linear<T>(params_, "bridge", H, E);
  output_ = nn::Linear<T>(params_, "output", H, vocab_size);
}

template <typename T>
void Seq2SeqNet<T>::init(Rng& rng) {
  nn::init_params(params_, nn::InitSpec{nn::InitKind::kUniform, config_.init_scale}, rng);
  encoder_.set_forget_bias(T(1));
  decoder_.set_forget_bias(T(1));
}

template <typename T>
nn::LstmState<T> Seq2SeqNet<T>::encode(
    const std::vector<std::vector<int>>& inputs,
    std::span<const T> contexts) const {
  const std::size_t B = inputs.size();
  const std::size_t E = config_.embed_dim;
  nn::LstmState<T> state = encoder_.zero_state(B);
  nn::Tensor<T> x0;
  if (config_.context_enabled()) {
    if (contexts.size() != B * E) {
      throw DimMismatch("context block does not match batch x embed_dim");
    }
    x0 = nn::Tensor<T>::from({B, E}, std::vector<T>(contexts.begin(), contexts.end()));
  } else {
    std::vector<int> start(B, kStartId);
    x0 = embed(start);
  }
  state = encoder_.step(x0, state);

  std::size_t L = 0;
  for (const auto& row : inputs) L = std::max(L, row.size());
  std::vector<int> ids(B);
  std::vector<T> mask(B);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t r = 0; r < B; ++r) {
      const bool live = t < inputs[r].size();
      ids[r] = live ? inputs[r][t] : -1;
      mask[r] = live ? T(1) : T(0);
    }
    state = encoder_.step(embed(ids), state, std::span<const T>(mask));
  }
  return state;
}

template <typename T>
nn::Tensor<T> Seq2SeqNet<T>::first_decoder_input(
    const nn::LstmState<T>& encoded) const {
  return bridge_(encoded.h.back());
}

template <typename T>
nn::Tensor<T> Seq2SeqNet<T>::embed(std::span<const int> ids) const {
  return nn::gather_rows(embedding_, ids);
}

template <typename T>
nn::Tensor<T> Seq2SeqNet<T>::decoder_step(const nn::Tensor<T>& x,
                                          nn::LstmState<T>& state) const {
  state = decoder_.step(x, state);
  return output_(state.h.back());
}

template <typename T>
nn::Tensor<T> Seq2SeqNet<T>::loss(
    const std::vector<std::vector<int>>& inputs, std::span<const T> contexts,
    const std::vector<std::vector<int>>& targets) const {
  if (inputs.size() != targets.size()) {
    throw ShapeMismatch("one target per input is required");
  }
  const std::size_t B = inputs.size();
  std::size_t T_max = 0, count = 0;
  for (const auto& t : targets) {
    T_max = std::max(T_max, t.size());
    count += t.size();
  }
  if (count == 0) throw EmptyTrainingSet("all targets are empty");

  nn::LstmState<T> state = encode(inputs, contexts);
  nn::Tensor<T> x = first_decoder_input(state);
  std::vector<nn::Tensor<T>> parts;
  std::vector<int> tgt(B);
  for (std::size_t t = 0; t < T_max; ++t) {
    for (std::size_t r = 0; r < B; ++r) {
      tgt[r] = t < targets[r].size() ? targets[r][t] : -1;
    }
    nn::Tensor<T> logits = decoder_step(x, state);
    parts.push_back(nn::cross_entropy(logits, std::span<const int>(tgt),
                                      static_cast<T>(count)));
    if (t + 1 < T_max) x = embed(tgt);
  }
  return nn::add_n(parts);
}

template class Seq2SeqNet<float>;
template class Seq2SeqNet<double>;

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig& config, ModelVocab v)
    : vocab(std::move(v)), net(config, vocab.size()) {}

std::vector<Seq2SeqPair> seq2seq_pairs(std::span<const Document> docs,
                                       std::span<const DocumentContext> contexts) {
  if (docs.size() != contexts.size()) {
    throw DimMismatch("one context per document is required");
  }
  std::vector<Seq2SeqPair> pairs;
  pairs.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Seq2SeqPair p;
    p.input = body_tokens(docs[i]);
    p.target = tokenize(docs[i].title);
    p.context = contexts[i].vector.v;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<int> encoder_ids(const Seq2SeqModel& model,
                             std::span<const std::string> tokens) {
  auto ids = model.vocab.encode(tokens);
  if (ids.size() > model.config().input_len) ids.resize(model.config().input_len);
  return ids;
}

std::vector<int> target_ids(const Seq2SeqModel& model,
                            std::span<const std::string> tokens) {
  auto ids = model.vocab.encode(tokens);
  if (ids.size() > model.config().output_len) ids.resize(model.config().output_len);
  ids.push_back(kStopId);
  return ids;
}

Seq2SeqModel train_seq2seq(std::span<const Seq2SeqPair> pairs,
                           const ModelVocab& vocab, const Seq2SeqConfig& config,
                           const EmbeddingMatrix* embeddings, TrainLog* log) {
  if (pairs.empty()) throw EmptyTrainingSet();
  Seq2SeqModel model(config, vocab);
  Rng rng(config.seed);
  model.net.init(rng);
  if (embeddings != nullptr) detail::load_embedding_rows(model.net.embedding(), *embeddings);

  std::vector<std::vector<int>> inputs, targets;
  for (const auto& p : pairs) {
    inputs.push_back(encoder_ids(model, p.input));
    targets.push_back(target_ids(model, p.target));
  }

  auto opt = detail::make_optimizer(config.optimizer, config.learning_rate, config.momentum);
  auto& params = model.net.params();
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, config.batch);
  double lr = config.learning_rate;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.halve_lr_every > 0 && epoch > 0 && epoch % config.halve_lr_every == 0) {
      lr *= 0.5;
      opt->set_learning_rate(lr);
    }
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<std::vector<int>> in, tg;
      std::vector<const std::vector<double>*> ctx;
      for (std::size_t i = start; i < end; ++i) {
        in.push_back(inputs[order[i]]);
        tg.push_back(targets[order[i]]);
        ctx.push_back(&pairs[order[i]].context);
      }
      auto block = detail::stack_contexts(ctx, config.embed_dim, config.context_enabled());
      auto loss = model.net.loss(in, block, tg);
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

namespace {

struct Encoded {
  nn::LstmState<float> state;
  nn::Tensor<float> first_input;
};

Encoded encode_one(const Seq2SeqModel& model, std::span<const std::string> input,
                   const std::vector<double>* v_d) {
  const auto& cfg = model.config();
  auto block = detail::stack_contexts({v_d}, cfg.embed_dim, cfg.context_enabled());
  Encoded e;
  e.state = model.net.encode({encoder_ids(model, input)}, block);
  e.first_input = model.net.first_decoder_input(e.state);
  return e;
}

std::vector<double> full_logprobs(const nn::Tensor<float>& logits) {
  auto lp = nn::log_softmax<float>(logits.data());
  return std::vector<double>(lp.begin(), lp.end());
}

double log_sum_exp(const std::vector<double>& lp, const std::vector<int>& ids) {
  double m = -std::numeric_limits<double>::infinity();
  for (int a : ids) m = std::max(m, lp[static_cast<std::size_t>(a)]);
  double s = 0.0;
  for (int a : ids) s += std::exp(lp[static_cast<std::size_t>(a)] - m);
  return m + std::log(s);
}

}  // namespace

std::vector<double> next_token_logprobs(const Seq2SeqModel& model,
                                        std::span<const std::string> input,
                                        const std::vector<double>* v_d,
                                        std::span<const int> prefix) {
  nn::NoGradGuard guard;
  Encoded e = encode_one(model, input, v_d);
  nn::LstmState<float> state = e.state;
  nn::Tensor<float> logits = model.net.decoder_step(e.first_input, state);
  for (int id : prefix) {
    std::vector<int> one{id};
    logits = model.net.decoder_step(model.net.embed(one), state);
  }
  return full_logprobs(logits);
}

std::vector<int> allowed_ids(const Seq2SeqModel& model,
                             std::span<const std::string> input) {
  std::vector<int> ids = model.vocab.encode(input);
  ids.push_back(kStopId);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  ids.erase(std::remove(ids.begin(), ids.end(), kUnkId), ids.end());
  return ids;
}

Hypothesis decode_ids(const Seq2SeqModel& model,
                      std::span<const std::string> input,
                      const std::vector<double>* v_d, const DecodeConfig& cfg) {
  nn::NoGradGuard guard;
  const std::size_t width =
      cfg.strategy == DecodeStrategy::kGreedy ? 1 : std::max<std::size_t>(1, cfg.beam_width);

  std::vector<int> allowed;
  if (cfg.restrict_to_document_vocab) {
    allowed = allowed_ids(model, input);
  } else {
    for (int a = 0; a < static_cast<int>(model.vocab.size()); ++a) {
      if (a != kPadId && a != kStartId) allowed.push_back(a);
    }
  }

  struct Live {
    std::vector<int> ids;
    double logprob = 0.0;
    nn::LstmState<float> state;
    nn::Tensor<float> next_input;
  };
  struct Candidate {
    std::size_t parent;
    int token;
    double logprob;
  };

  Encoded e = encode_one(model, input, v_d);
  std::vector<Live> live{{{}, 0.0, e.state, e.first_input}};
  std::vector<Hypothesis> finished;

  for (std::size_t step = 0; step < cfg.max_len && !live.empty(); ++step) {
    std::vector<Candidate> cands;
    std::vector<nn::LstmState<float>> states;
    for (std::size_t p = 0; p < live.size(); ++p) {
      nn::LstmState<float> state = live[p].state;
      auto lp = full_logprobs(model.net.decoder_step(live[p].next_input, state));
      states.push_back(std::move(state));
      const double norm = cfg.restrict_to_document_vocab ? log_sum_exp(lp, allowed) : 0.0;
      for (int a : allowed) {
        cands.push_back({p, a, live[p].logprob + lp[static_cast<std::size_t>(a)] - norm});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.logprob > b.logprob;
    });
    if (cands.size() > width) cands.resize(width);

    std::vector<Live> next;
    for (const auto& c : cands) {
      std::vector<int> ids = live[c.parent].ids;
      if (c.token == kStopId) {
        finished.push_back({std::move(ids), c.logprob, true});
        continue;
      }
      ids.push_back(c.token);
      if (ids.size() >= cfg.max_len) {
        finished.push_back({std::move(ids), c.logprob, false});
        continue;
      }
      std::vector<int> one{c.token};
      next.push_back({std::move(ids), c.logprob, states[c.parent], model.net.embed(one)});
    }
    live = std::move(next);
  }
  if (finished.empty()) return {};
  return *std::max_element(finished.begin(), finished.end(),
                           [](const Hypothesis& a, const Hypothesis& b) {
                             return a.logprob < b.logprob;
                           });
}

std::vector<std::string> decode(const Seq2SeqModel& model,
                                std::span<const std::string> input,
                                const std::vector<double>* v_d,
                                const DecodeConfig& cfg) {
  Hypothesis h = decode_ids(model, input, v_d, cfg);
  std::vector<std::string> words;
  for (int id : h.ids) words.push_back(model.vocab.word(id));
  return words;
}

std::vector<double> sentence_logliks(const Seq2SeqModel& model,
                                     std::span<const std::string> input,
                                     const std::vector<double>* v_d,
                                     std::span<const Sentence> sentences,
                                     bool length_normalize) {
  nn::NoGradGuard guard;
  Encoded e = encode_one(model, input, v_d);
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<int> ids = model.vocab.encode(s.tokens);
    if (ids.empty()) {
      out.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    nn::LstmState<float> state = e.state;
    nn::Tensor<float> x = e.first_input;
    double total = 0.0;
    for (int id : ids) {
      auto lp = full_logprobs(model.net.decoder_step(x, state));
      total += lp[static_cast<std::size_t>(id)];
      std::vector<int> one{id};
      x = model.net.embed(one);
    }
    out.push_back(length_normalize ? total / static_cast<double>(ids.size()) : total);
  }
  return out;
}

double sequence_loglik(const Seq2SeqModel& model,
                       std::span<const std::string> input,
                       const std::vector<double>* v_d,
                       std::span<const std::string> sentence,
                       bool length_normalize) {
  if (model.vocab.encode(sentence).empty()) throw EmptySentence();
  Sentence s;
  s.tokens.assign(sentence.begin(), sentence.end());
  return sentence_logliks(model, input, v_d, std::span<const Sentence>(&s, 1),
                          length_normalize)[0];
}

}  // namespace ctxsum
