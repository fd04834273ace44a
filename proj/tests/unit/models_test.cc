#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxsum/error.h"
#include "ctxsum/models.h"
#include "ctxsum/nn/ops.h"
#include "oracles.h"

using namespace ctxsum;

namespace {

Seq2SeqModel random_seq2seq(Seq2SeqKind kind, std::vector<std::string> words, std::uint64_t seed,
                            double scale = 1.0) {
  auto cfg = Seq2SeqConfig::desk(kind);
  cfg.hidden = 6;
  cfg.embed_dim = 4;
  cfg.init_scale = scale;
  Seq2SeqModel m(cfg, ModelVocab(std::move(words), {"the"}));
  Rng rng(seed);
  m.net.init(rng);
  return m;
}

ExtractiveModel random_classifier(ExtractiveKind kind, std::uint64_t seed, double scale = 0.5) {
  auto cfg = ExtractiveModelConfig::desk(kind);
  cfg.hidden = 5;
  cfg.embed_dim = 4;
  cfg.conv_filters = 3;
  cfg.init_scale = scale;
  ExtractiveModel m(cfg, ModelVocab({"red", "blue", "bag", "ship", "fast"}));
  Rng rng(seed);
  m.net.init(rng);
  return m;
}

Document doc_of(const std::string& body) {
  Document d;
  d.id = "d";
  d.body = body;
  derive_sentences(d);
  return d;
}

std::vector<std::string> toks(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST_CASE("model vocabulary") {
  ModelVocab v({"red", "bag"}, {"the"});
  CHECK(v.size() == 6);
  CHECK(v.id("red") == 4);
  CHECK(v.id("bag") == 5);
  CHECK(v.id("zzz") == kUnkId);
  CHECK(v.word(5) == "bag");
  auto t = toks({"the", "red", "zzz", "bag"});
  CHECK(v.encode(t) == std::vector<int>{4, kUnkId, 5});
}

TEST_CASE("context input scaling") {
  std::vector<double> v = {3.0, 4.0, 0.0, 0.0};
  auto x = context_input(v);
  double n = 0;
  for (float f : x) n += double(f) * f;
  CHECK(std::sqrt(n) == doctest::Approx(2.0));
  CHECK(x[0] / x[1] == doctest::Approx(0.75));
  std::vector<double> z(4, 0.0);
  for (float f : context_input(z)) CHECK(f == 0.0f);
}

TEST_CASE("configs round trip through maps") {
  for (auto k : {ExtractiveKind::kERnn, ExtractiveKind::kEcRnn, ExtractiveKind::kCnnRnn}) {
    auto c = ExtractiveModelConfig::paper(k);
    auto back = ExtractiveModelConfig::from_map(c.to_map());
    CHECK(back.to_map() == c.to_map());
    CHECK(c.context_enabled() == (k == ExtractiveKind::kEcRnn));
  }
  auto p = ExtractiveModelConfig::paper(ExtractiveKind::kERnn);
  CHECK(p.layers == 2);
  CHECK(p.hidden == 300);
  CHECK(p.learning_rate == doctest::Approx(0.01));
  auto s = Seq2SeqConfig::paper(Seq2SeqKind::kAcRnn);
  CHECK(s.layers == 4);
  CHECK(s.hidden == 1000);
  CHECK(Seq2SeqConfig::from_map(s.to_map()).to_map() == s.to_map());
  CHECK(ExtractTarget::parse("800c").char_budget == 800);
  CHECK(ExtractTarget::parse("3").n_sentences == 3);
  CHECK(ExtractTarget::parse("5").to_string() == "5");
}

TEST_CASE("zero-weight classifiers are undecided") {
  for (auto k : {ExtractiveKind::kERnn, ExtractiveKind::kEcRnn, ExtractiveKind::kCnnRnn}) {
    auto cfg = ExtractiveModelConfig::desk(k);
    cfg.embed_dim = 4;
    cfg.hidden = 3;
    ExtractiveModel m(cfg, ModelVocab({"a", "b"}));
    std::vector<double> v(4, 0.3);
    auto t = toks({"a", "b", "a"});
    CHECK(classify_sentence(m, t, &v) == doctest::Approx(0.5));
  }
}

TEST_CASE("context injection") {
  std::vector<double> v1 = {1.0, -0.5, 0.2, 0.7}, v2 = {-1.0, 0.4, 0.9, -0.3};
  auto t = toks({"red", "bag", "ship"});
  for (auto k : {ExtractiveKind::kERnn, ExtractiveKind::kCnnRnn}) {
    auto m = random_classifier(k, 3);
    CHECK(classify_sentence(m, t, &v1) == classify_sentence(m, t, &v2));
    CHECK(classify_sentence(m, t, nullptr) == classify_sentence(m, t, &v1));
  }
  auto ec = random_classifier(ExtractiveKind::kEcRnn, 3);
  CHECK(classify_sentence(ec, t, &v1) != classify_sentence(ec, t, &v2));
  CHECK_THROWS_AS(classify_sentence(ec, t, nullptr), MissingContext);
  std::vector<double> wrong(7, 0.1);
  CHECK_THROWS_AS(classify_sentence(ec, t, &wrong), DimMismatch);

  auto a = random_seq2seq(Seq2SeqKind::kARnn, {"red", "bag"}, 4);
  auto ac = random_seq2seq(Seq2SeqKind::kAcRnn, {"red", "bag"}, 4);
  std::vector<int> ids = {4, 5};
  std::vector<float> c1(v1.begin(), v1.end()), c2(v2.begin(), v2.end());
  auto ha = a.net.encode({ids}, c1).h.back().values();
  CHECK(ha == a.net.encode({ids}, c2).h.back().values());
  CHECK(ha == a.net.encode({ids}, {}).h.back().values());
  CHECK(ac.net.encode({ids}, c1).h.back().values() != ac.net.encode({ids}, c2).h.back().values());
  CHECK_THROWS_AS(ac.net.encode({ids}, {}), DimMismatch);
  auto in = toks({"red"});
  CHECK_THROWS_AS(next_token_logprobs(ac, in, nullptr, {}), MissingContext);
}

TEST_CASE("encoding of an empty input is the context step alone") {
  auto ac = random_seq2seq(Seq2SeqKind::kAcRnn, {"red", "bag"}, 8);
  std::vector<float> c = {0.3f, -1.0f, 0.5f, 0.2f};
  auto got = ac.net.encode({{}}, c);
  // Replay the single step with a hand-built stack of the same parameters.
  nn::ParameterSet<float> ps;
  nn::LstmStack<float> stack(ps, "x", 4, 6, 1);
  for (auto& [name, t] : ps.items()) {
    auto suffix = name.substr(name.find('.'));
    for (auto& [n2, t2] : ac.net.params().items()) {
      if (n2.rfind("encoder", 0) == 0 && n2.substr(n2.find('.')) == suffix) t.values() = t2.values();
    }
  }
  auto want = stack.step(nn::Tensor<float>::from({1, 4}, {c.begin(), c.end()}), stack.zero_state(1));
  CHECK(got.h[0].values() == want.h[0].values());
  CHECK(got.c[0].values() == want.c[0].values());
}

TEST_CASE("beam search equals exhaustive search on a tiny vocabulary") {
  // 4 specials + 2 words: with both words in the input, at most 6 candidates
  // exist before the final step, so width 6 loses nothing.
  const auto input = toks({"red", "bag", "red"});
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    for (auto kind : {Seq2SeqKind::kARnn, Seq2SeqKind::kAcRnn}) {
      auto m = random_seq2seq(kind, {"red", "bag"}, seed, 1.5);
      std::vector<double> v = {0.4, -0.2, 1.0, 0.1};
      const std::vector<double>* vp = kind == Seq2SeqKind::kAcRnn ? &v : nullptr;
      DecodeConfig cfg;
      cfg.beam_width = 6;
      cfg.max_len = 3;
      auto beam = decode_ids(m, input, vp, cfg);
      auto best = oracle::exhaustive_decode(m, input, vp, 3);
      CHECK(beam.ids == best.ids);
      CHECK(beam.logprob == doctest::Approx(best.logprob).epsilon(1e-5));
    }
  }
}

TEST_CASE("greedy decoding is per-step argmax") {
  const auto input = toks({"red", "bag", "blue", "ship"});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = random_seq2seq(Seq2SeqKind::kARnn, {"red", "bag", "blue", "ship", "fast"}, seed, 1.0);
    DecodeConfig g;
    g.strategy = DecodeStrategy::kGreedy;
    g.max_len = 6;
    DecodeConfig b1 = g;
    b1.strategy = DecodeStrategy::kBeam;
    b1.beam_width = 1;
    auto greedy = decode_ids(m, input, nullptr, g);
    CHECK(greedy.ids == decode_ids(m, input, nullptr, b1).ids);

    auto allowed = allowed_ids(m, input);
    std::vector<int> prefix;
    while (prefix.size() < 6) {
      auto lp = next_token_logprobs(m, input, nullptr, prefix);
      int arg = allowed[0];
      for (int a : allowed) {
        if (lp[a] > lp[arg]) arg = a;
      }
      if (arg == kStopId) break;
      prefix.push_back(arg);
    }
    CHECK(greedy.ids == prefix);
  }
}

TEST_CASE("restricted decoding stays inside the document vocabulary") {
  auto m = random_seq2seq(Seq2SeqKind::kARnn, {"red", "bag", "blue", "ship", "fast"}, 21, 2.0);
  const auto input = toks({"ship", "the", "fast", "zzz"});
  auto allowed = allowed_ids(m, input);
  CHECK(allowed == std::vector<int>{kStopId, m.vocab.id("ship"), m.vocab.id("fast")});
  for (std::size_t w : {1u, 3u, 8u}) {
    DecodeConfig cfg;
    cfg.beam_width = w;
    for (const auto& tok : decode(m, input, nullptr, cfg)) CHECK((tok == "ship" || tok == "fast"));
  }
  DecodeConfig open;
  open.restrict_to_document_vocab = false;
  auto h = decode_ids(m, input, nullptr, open);
  for (int id : h.ids) CHECK((id != kPadId && id != kStartId && id != kStopId));
}

TEST_CASE("sequence log-likelihood") {
  auto m = random_seq2seq(Seq2SeqKind::kAcRnn, {"red", "bag", "blue", "ship"}, 5);
  std::vector<double> v = {0.1, 0.2, -0.3, 0.4};
  const auto input = toks({"red", "ship", "blue"});
  auto one = toks({"bag"});
  CHECK(sequence_loglik(m, input, &v, one) ==
        doctest::Approx(next_token_logprobs(m, input, &v, {})[m.vocab.id("bag")]).epsilon(1e-6));

  auto sent = toks({"blue", "the", "zzz", "red"});
  // the stopword is dropped; zzz becomes <unk>
  std::vector<int> ids = {m.vocab.id("blue"), kUnkId, m.vocab.id("red")};
  double chain = 0;
  std::vector<int> prefix;
  for (int id : ids) {
    chain += next_token_logprobs(m, input, &v, prefix)[id];
    prefix.push_back(id);
  }
  CHECK(sequence_loglik(m, input, &v, sent, false) == doctest::Approx(chain).epsilon(1e-5));
  CHECK(sequence_loglik(m, input, &v, sent, true) == doctest::Approx(chain / 3).epsilon(1e-5));

  auto twice = sent;
  twice.insert(twice.end(), sent.begin(), sent.end());
  CHECK(sequence_loglik(m, input, &v, twice, false) < sequence_loglik(m, input, &v, sent, false));
  auto stops = toks({"the"});
  CHECK_THROWS_AS(sequence_loglik(m, input, &v, stops), EmptySentence);
}

TEST_CASE("reranking") {
  auto m = random_seq2seq(Seq2SeqKind::kARnn, {"red", "bag", "blue", "ship", "fast"}, 6, 1.0);
  auto single = doc_of("Red bag.");
  CHECK(rerank_extract(m, single, nullptr) == std::vector<std::size_t>{0});

  auto d = doc_of("Red bag here. Blue ship fast. The. Fast red. Bag bag bag blue.");
  auto input = body_tokens(d);
  auto ll = sentence_logliks(m, input, nullptr, d.sentences);
  std::vector<std::size_t> order(ll.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < ll.size(); ++i) {
    if (std::isinf(ll[i])) {
      CHECK(d.sentences[i].tokens == toks({"the"}));
    } else {
      CHECK(ll[i] == doctest::Approx(sequence_loglik(m, input, nullptr, d.sentences[i].tokens)).epsilon(1e-5));
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ll[a] > ll[b]; });
  auto top = rerank_extract(m, d, nullptr, 0);
  CHECK(top == std::vector<std::size_t>{order[0]});
  auto all = rerank_extract(m, d, nullptr, 100000);
  CHECK(all.size() == d.sentences.size());
  std::size_t budget = d.sentences[order[0]].char_len + d.sentences[order[1]].char_len;
  auto two = rerank_extract(m, d, nullptr, budget);
  std::vector<std::size_t> want = {order[0], order[1]};
  std::sort(want.begin(), want.end());
  CHECK(two == want);
  Document empty;
  CHECK_THROWS_AS(rerank_extract(m, empty, nullptr), EmptyDocument);
}

TEST_CASE("rank and extract") {
  auto m = random_classifier(ExtractiveKind::kEcRnn, 9, 0.8);
  std::vector<double> v = {0.5, 0.1, -0.4, 0.9};
  auto d = doc_of("Red bag. Blue ship. Fast bag ship. Red red. Blue fast red bag.");
  auto p = classify_sentences(m, d, &v);
  REQUIRE(p.size() == 5);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == classify_sentence(m, d.sentences[i].tokens, &v));
  std::vector<std::size_t> order(5);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  CHECK(rank_and_extract(m, d, &v, ExtractTarget::sentences(1)) == std::vector<std::size_t>{order[0]});
  CHECK(rank_and_extract(m, d, &v, ExtractTarget::sentences(5)) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  std::vector<std::size_t> top3(order.begin(), order.begin() + 3);
  std::sort(top3.begin(), top3.end());
  CHECK(rank_and_extract(m, d, &v, ExtractTarget::sentences(3)) == top3);
}

TEST_CASE("model loss gradients match central differences") {
  SUBCASE("extractive") {
    for (auto kind : {ExtractiveKind::kERnn, ExtractiveKind::kEcRnn, ExtractiveKind::kCnnRnn}) {
      auto cfg = ExtractiveModelConfig::desk(kind);
      cfg.hidden = 3;
      cfg.embed_dim = 3;
      cfg.conv_filters = 2;
      cfg.init_scale = 0.5;
      ExtractiveNet<double> net(cfg, 8);
      Rng rng(2);
      net.init(rng);
      std::vector<std::vector<int>> batch = {{4, 5, 6, 7, 5}, {6, 1}};
      std::vector<double> ctx = {0.3, -0.6, 1.0, 0.2, 0.5, -0.1};
      std::vector<int> targets = {1, 0};
      std::vector<nn::Tensor<double>> params;
      for (auto& [n, t] : net.params().items()) params.push_back(t);
      double err = oracle::grad_check(params, [&] {
        return nn::cross_entropy(net.logits(batch, ctx, nullptr, false), targets, 2.0);
      });
      INFO(to_string(kind));
      CHECK(err < 1e-4);
    }
  }
  SUBCASE("seq2seq") {
    for (auto kind : {Seq2SeqKind::kARnn, Seq2SeqKind::kAcRnn}) {
      auto cfg = Seq2SeqConfig::desk(kind);
      cfg.hidden = 3;
      cfg.embed_dim = 3;
      cfg.init_scale = 0.5;
      Seq2SeqNet<double> net(cfg, 7);
      Rng rng(3);
      net.init(rng);
      std::vector<std::vector<int>> in = {{4, 5, 6}, {6}};
      std::vector<std::vector<int>> out = {{5, 3}, {6, 4, 3}};
      std::vector<double> ctx = {0.3, -0.6, 1.0, 0.2, 0.5, -0.1};
      std::vector<nn::Tensor<double>> params;
      for (auto& [n, t] : net.params().items()) params.push_back(t);
      double err = oracle::grad_check(params, [&] { return net.loss(in, ctx, out); });
      INFO(to_string(kind));
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("classifier training") {
  // "red" sentences are summary sentences, "ship" sentences are not.
  std::vector<ClassifierExample> ex;
  for (int i = 0; i < 16; ++i) {
    ex.push_back({toks({"red", i % 2 ? "bag" : "fast"}), {0, 0, 0, 0}, Label::kPositive});
    ex.push_back({toks({"ship", i % 2 ? "bag" : "fast"}), {0, 0, 0, 0}, Label::kNegative});
  }
  ModelVocab vocab({"red", "ship", "bag", "fast"});
  auto cfg = ExtractiveModelConfig::desk(ExtractiveKind::kERnn);
  cfg.embed_dim = 4;
  cfg.hidden = 8;
  cfg.epochs = 50;
  cfg.batch = 8;
  cfg.learning_rate = 0.01;
  TrainLog log;
  auto m = train_classifier(ex, vocab, cfg, nullptr, &log);
  int correct = 0;
  for (const auto& e : ex) {
    double p = classify_sentence(m, e.tokens, &e.context);
    correct += (p > 0.5) == (e.label == Label::kPositive);
  }
  CHECK(correct == static_cast<int>(ex.size()));
  for (double l : log.epoch_loss) CHECK(std::isfinite(l));

  auto again = train_classifier(ex, vocab, cfg);
  for (std::size_t i = 0; i < m.net.params().size(); ++i) {
    CHECK(m.net.params().items()[i].second.values() == again.net.params().items()[i].second.values());
  }

  std::vector<ClassifierExample> one_class(ex.begin(), ex.begin() + 1);
  CHECK_THROWS_AS(train_classifier(one_class, vocab, cfg), SingleClassData);
  CHECK_THROWS_AS(train_classifier(std::vector<ClassifierExample>{}, vocab, cfg), EmptyTrainingSet);
  EmbeddingMatrix wrong(4, 7);
  CHECK_THROWS_AS(train_classifier(ex, vocab, cfg, &wrong), DimMismatch);
}

TEST_CASE("seq2seq training") {
  std::vector<Seq2SeqPair> pairs = {
      {toks({"red", "bag", "strap"}), toks({"red", "bag"}), {}},
      {toks({"blue", "ship", "fast"}), toks({"fast", "ship"}), {}},
  };
  ModelVocab vocab({"red", "bag", "strap", "blue", "ship", "fast"});
  auto cfg = Seq2SeqConfig::desk(Seq2SeqKind::kARnn);
  cfg.hidden = 8;
  cfg.embed_dim = 4;
  cfg.epochs = 4;
  cfg.learning_rate = 0.0;
  TrainLog log;
  train_seq2seq(pairs, vocab, cfg, nullptr, &log);
  REQUIRE(log.epoch_loss.size() == 4);
  for (double l : log.epoch_loss) CHECK(l == doctest::Approx(log.epoch_loss[0]).epsilon(1e-9));

  cfg.learning_rate = 0.01;
  auto a = train_seq2seq(pairs, vocab, cfg);
  auto b = train_seq2seq(pairs, vocab, cfg);
  for (std::size_t i = 0; i < a.net.params().size(); ++i) {
    CHECK(a.net.params().items()[i].second.values() == b.net.params().items()[i].second.values());
  }
  CHECK_THROWS_AS(train_seq2seq(std::vector<Seq2SeqPair>{}, vocab, cfg), EmptyTrainingSet);

  auto m = random_seq2seq(Seq2SeqKind::kARnn, {"a"}, 1);
  auto longer = std::vector<std::string>(80, "a");
  CHECK(encoder_ids(m, longer).size() == m.config().input_len);
  auto t = target_ids(m, longer);
  CHECK(t.size() == m.config().output_len + 1);
  CHECK(t.back() == kStopId);
}
