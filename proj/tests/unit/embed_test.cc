#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "ctxsum/embed.h"
#include "ctxsum/error.h"
#include "ctxsum/synth.h"

using namespace ctxsum;

namespace {

Document sentence_doc(const std::string& id, const std::string& body) {
  Document d;
  d.id = id;
  d.body = body;
  derive_sentences(d);
  return d;
}

}  // namespace

TEST_CASE("skip-gram pairs") {
  Rng rng(1);
  std::vector<WordId> one = {4};
  CHECK(generate_skipgram_pairs(one, 5, rng).empty());

  std::vector<WordId> two = {0, 1};
  auto p = generate_skipgram_pairs(two, 1, rng);
  CHECK(p == std::vector<std::pair<WordId, WordId>>{{0, 1}, {1, 0}});

  // Same generator state, radius drawn once per position, enumerate by hand.
  std::vector<WordId> ten = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
    Rng a(seed), b(seed);
    auto got = generate_skipgram_pairs(ten, 2, a);
    std::multiset<std::pair<WordId, WordId>> want;
    std::uniform_int_distribution<int> radius(1, 2);
    for (int i = 0; i < 10; ++i) {
      int r = radius(b);
      for (int j = 0; j < 10; ++j) {
        if (j != i && std::abs(j - i) <= r) want.insert({ten[i], ten[j]});
      }
    }
    CHECK(std::multiset<std::pair<WordId, WordId>>(got.begin(), got.end()) == want);
  }
}

TEST_CASE("negative sampling") {
  Rng rng(3);
  std::vector<std::int64_t> single = {7};
  auto s = negative_sample(single, 50, rng);
  CHECK(s.size() == 50);
  CHECK(std::all_of(s.begin(), s.end(), [](WordId w) { return w == 0; }));
  CHECK(negative_sample(single, 0, rng).empty());

  std::vector<std::int64_t> counts = {16, 1};
  const std::size_t n = 100000;
  auto draws = negative_sample(counts, n, rng);
  const double p = 8.0 / 9.0;  // 16^0.75 = 8
  double k = static_cast<double>(std::count(draws.begin(), draws.end(), WordId{0}));
  const double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(k - n * p) < 3 * sigma);
}

TEST_CASE("sgns step at zero init") {
  EmbeddingMatrix m(4, 6);
  std::vector<WordId> negs = {2, 3, 2};
  double loss = sgns_step(0, 1, negs, 0.1, m);
  CHECK(loss == doctest::Approx(4 * std::log(2.0)).epsilon(1e-6));

  Rng rng(5);
  EmbeddingMatrix r = init_embeddings(4, 6, rng);
  for (float& x : r.output()) x = 0.3f;
  EmbeddingMatrix before = r;
  sgns_step(0, 1, negs, 0.0, r);
  CHECK(r == before);
}

TEST_CASE("sgns gradient matches central differences") {
  Rng rng(11);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t k = 4 + trial;
    const std::size_t n_neg = 1 + trial % 3;
    std::vector<double> c(k), x(k);
    std::vector<std::vector<double>> negs(n_neg, std::vector<double>(k));
    for (auto& v : c) v = nd(rng);
    for (auto& v : x) v = nd(rng);
    for (auto& row : negs) {
      for (auto& v : row) v = nd(rng);
    }
    auto loss_of = [&] {
      auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
      double dot = 0;
      for (std::size_t i = 0; i < k; ++i) dot += c[i] * x[i];
      double l = -std::log(sig(dot));
      for (const auto& row : negs) {
        double d = 0;
        for (std::size_t i = 0; i < k; ++i) d += c[i] * row[i];
        l -= std::log(sig(-d));
      }
      return l;
    };
    std::vector<double> gc(k), gx(k);
    std::vector<std::vector<double>> gn(n_neg, std::vector<double>(k));
    std::vector<std::span<const double>> neg_spans;
    std::vector<std::span<double>> gn_spans;
    for (std::size_t j = 0; j < n_neg; ++j) {
      neg_spans.emplace_back(negs[j]);
      gn_spans.emplace_back(gn[j]);
    }
    double loss = sgns_loss_and_grad<double>(c, x, neg_spans, gc, gx, gn_spans);
    CHECK(loss == doctest::Approx(loss_of()).epsilon(1e-12));

    double worst = 0;
    auto probe = [&](std::vector<double>& v, const std::vector<double>& g) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double eps = 1e-6, saved = v[i];
        v[i] = saved + eps;
        double up = loss_of();
        v[i] = saved - eps;
        double down = loss_of();
        v[i] = saved;
        double num = (up - down) / (2 * eps);
        worst = std::max(worst, std::abs(num - g[i]) / std::max({std::abs(num), std::abs(g[i]), 1e-8}));
      }
    };
    probe(c, gc);
    probe(x, gx);
    for (std::size_t j = 0; j < n_neg; ++j) probe(negs[j], gn[j]);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("init_embeddings bounds") {
  Rng rng(2);
  auto m = init_embeddings(50, 10, rng);
  for (float x : m.input()) CHECK(std::abs(x) <= 0.5f / 10);
  for (float x : m.output()) CHECK(x == 0.0f);
}

TEST_CASE("train_sgns") {
  SynthOptions o;
  o.n_docs = 40;
  auto sc = synth_corpus(o);
  auto vocab = build_vocabulary(sc.docs, default_stopwords(), 1);
  SgnsConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 6;

  SUBCASE("deterministic, finite, loss settles") {
    SgnsLog log;
    auto a = train_sgns(sc.docs, vocab, cfg, &log);
    auto b = train_sgns(sc.docs, vocab, cfg);
    CHECK(a == b);
    CHECK(a.rows() == vocab.size());
    CHECK(a.dim() == 16);
    CHECK(std::all_of(a.input().begin(), a.input().end(), [](float x) { return std::isfinite(x); }));
    REQUIRE(log.epoch_loss.size() == 6);
    CHECK(log.epoch_loss[4] <= log.epoch_loss[3]);
    CHECK(log.epoch_loss[5] <= log.epoch_loss[4]);
  }
  SUBCASE("zero epochs returns the initialisation") {
    cfg.epochs = 0;
    auto m = train_sgns(sc.docs, vocab, cfg);
    Rng rng(cfg.seed);
    auto init = init_embeddings(vocab.size(), 16, rng);
    CHECK(m.input() == init.input());
  }
  SUBCASE("no in-vocabulary tokens") {
    std::vector<Document> empty = {sentence_doc("x", "zzz.")};
    auto v = build_vocabulary(sc.docs, default_stopwords(), 1);
    if (!v.find("zzz")) CHECK_THROWS_AS(train_sgns(empty, v, cfg), EmptyCorpus);
  }
}

TEST_CASE("words sharing contexts end up closer") {
  std::vector<Document> docs;
  const std::vector<std::string> frames = {
      "soft cotton %s shirt fits well", "bright %s scarf wool knit",
      "vintage %s dress silk lining", "deep %s paint matte finish"};
  const std::vector<std::string> unrelated = {
      "engine oil filter torque wrench", "garden hose nozzle brass valve",
      "laptop battery charger cable port"};
  int id = 0;
  for (int rep = 0; rep < 30; ++rep) {
    for (const auto& f : frames) {
      for (const char* colour : {"red", "crimson"}) {
        char buf[128];
        std::snprintf(buf, sizeof buf, f.c_str(), colour);
        docs.push_back(sentence_doc(std::to_string(id++), std::string(buf) + "."));
      }
    }
    for (const auto& u : unrelated) docs.push_back(sentence_doc(std::to_string(id++), u + "."));
  }
  auto vocab = build_vocabulary(docs, {}, 1);
  SgnsConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 10;
  cfg.subsample_threshold = 0;
  auto m = train_sgns(docs, vocab, cfg);
  auto row = [&](const char* w) { return m.row(vocab.id(w)); };
  CHECK(cosine(row("red"), row("crimson")) > cosine(row("red"), row("torque")));
  CHECK(cosine(row("red"), row("crimson")) > cosine(row("red"), row("battery")));
}

TEST_CASE("cosine") {
  std::vector<double> a = {1, 0}, b = {0, 1}, c = {1, 1}, z = {0, 0};
  CHECK(cosine(std::span<const double>(a), std::span<const double>(a)) == doctest::Approx(1.0));
  CHECK(cosine(std::span<const double>(a), std::span<const double>(b)) == doctest::Approx(0.0));
  CHECK(cosine(std::span<const double>(c), std::span<const double>(a)) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(cosine(std::span<const double>(z), std::span<const double>(a)) == 0.0);
  std::vector<double> three = {1, 2, 3};
  CHECK_THROWS_AS(cosine(std::span<const double>(a), std::span<const double>(three)), DimMismatch);
}
