#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ctxsum/context.h"
#include "ctxsum/error.h"
#include "ctxsum/synth.h"

using namespace ctxsum;

namespace {

Document make_doc(const std::string& id, const std::string& title, const std::string& body) {
  Document d;
  d.id = id;
  d.title = title;
  d.body = body;
  derive_sentences(d);
  return d;
}

struct Fixture {
  std::vector<Document> docs;
  Vocabulary vocab;
  IdfTable idf;
  EmbeddingMatrix emb;
};

Fixture small_fixture() {
  Fixture f;
  Document a = make_doc("a", "hiking backpack", "The backpack is green. It has a hiking strap. Free shipping today.");
  a.metadata = {{"backpack", 2}, {"hiking", 1}};
  a.queries = {{"green backpack", 3}};
  Document b = make_doc("b", "leather wallet", "Brown leather wallet. Holds cards. Rate me 5 stars please.");
  b.metadata = {{"wallet", 1}};
  f.docs = {a, b};
  f.vocab = build_vocabulary(f.docs, default_stopwords(), 1);
  f.idf = compute_idf(f.docs, f.vocab, IdfVariant::kReciprocal);
  Rng rng(4);
  f.emb = EmbeddingMatrix(f.vocab.size(), 5);
  std::normal_distribution<double> nd;
  for (float& x : f.emb.input()) x = static_cast<float>(nd(rng));
  return f;
}

// v = sum_w weight(w) * M[w], by an explicit double loop.
std::vector<double> naive_product(const SparseVector& w, const EmbeddingMatrix& m) {
  std::vector<double> v(m.dim(), 0.0);
  for (std::size_t j = 0; j < m.dim(); ++j) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto it = w.find(static_cast<WordId>(r));
      if (it != w.end()) v[j] += it->second * static_cast<double>(m.row(r)[j]);
    }
  }
  return v;
}

std::vector<std::size_t> greedy_oracle(const std::vector<double>& scores,
                                       const std::vector<std::size_t>& lens, std::size_t budget) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_pair(-scores[a], a) < std::make_pair(-scores[b], b);
  });
  std::size_t take = 1, total = lens[order[0]];
  while (take < order.size() && total + lens[order[take]] <= budget) total += lens[order[take++]];
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("channel vectors") {
  auto f = small_fixture();
  Document d = make_doc("x", "", "Backpack.");
  d.metadata = {{"backpack", 2}, {"hiking", 1}};
  auto cs = build_channel_vector(d, Channel::kSeller, f.vocab);
  CHECK(cs.normalized);
  CHECK(cs.weights.at(f.vocab.id("backpack")) == doctest::Approx(2 / std::sqrt(5.0)));
  CHECK(cs.weights.at(f.vocab.id("hiking")) == doctest::Approx(1 / std::sqrt(5.0)));

  auto cq = build_channel_vector(d, Channel::kQuery, f.vocab);
  CHECK(cq.weights.empty());
  CHECK(!cq.normalized);

  d.queries = {{"the and of", 4}};
  auto stop = build_channel_vector(d, Channel::kQuery, f.vocab);
  CHECK(stop.weights.empty());
}

TEST_CASE("combine_channels") {
  auto f = small_fixture();
  const auto& d = f.docs[0];
  auto s = build_channel_vector(d, Channel::kSeller, f.vocab);
  auto q = build_channel_vector(d, Channel::kQuery, f.vocab);
  auto b = build_channel_vector(d, Channel::kBrowse, f.vocab);
  ChannelVector zero_q{d.id, Channel::kQuery, {}, false};

  auto only_seller = combine_channels(s, zero_q, b, {}, f.idf);
  CHECK(only_seller.combined == s.weights);

  auto none = combine_channels(s, q, b, {0, 0, 0}, f.idf);
  for (const auto& [w, x] : none.combined) CHECK(x == 0.0);

  Betas betas{0.5, 2.0, 1.0};
  auto c = combine_channels(s, q, b, betas, f.idf);
  for (std::size_t w = 0; w < f.vocab.size(); ++w) {
    auto get = [&](const SparseVector& v) {
      auto it = v.find(static_cast<WordId>(w));
      return it == v.end() ? 0.0 : it->second;
    };
    double hand = 0.5 * get(s.weights) + 2.0 * get(q.weights) + 1.0 * get(b.weights);
    CHECK(get(c.combined) == doctest::Approx(hand).epsilon(1e-12));
    CHECK(get(c.idf_weighted) == doctest::Approx(hand * f.idf.idf(static_cast<WordId>(w))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(combine_channels(s, q, b, {-1, 1, 1}, f.idf), BetaNegative);
  ChannelVector other = q;
  other.doc_id = "other";
  CHECK_THROWS_AS(combine_channels(s, other, b, {}, f.idf), DimMismatch);
}

TEST_CASE("project_context") {
  auto f = small_fixture();
  CombinedContext one;
  WordId w = f.vocab.id("wallet");
  one.idf_weighted = {{w, 1.0}};
  auto v = project_context(one, f.emb).v;
  for (std::size_t j = 0; j < f.emb.dim(); ++j) CHECK(v[j] == doctest::Approx(f.emb.row(w)[j]));

  CombinedContext empty;
  auto z = project_context(empty, f.emb).v;
  CHECK(z.size() == f.emb.dim());
  CHECK(std::all_of(z.begin(), z.end(), [](double x) { return x == 0.0; }));

  SparseVector three = {{f.vocab.id("backpack"), 0.7}, {f.vocab.id("green"), -1.2}, {f.vocab.id("cards"), 2.5}};
  auto got = project_sparse(three, f.emb);
  auto want = naive_product(three, f.emb);
  for (std::size_t j = 0; j < want.size(); ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));

  SparseVector bad = {{static_cast<WordId>(f.vocab.size() + 3), 1.0}};
  CHECK_THROWS_AS(project_sparse(bad, f.emb), DimMismatch);
}

TEST_CASE("project_context is linear") {
  auto f = small_fixture();
  Rng rng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 20; ++t) {
    SparseVector a, b, mix;
    for (std::size_t w = 0; w < f.vocab.size(); ++w) {
      if (rng() % 2) a[static_cast<WordId>(w)] = u(rng);
      if (rng() % 2) b[static_cast<WordId>(w)] = u(rng);
    }
    double alpha = u(rng);
    mix = b;
    for (auto [w, x] : a) mix[w] += alpha * x;
    auto va = project_sparse(a, f.emb), vb = project_sparse(b, f.emb), vm = project_sparse(mix, f.emb);
    for (std::size_t j = 0; j < vm.size(); ++j) CHECK(vm[j] == doctest::Approx(alpha * va[j] + vb[j]).epsilon(1e-9));
  }
}

TEST_CASE("word and sentence scores") {
  auto f = small_fixture();
  ScoringResources res{f.vocab, f.idf, f.emb};
  DocumentContext ctx;
  WordId backpack = f.vocab.id("backpack");
  ctx.context.idf_weighted = {{backpack, 0.8}};
  ctx.vector.v = project_context(ctx.context, f.emb).v;

  CHECK(word_context_score("the", ctx, res) == 0.0);
  CHECK(word_context_score("notaword", ctx, res) == 0.0);
  CHECK(word_context_score("backpack", ctx, res) == doctest::Approx(0.8));

  // Make "wallet" orthogonal to v_d.
  EmbeddingMatrix ortho(f.vocab.size(), 2);
  ortho.row(backpack)[0] = 1.0f;
  ortho.row(f.vocab.id("wallet"))[1] = 3.0f;
  ortho.row(f.vocab.id("green"))[0] = 2.0f;
  ortho.row(f.vocab.id("green"))[1] = 2.0f;
  ScoringResources ores{f.vocab, f.idf, ortho};
  DocumentContext octx;
  octx.context.idf_weighted = {{backpack, 0.8}};
  octx.vector.v = project_context(octx.context, ortho).v;
  CHECK(word_context_score("wallet", octx, ores) == 0.0);
  CHECK(word_context_score("green", octx, ores) ==
        doctest::Approx(std::sqrt(0.5) * f.idf.idf("green") * 0.5));

  std::vector<std::string> stops = {"the", "and", "it"};
  CHECK(score_sentence(stops, ctx, res) == 0.0);
  std::vector<std::string> single = {"backpack"};
  CHECK(score_sentence(single, ctx, res) == doctest::Approx(0.8));
  CHECK(score_sentence(std::vector<std::string>{}, ctx, res, true) == 0.0);

  ContextBuilder builder(f.vocab, f.idf, f.emb);
  auto full = builder.build(f.docs[0]);
  auto scored = score_sentences(f.docs[0], full, res);
  REQUIRE(scored.size() == 3);
  for (const auto& s : scored) {
    double brute = 0;
    for (const auto& tok : f.docs[0].sentences[s.index].tokens) brute += word_context_score(tok, full, res);
    CHECK(s.score == doctest::Approx(brute).epsilon(1e-12));
    double mean = score_sentence(f.docs[0].sentences[s.index].tokens, full, res, true);
    CHECK(mean == doctest::Approx(brute / f.docs[0].sentences[s.index].tokens.size()));
  }
}

TEST_CASE("ranks form a permutation ordered by score then index") {
  std::vector<double> scores = {1.0, 3.0, 1.0, 2.0, 3.0};
  CHECK(rank_order(scores) == std::vector<std::size_t>{1, 4, 3, 0, 2});

  SynthOptions o;
  o.n_docs = 30;
  o.context_dependence = 0.5;
  auto sc = synth_corpus(o);
  auto vocab = build_vocabulary(sc.docs, default_stopwords(), 1);
  auto idf = compute_idf(sc.docs, vocab, IdfVariant::kReciprocal);
  Rng rng(1);
  auto emb = init_embeddings(vocab.size(), 8, rng);
  ContextBuilder builder(vocab, idf, emb);
  ScoringResources res{vocab, idf, emb};
  for (const auto& d : sc.docs) {
    auto ctx = builder.build(d);
    auto scored = score_sentences(d, ctx, res);
    std::set<std::size_t> ranks;
    for (const auto& s : scored) ranks.insert(s.rank);
    CHECK(ranks.size() == d.sentences.size());
    CHECK(*ranks.begin() == 1);
    CHECK(*ranks.rbegin() == d.sentences.size());
    for (const auto& a : scored) {
      for (const auto& b : scored) {
        if (a.rank < b.rank) CHECK((a.score > b.score || (a.score == b.score && a.index < b.index)));
      }
    }
  }
}

TEST_CASE("budget selection") {
  std::vector<std::size_t> big = {900};
  std::vector<std::size_t> r0 = {0};
  CHECK(budget_select(r0, big, 800) == std::vector<std::size_t>{0});

  std::vector<double> scores = {3, 1, 2};
  std::vector<std::size_t> lens = {100, 100, 100};
  CHECK(budget_select(rank_order(scores), lens, 250) == std::vector<std::size_t>{0, 2});

  Rng rng(21);
  std::uniform_int_distribution<int> len(20, 300), sc(0, 5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(10);
    std::vector<std::size_t> l(10);
    for (int i = 0; i < 10; ++i) {
      s[i] = sc(rng);
      l[i] = len(rng);
    }
    auto got = budget_select(rank_order(s), l, 800);
    CHECK(got == greedy_oracle(s, l, 800));
    std::size_t chars = 0;
    for (auto i : got) chars += l[i];
    CHECK((chars <= 800 || got.size() == 1));
  }

  auto f = small_fixture();
  ScoringResources res{f.vocab, f.idf, f.emb};
  Document empty;
  empty.id = "e";
  CHECK_THROWS_AS(extract_context_summary(empty, DocumentContext{}, res), EmptyDocument);
}

TEST_CASE("idf scaling scales scores and keeps the summary") {
  SynthOptions o;
  o.n_docs = 25;
  auto sc = synth_corpus(o);
  auto vocab = build_vocabulary(sc.docs, default_stopwords(), 1);
  auto idf = compute_idf(sc.docs, vocab, IdfVariant::kLog);
  auto scaled = idf.scaled(3.5);
  Rng rng(2);
  auto emb = init_embeddings(vocab.size(), 8, rng);
  ContextBuilder b1(vocab, idf, emb), b2(vocab, scaled, emb);
  ScoringResources r1{vocab, idf, emb}, r2{vocab, scaled, emb};
  for (const auto& d : sc.docs) {
    auto c1 = b1.build(d), c2 = b2.build(d);
    auto s1 = score_sentences(d, c1, r1), s2 = score_sentences(d, c2, r2);
    for (std::size_t i = 0; i < s1.size(); ++i) {
      CHECK(s1[i].index == s2[i].index);
    }
    for (const auto& s : s1) {
      auto it = std::find_if(s2.begin(), s2.end(), [&](const auto& x) { return x.index == s.index; });
      // cosine ignores the scale of v_d
      CHECK(it->score == doctest::Approx(3.5 * s.score).epsilon(1e-9));
    }
    CHECK(extract_context_summary(d, c1, r1, 200) == extract_context_summary(d, c2, r2, 200));
  }
}

TEST_CASE("channel monotonicity") {
  auto f = small_fixture();
  ScoringResources res{f.vocab, f.idf, f.emb};
  ContextBuilder builder(f.vocab, f.idf, f.emb);
  Document d = f.docs[0];
  std::vector<std::string> sent = {"backpack", "green"};
  double prev = -1;
  for (int count : {2, 3, 5, 9}) {
    d.metadata["backpack"] = count;
    double s = score_sentence(sent, builder.build(d), res);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("generate_labels") {
  auto f = small_fixture();
  ContextBuilder builder(f.vocab, f.idf, f.emb);
  auto ctxs = builder.build_all(f.docs);
  ScoringResources res{f.vocab, f.idf, f.emb};
  Blacklist bl({"rate me 5 stars", "free shipping"});

  CHECK_THROWS_AS(generate_labels(f.docs, ctxs, Blacklist{}, res), EmptyBlacklist);
  std::vector<DocumentContext> short_ctx = {ctxs[0]};
  CHECK_THROWS_AS(generate_labels(f.docs, short_ctx, bl, res), DimMismatch);

  auto labels = generate_labels(f.docs, ctxs, bl, res, {1, false});
  auto find = [&](const std::string& id, std::size_t idx) -> const LabeledSentence* {
    for (const auto& l : labels) {
      if (l.doc_id == id && l.sentence_index == idx) return &l;
    }
    return nullptr;
  };
  REQUIRE(find("b", 2));
  CHECK(find("b", 2)->label == Label::kNegative);
  CHECK(find("b", 2)->source == LabelSource::kBlacklist);
  REQUIRE(find("a", 2));
  CHECK(find("a", 2)->label == Label::kNegative);

  for (std::size_t di = 0; di < f.docs.size(); ++di) {
    auto scored = score_sentences(f.docs[di], ctxs[di], res);
    std::vector<std::size_t> clean;
    for (const auto& s : scored) {
      if (!bl.matches(f.docs[di].sentences[s.index].tokens)) clean.push_back(s.index);
    }
    REQUIRE(find(f.docs[di].id, clean[0]));
    CHECK(find(f.docs[di].id, clean[0])->label == Label::kPositive);
    CHECK(find(f.docs[di].id, clean[1]) == nullptr);
  }
}

TEST_CASE("blacklist precedence and disjoint labels on a synthetic corpus") {
  SynthOptions o;
  o.n_docs = 60;
  o.context_dependence = 0.5;
  auto sc = synth_corpus(o);
  auto vocab = build_vocabulary(sc.docs, default_stopwords(), 1);
  auto idf = compute_idf(sc.docs, vocab, IdfVariant::kReciprocal);
  Rng rng(3);
  auto emb = init_embeddings(vocab.size(), 8, rng);
  auto ctxs = ContextBuilder(vocab, idf, emb).build_all(sc.docs);
  Blacklist bl(default_blacklist());
  auto labels = generate_labels(sc.docs, ctxs, bl, {vocab, idf, emb});
  std::set<std::pair<std::string, std::size_t>> seen;
  for (const auto& l : labels) {
    CHECK(seen.insert({l.doc_id, l.sentence_index}).second);
    const Document* d = nullptr;
    for (const auto& x : sc.docs) {
      if (x.id == l.doc_id) d = &x;
    }
    bool hit = bl.matches(d->sentences[l.sentence_index].tokens);
    if (hit) CHECK(l.label == Label::kNegative);
    if (l.label == Label::kPositive) CHECK(!hit);
  }
}

TEST_CASE("blacklist matches whole tokens only") {
  Blacklist bl({"free shipping"});
  std::vector<std::string> yes = {"get", "free", "shipping", "now"};
  std::vector<std::string> no = {"freeshipping"};
  std::vector<std::string> split = {"free", "fast", "shipping"};
  CHECK(bl.matches(yes));
  CHECK(!bl.matches(no));
  CHECK(!bl.matches(split));
}

TEST_CASE("context vectors have the embedding width and unit channels") {
  SynthOptions o;
  o.n_docs = 50;
  auto sc = synth_corpus(o);
  auto vocab = build_vocabulary(sc.docs, default_stopwords(), 1);
  auto idf = compute_idf(sc.docs, vocab, IdfVariant::kReciprocal);
  Rng rng(3);
  auto emb = init_embeddings(vocab.size(), 12, rng);
  for (const auto& d : sc.docs) {
    for (Channel ch : {Channel::kSeller, Channel::kQuery, Channel::kBrowse}) {
      auto cv = build_channel_vector(d, ch, vocab);
      if (cv.normalized) CHECK(l2_norm(cv.weights) == doctest::Approx(1.0).epsilon(1e-9));
      for (const auto& [w, x] : cv.weights) {
        CHECK(w < vocab.size());
        CHECK(!default_stopwords().count(vocab.word(w)));
        CHECK(x >= 0);
      }
    }
    auto ctx = ContextBuilder(vocab, idf, emb).build(d);
    CHECK(ctx.vector.v.size() == 12);
    CHECK(std::all_of(ctx.vector.v.begin(), ctx.vector.v.end(), [](double x) { return std::isfinite(x); }));
  }
}
