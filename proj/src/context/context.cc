#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxsum/context.h"
#include "ctxsum/error.h"

namespace ctxsum {

std::string to_string(Channel channel) {
  switch (channel) {
    case Channel::kSeller:
      return "seller";
    case Channel::kQuery:
      return "query";
    case Channel::kBrowse:
      return "browse";
  }
  return "unknown";
}

double l2_norm(const SparseVector& v) {
  double s = 0;
  for (const auto& [id, w] : v) s += w * w;
  return std::sqrt(s);
}

WordCounts channel_counts(const Document& doc, Channel channel) {
  WordCounts counts;
  auto add_counts = [&](const WordCounts& source) {
    for (const auto& [key, c] : source) {
      for (const std::string& tok : tokenize(key)) counts[tok] += c;
    }
  };
  switch (channel) {
    case Channel::kSeller:
      for (const std::string& tok : tokenize(doc.title)) ++counts[tok];
      add_counts(doc.metadata);
      for (const std::string& taxon : doc.taxonomy_path) {
        for (const std::string& tok : tokenize(taxon)) ++counts[tok];
      }
      break;
    case Channel::kQuery:
      add_counts(doc.queries);
      break;
    case Channel::kBrowse:
      add_counts(doc.browse_titles);
      break;
  }
  return counts;
}

ChannelVector build_channel_vector(const Document& doc, Channel channel,
                                   const Vocabulary& vocab) {
  ChannelVector out;
  out.doc_id = doc.id;
  out.channel = channel;
  for (const auto& [word, count] : channel_counts(doc, channel)) {
    if (count <= 0 || vocab.is_stopword(word)) continue;
    if (auto id = vocab.find(word)) out.weights[*id] += static_cast<double>(count);
  }
  const double norm = l2_norm(out.weights);
  if (norm > 0) {
    for (auto& [id, w] : out.weights) w /= norm;
    out.normalized = true;
  }
  return out;
}

CombinedContext combine_channels(const ChannelVector& seller,
                                 const ChannelVector& query,
                                 const ChannelVector& browse,
                                 const Betas& betas, const IdfTable& idf) {
  if (betas.seller < 0 || betas.query < 0 || betas.browse < 0) {
    throw BetaNegative("channel weights must be nonnegative");
  }
  if (seller.doc_id != query.doc_id || seller.doc_id != browse.doc_id) {
    throw DimMismatch("channel vectors belong to different documents");
  }
  CombinedContext out;
  out.doc_id = seller.doc_id;
  out.betas = betas;
  auto accumulate = [&](const ChannelVector& ch, double beta) {
    if (beta == 0) return;
    for (const auto& [id, w] : ch.weights) {
      if (w != 0) out.combined[id] += beta * w;
    }
  };
  accumulate(seller, betas.seller);
  accumulate(query, betas.query);
  accumulate(browse, betas.browse);
  for (const auto& [id, w] : out.combined) {
    if (id >= idf.values().size()) {
      throw UnknownWord("context word outside idf table");
    }
    out.idf_weighted[id] = w * idf.idf(id);
  }
  return out;
}

std::vector<double> project_sparse(const SparseVector& weights,
                                   const EmbeddingMatrix& embeddings) {
  std::vector<double> v(embeddings.dim(), 0.0);
  for (const auto& [id, w] : weights) {
    if (id >= embeddings.rows()) {
      throw DimMismatch("context word outside the embedding matrix");
    }
    const auto row = embeddings.row(id);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * double(row[j]);
  }
  return v;
}

DocumentContextVector project_context(const CombinedContext& context,
                                      const EmbeddingMatrix& embeddings) {
  return {context.doc_id, project_sparse(context.idf_weighted, embeddings)};
}

double word_context_score(std::string_view word, const DocumentContext& ctx,
                          const ScoringResources& res) {
  const auto id = res.vocab.find(word);
  if (!id || res.vocab.is_stopword(word)) return 0.0;
  const auto& support = ctx.context.idf_weighted;
  if (auto it = support.find(*id); it != support.end()) return it->second;

  const auto row = res.embeddings.row(*id);
  std::vector<double> emb(row.begin(), row.end());
  const double sim = cosine(std::span<const double>(emb),
                            std::span<const double>(ctx.vector.v));
  return std::max(0.0, sim) * res.idf.idf(*id) * res.generalization_weight;
}

double score_sentence(std::span<const std::string> tokens,
                      const DocumentContext& ctx, const ScoringResources& res,
                      bool normalize) {
  if (tokens.empty()) return 0.0;
  double s = 0;
  for (const std::string& tok : tokens) s += word_context_score(tok, ctx, res);
  return normalize ? s / static_cast<double>(tokens.size()) : s;
}

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

std::vector<ScoredSentence> score_sentences(const Document& doc,
                                            const DocumentContext& ctx,
                                            const ScoringResources& res,
                                            bool normalize) {
  std::vector<double> scores;
  scores.reserve(doc.sentences.size());
  for (const Sentence& s : doc.sentences) {
    scores.push_back(score_sentence(s.tokens, ctx, res, normalize));
  }
  std::vector<ScoredSentence> out(scores.size());
  const auto order = rank_order(scores);
  for (std::size_t r = 0; r < order.size(); ++r) {
    out[order[r]] = {order[r], scores[order[r]], r + 1};
  }
  return out;
}

std::vector<std::size_t> budget_select(std::span<const std::size_t> ranking,
                                       std::span<const std::size_t> char_lens,
                                       std::size_t char_budget) {
  std::vector<std::size_t> chosen;
  std::size_t used = 0;
  for (std::size_t idx : ranking) {
    const std::size_t len = char_lens[idx];
    if (!chosen.empty() && used + len > char_budget) break;
    chosen.push_back(idx);
    used += len;
    if (used > char_budget) break;  // oversized top-1 sentence
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::size_t> extract_context_summary(const Document& doc,
                                                 const DocumentContext& ctx,
                                                 const ScoringResources& res,
                                                 std::size_t char_budget,
                                                 bool normalize) {
  if (doc.sentences.empty()) throw EmptyDocument("document has no sentences");
  std::vector<double> scores;
  std::vector<std::size_t> lens;
  for (const Sentence& s : doc.sentences) {
    scores.push_back(score_sentence(s.tokens, ctx, res, normalize));
    lens.push_back(s.char_len);
  }
  return budget_select(rank_order(scores), lens, char_budget);
}

ContextBuilder::ContextBuilder(const Vocabulary& vocab, const IdfTable& idf,
                               const EmbeddingMatrix& embeddings, Betas betas)
    : vocab_(vocab), idf_(idf), embeddings_(embeddings), betas_(betas) {
  if (embeddings.rows() != vocab.size()) {
    throw DimMismatch("embedding rows do not match the vocabulary");
  }
}

DocumentContext ContextBuilder::build(const Document& doc) const {
  const auto seller = build_channel_vector(doc, Channel::kSeller, vocab_);
  const auto query = build_channel_vector(doc, Channel::kQuery, vocab_);
  const auto browse = build_channel_vector(doc, Channel::kBrowse, vocab_);
  DocumentContext out;
  out.context = combine_channels(seller, query, browse, betas_, idf_);
  out.vector = project_context(out.context, embeddings_);
  return out;
}

std::vector<DocumentContext> ContextBuilder::build_all(
    std::span<const Document> docs) const {
  std::vector<DocumentContext> out;
  out.reserve(docs.size());
  for (const Document& d : docs) out.push_back(build(d));
  return out;
}

}  // namespace ctxsum
