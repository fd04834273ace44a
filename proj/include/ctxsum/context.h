#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxsum/corpus.h"
#include "ctxsum/embed.h"

namespace ctxsum {

enum class Channel { kSeller, kQuery, kBrowse };

std::string to_string(Channel channel);

// Sparse vector over vocabulary ids. Absent ids are zero.
using SparseVector = std::map<WordId, double>;

double l2_norm(const SparseVector& v);

struct ChannelVector {
  std::string doc_id;
  Channel channel = Channel::kSeller;
  SparseVector weights;
  bool normalized = false;  // false only for the all-zero vector
};

struct Betas {
  double seller = 1.0;
  double query = 1.0;
  double browse = 1.0;
};

struct CombinedContext {
  std::string doc_id;
  Betas betas;
  SparseVector combined;      // sum of beta-weighted unit channel vectors
  SparseVector idf_weighted;  // combined(w) * idf(w)
};

struct DocumentContextVector {
  std::string doc_id;
  std::vector<double> v;
};

struct DocumentContext {
  CombinedContext context;
  DocumentContextVector vector;
};

struct ScoredSentence {
  std::size_t index = 0;  // sentence index within the document
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

enum class Label { kNegative = 0, kPositive = 1 };
enum class LabelSource { kBlacklist, kContextTop, kHuman };

std::string to_string(Label label);
std::string to_string(LabelSource source);

struct LabeledSentence {
  std::string doc_id;
  std::size_t sentence_index = 0;
  Label label = Label::kNegative;
  LabelSource source = LabelSource::kHuman;
  double score = 0.0;
};

// Whole-token phrase matcher.
class Blacklist {
 public:
  Blacklist() = default;
  explicit Blacklist(const WordSet& phrases);

  bool empty() const { return phrases_.empty(); }
  std::size_t size() const { return phrases_.size(); }
  bool matches(std::span<const std::string> tokens) const;

 private:
  std::vector<std::vector<std::string>> phrases_;
};

// Raw token frequencies feeding a channel. Seller: title tokens, metadata
// keys (tokenized, weighted by their count) and each taxon name's tokens
// once. Query: queries. Browse: browse_titles.
WordCounts channel_counts(const Document& doc, Channel channel);

// Frequencies restricted to the vocabulary (stopwords never appear there),
// then L2-normalized. An empty channel stays zero with normalized == false.
ChannelVector build_channel_vector(const Document& doc, Channel channel,
                                   const Vocabulary& vocab);

// Throws BetaNegative, DimMismatch when doc ids differ, UnknownWord when the
// idf table does not cover a support word.
CombinedContext combine_channels(const ChannelVector& seller,
                                 const ChannelVector& query,
                                 const ChannelVector& browse,
                                 const Betas& betas, const IdfTable& idf);

// v_d[j] = sum_w idf_weighted(w) * M[w][j]. Throws DimMismatch when a support
// id is outside the matrix.
DocumentContextVector project_context(const CombinedContext& context,
                                      const EmbeddingMatrix& embeddings);
std::vector<double> project_sparse(const SparseVector& weights,
                                   const EmbeddingMatrix& embeddings);

// Everything needed to score words against a document's context.
struct ScoringResources {
  const Vocabulary& vocab;
  const IdfTable& idf;
  const EmbeddingMatrix& embeddings;
  double generalization_weight = 0.5;
};

// Context-support words score their idf-weighted context weight. Other
// vocabulary words score max(0, cos(M[w], v_d)) * idf(w) * generalization
// weight. Stopwords and unknown words score 0.
double word_context_score(std::string_view word, const DocumentContext& ctx,
                          const ScoringResources& res);

// Sum of word scores (mean when `normalize`); 0 for an empty sentence.
double score_sentence(std::span<const std::string> tokens,
                      const DocumentContext& ctx, const ScoringResources& res,
                      bool normalize = false);

// Scores every sentence and ranks them by (score desc, index asc).
std::vector<ScoredSentence> score_sentences(const Document& doc,
                                            const DocumentContext& ctx,
                                            const ScoringResources& res,
                                            bool normalize = false);

// Sentence indices ordered by (score desc, index asc).
std::vector<std::size_t> rank_order(std::span<const double> scores);

// Walks `ranking` taking sentences while the cumulative character count stays
// within `char_budget`; the first ranked sentence is always taken. Result is
// in document order.
std::vector<std::size_t> budget_select(std::span<const std::size_t> ranking,
                                       std::span<const std::size_t> char_lens,
                                       std::size_t char_budget);

inline constexpr std::size_t kDefaultCharBudget = 800;

// Throws EmptyDocument.
std::vector<std::size_t> extract_context_summary(
    const Document& doc, const DocumentContext& ctx,
    const ScoringResources& res, std::size_t char_budget = kDefaultCharBudget,
    bool normalize = false);

// Builds channel vectors, their combination and v_d for one document.
class ContextBuilder {
 public:
  ContextBuilder(const Vocabulary& vocab, const IdfTable& idf,
                 const EmbeddingMatrix& embeddings, Betas betas = {});

  DocumentContext build(const Document& doc) const;
  std::vector<DocumentContext> build_all(std::span<const Document> docs) const;

 private:
  const Vocabulary& vocab_;
  const IdfTable& idf_;
  const EmbeddingMatrix& embeddings_;
  Betas betas_;
};

struct LabelingOptions {
  std::size_t top_m = 3;
  bool normalize = false;
};

// Per document: sentences matching the blacklist are negative; of the rest
// the top_m by context score are positive; everything else is left out.
// Throws EmptyBlacklist, DimMismatch when contexts and docs misalign.
std::vector<LabeledSentence> generate_labels(
    std::span<const Document> docs, std::span<const DocumentContext> contexts,
    const Blacklist& blacklist, const ScoringResources& res,
    const LabelingOptions& options = {});

}  // namespace ctxsum
