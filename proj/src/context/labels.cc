#include <algorithm>

#include "ctxsum/context.h"
#include "ctxsum/error.h"

namespace ctxsum {

std::string to_string(Label label) {
  return label == Label::kPositive ? "positive" : "negative";
}

std::string to_string(LabelSource source) {
  switch (source) {
    case LabelSource::kBlacklist:
      return "blacklist";
    case LabelSource::kContextTop:
      return "context_top";
    case LabelSource::kHuman:
      return "human";
  }
  return "unknown";
}

Blacklist::Blacklist(const WordSet& phrases) {
  for (const std::string& p : phrases) {
    auto tokens = tokenize(p);
    if (!tokens.empty()) phrases_.push_back(std::move(tokens));
  }
}

bool Blacklist::matches(std::span<const std::string> tokens) const {
  for (const auto& phrase : phrases_) {
    if (phrase.size() > tokens.size()) continue;
    auto it = std::search(tokens.begin(), tokens.end(), phrase.begin(),
                          phrase.end());
    if (it != tokens.end()) return true;
  }
  return false;
}

std::vector<LabeledSentence> generate_labels(
    std::span<const Document> docs, std::span<const DocumentContext> contexts,
    const Blacklist& blacklist, const ScoringResources& res,
    const LabelingOptions& options) {
  if (blacklist.empty()) throw EmptyBlacklist("blacklist has no terms");
  if (docs.size() != contexts.size()) {
    throw DimMismatch("one context per document required");
  }
  std::vector<LabeledSentence> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const Document& doc = docs[d];
    if (contexts[d].context.doc_id != doc.id) {
      throw DimMismatch("context " + contexts[d].context.doc_id +
                        " does not belong to document " + doc.id);
    }
    std::vector<LabeledSentence> labeled;
    std::vector<std::size_t> clean;
    std::vector<double> scores(doc.sentences.size(), 0.0);
    for (const Sentence& s : doc.sentences) {
      scores[s.index] =
          score_sentence(s.tokens, contexts[d], res, options.normalize);
      if (blacklist.matches(s.tokens)) {
        labeled.push_back({doc.id, s.index, Label::kNegative,
                       LabelSource::kBlacklist, scores[s.index]});
      } else {
        clean.push_back(s.index);
      }
    }
    std::stable_sort(clean.begin(), clean.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b];
    });
    const std::size_t take = std::min(options.top_m, clean.size());
    for (std::size_t i = 0; i < take; ++i) {
      labeled.push_back({doc.id, clean[i], Label::kPositive,
                         LabelSource::kContextTop, scores[clean[i]]});
    }
    std::sort(labeled.begin(), labeled.end(), [](const auto& a, const auto& b) {
      return a.sentence_index < b.sentence_index;
    });
    out.insert(out.end(), labeled.begin(), labeled.end());
  }
  return out;
}

}  // namespace ctxsum
