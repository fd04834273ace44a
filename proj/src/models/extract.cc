#include <algorithm>

#include "internal.h"

namespace ctxsum {

std::vector<std::size_t> select_target(std::span<const std::size_t> ranking,
                                       const Document& doc,
                                       const ExtractTarget& target) {
  if (target.char_budget > 0 || target.n_sentences == 0) {
    std::vector<std::size_t> lens;
    for (const auto& s : doc.sentences) lens.push_back(s.char_len);
    return budget_select(ranking, lens, target.char_budget);
  }
  const std::size_t n = std::min(target.n_sentences, ranking.size());
  std::vector<std::size_t> picked(ranking.begin(),
                                  ranking.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<std::size_t> rank_and_extract(const ExtractiveModel& model,
                                          const Document& doc,
                                          const std::vector<double>* v_d,
                                          const ExtractTarget& target) {
  if (doc.sentences.empty()) throw EmptyDocument(doc.id);
  auto probs = classify_sentences(model, doc, v_d);
  auto ranking = rank_order(probs);
  return select_target(ranking, doc, target);
}

std::vector<std::size_t> rerank_extract(const Seq2SeqModel& model,
                                        const Document& doc,
                                        const std::vector<double>* v_d,
                                        std::size_t char_budget) {
  if (doc.sentences.empty()) throw EmptyDocument(doc.id);
  auto scores = sentence_logliks(model, body_tokens(doc), v_d, doc.sentences, true);
  auto ranking = rank_order(scores);
  std::vector<std::size_t> lens;
  for (const auto& s : doc.sentences) lens.push_back(s.char_len);
  return budget_select(ranking, lens, char_budget);
}

}  // namespace ctxsum
