#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ctxsum/corpus.h"

namespace ctxsum {

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

using Tokens = std::vector<std::string>;

// Clipped n-gram overlap. Zeros when either side has no n-grams.
PrfScore rouge_n(std::span<const std::string> candidate,
                 std::span<const std::string> reference, std::size_t n);

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);
PrfScore rouge_lcs(std::span<const std::string> candidate,
                   std::span<const std::string> reference);

// Geometric mean of clipped precisions for orders 1..max_n that have at least
// one candidate n-gram, times the brevity penalty. The reference length is
// the one closest to the candidate's (shorter on ties).
double bleu(std::span<const std::string> candidate,
            const std::vector<Tokens>& references, std::size_t max_n = 4);

// Cosine of tf * idf bags; words outside the table weigh 0.
double token_similarity(std::span<const std::string> candidate,
                        std::span<const std::string> reference,
                        const IdfTable& idf);

// The q in-vocabulary, non-stopword tokens of `source` with the highest idf
// (ties by word).
WordSet topic_words(std::span<const std::string> source, const IdfTable& idf,
                    const Vocabulary& vocab, std::size_t q = 20);

// Cosine of topic-word indicator vectors.
double topic_similarity(std::span<const std::string> candidate,
                        std::span<const std::string> reference,
                        const WordSet& topic_words);

// Gains are relevances in predicted order; 0 when nothing is relevant.
double ndcg_at_k(std::span<const double> relevance, std::size_t k);

double average_precision_at_k(std::span<const int> relevance, std::size_t k);
double map_at_k(const std::vector<std::vector<int>>& relevance, std::size_t k);

struct ClassificationReport {
  double accuracy = 0.0;
  PrfScore per_class[2];  // index 0 = negative, 1 = positive
  std::size_t support[2] = {0, 0};
};

ClassificationReport classification_report(std::span<const int> predictions,
                                            std::span<const int> labels);

}  // namespace ctxsum
