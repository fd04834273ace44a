#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctxsum/corpus.h"

namespace ctxsum {

struct SynthOptions {
  std::uint64_t seed = 7;
  std::size_t n_docs = 100;
  // Probability that a sentence's summary label depends only on whether its
  // aspect appears in the document's context channels.
  double context_dependence = 0.0;
  std::size_t aspects_per_doc = 5;
  std::size_t max_boilerplate = 2;
};

struct GoldSummary {
  std::string doc_id;
  std::vector<int> labels;             // one 0/1 per sentence
  std::vector<std::size_t> summary;    // positive sentences, document order
  std::string reference;               // abstractive target (the title)
};

struct SynthCorpus {
  std::vector<Document> docs;
  std::vector<GoldSummary> gold;
};

// Product-like listings built from templates. Every listing has a category
// noun and a few aspects; the title names the aspects picked for the context
// channels plus the noun. Throws BadProb unless 0 <= context_dependence <= 1.
SynthCorpus synth_corpus(const SynthOptions& options);

}  // namespace ctxsum
