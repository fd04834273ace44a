#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ctxsum/context.h"
#include "ctxsum/synth.h"

namespace ctxsum {

// One line per document: {"doc_id", "labels", "summary", "reference"}.
void write_gold(std::ostream& out, const std::vector<GoldSummary>& gold);
std::vector<GoldSummary> read_gold(std::istream& in);

// One line per labelled sentence: {"doc_id", "sentence_index", "label",
// "source", "score"}.
void write_labels(std::ostream& out, const std::vector<LabeledSentence>& labels);
std::vector<LabeledSentence> read_labels(std::istream& in);

enum class SummaryKind { kExtractive, kAbstractive };

// A model's output for one document. Extractive records list the chosen
// sentence indices; abstractive ones carry generated text. `scores` ranks
// every sentence (empty when the method has no scores) and `labels` holds
// per-sentence 0/1 decisions for classifiers.
struct PredRecord {
  std::string doc_id;
  std::string model;
  std::string setting;
  std::string target;
  SummaryKind kind = SummaryKind::kExtractive;
  std::vector<std::size_t> sentences;
  std::string text;
  std::vector<double> scores;
  std::vector<int> labels;

  bool operator==(const PredRecord&) const = default;
};

std::string pred_to_json(const PredRecord& pred);
PredRecord pred_from_json(const std::string& line);
void write_preds(std::ostream& out, const std::vector<PredRecord>& preds);
std::vector<PredRecord> read_preds(std::istream& in);

}  // namespace ctxsum
