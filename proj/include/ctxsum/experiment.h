#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctxsum/context.h"
#include "ctxsum/embed.h"
#include "ctxsum/metrics.h"
#include "ctxsum/models.h"
#include "ctxsum/records.h"
#include "ctxsum/synth.h"

namespace ctxsum {

// Mean over documents of each similarity metric for one (model, setting,
// target) group.
struct SimilarityRow {
  std::string model;
  std::string setting;
  std::string target;
  std::size_t docs = 0;
  double token_sim = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_lcs = 0.0;
  double bleu = 0.0;
  double topic_sim = 0.0;
};

struct RankingRow {
  std::string model;
  std::string setting;
  std::size_t docs = 0;
  double ndcg1 = 0.0;
  double ndcg3 = 0.0;
  double map1 = 0.0;
  double map3 = 0.0;
};

struct ClassificationRow {
  std::string model;
  std::string setting;
  ClassificationReport report;
};

struct ModelFailure {
  std::string model;
  std::string setting;
  std::string message;
};

struct EvalReport {
  std::vector<SimilarityRow> similarity;
  std::vector<RankingRow> ranking;
  std::vector<ClassificationRow> classification;
  std::vector<ModelFailure> failures;
};

// Reference text for each document: the gold sentences for extractive
// predictions and the gold reference (title) for abstractive ones. Rows keep
// the order in which their groups first appear in `preds`. Ranking and
// classification rows use each document's first record carrying scores or
// labels within a (model, setting) group.
// Throws FormatError for a prediction on a document without gold or a
// sentence index out of range.
EvalReport evaluate(const std::vector<PredRecord>& preds,
                    const std::vector<GoldSummary>& gold,
                    std::span<const Document> docs, const Vocabulary& vocab,
                    const IdfTable& idf);

// Fixed-point text grids, one similarity grid per target.
std::string report_text(const EvalReport& report);
std::string report_json(const EvalReport& report);

enum class Setting { kSupervised, kSemiSupervised };
std::string to_string(Setting setting);
Setting parse_setting(std::string_view name);

// Recognised model names: fuzzy, nb, svm, lsa, lexrank, textrank, e-rnn,
// ec-rnn, cnn-rnn, a-rnn, ac-rnn.
bool uses_labels(const std::string& model);

struct ExperimentSpec {
  // Empty docs_path: generate a synthetic corpus from `synth`.
  std::string docs_path;
  std::string gold_path;
  SynthOptions synth;

  std::uint64_t split_seed = 7;
  std::size_t train_size = 0;  // 0: 80% of the documents
  std::size_t eval_size = 0;   // 0: the rest
  std::vector<Setting> settings = {Setting::kSupervised, Setting::kSemiSupervised};
  std::vector<ExtractTarget> targets = {ExtractTarget::sentences(1),
                                        ExtractTarget::sentences(3),
                                        ExtractTarget::sentences(5)};
  std::vector<std::string> models = {"fuzzy", "nb", "svm", "lsa", "lexrank",
                                     "textrank", "e-rnn", "ec-rnn", "cnn-rnn",
                                     "a-rnn", "ac-rnn"};
  bool paper_preset = false;
  std::uint64_t seed = 7;
  std::size_t threads = 1;

  std::int64_t min_count = 1;
  SgnsConfig sgns;
  IdfVariant idf_variant = IdfVariant::kReciprocal;
  Betas betas;
  LabelingOptions labeling;
  DecodeConfig decode;
  // Training-epoch overrides; 0 keeps the preset.
  int extractive_epochs = 0;
  int seq2seq_epochs = 0;

  // Keys as in to_map(); unknown keys throw FormatError.
  static ExperimentSpec from_map(const ConfigMap& map);
  ConfigMap to_map() const;
};

// Everything the models share: corpus statistics, embeddings and contexts
// over all documents, plus the train/eval split.
struct Workspace {
  std::vector<Document> docs;
  std::vector<GoldSummary> gold;  // aligned with docs
  Vocabulary vocab;
  IdfTable idf;
  EmbeddingMatrix embeddings;
  std::vector<DocumentContext> contexts;
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

// Throws DataLeak when a document id lands in both splits, FormatError when
// gold records do not cover the documents.
Workspace prepare_workspace(const ExperimentSpec& spec, std::vector<Document> docs,
                            std::vector<GoldSummary> gold);
Workspace prepare_workspace(const ExperimentSpec& spec);

struct ExperimentResult {
  std::vector<PredRecord> preds;
  EvalReport report;
};

// Trains every requested model (label-using models once per setting),
// summarises the eval split at every target, and evaluates. A model that
// throws is reported under `failures` and the rest still run.
ExperimentResult run_experiment(const ExperimentSpec& spec, const Workspace& ws);
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace ctxsum
