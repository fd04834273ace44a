#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctxsum/context.h"
#include "ctxsum/corpus.h"
#include "ctxsum/embed.h"
#include "ctxsum/nn/layers.h"
#include "ctxsum/nn/optim.h"
#include "ctxsum/rng.h"

namespace ctxsum {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kStartId = 2;
inline constexpr int kStopId = 3;
inline constexpr int kNumSpecialIds = 4;

// Token ids used by the neural models: the four specials followed by the
// corpus vocabulary in its own order, so corpus id w maps to w + 4.
class ModelVocab {
 public:
  ModelVocab() = default;
  explicit ModelVocab(std::vector<std::string> words, WordSet stopwords = {});
  explicit ModelVocab(const Vocabulary& vocab)
      : ModelVocab(vocab.words(), vocab.stopwords()) {}

  std::size_t size() const { return words_.size() + kNumSpecialIds; }
  const std::vector<std::string>& words() const { return words_; }
  const WordSet& stopwords() const { return stopwords_; }
  int id(std::string_view word) const;  // kUnkId when absent
  const std::string& word(int id) const;

  // Stopwords are dropped; other unknown words become kUnkId.
  std::vector<int> encode(std::span<const std::string> tokens) const;

 private:
  std::vector<std::string> words_;
  WordSet stopwords_;
  std::unordered_map<std::string, int> index_;
};

enum class OptimizerKind { kSgdMomentum, kAdam };
enum class ExtractiveKind { kERnn, kEcRnn, kCnnRnn };
enum class Seq2SeqKind { kARnn, kAcRnn };

std::string to_string(OptimizerKind kind);
std::string to_string(ExtractiveKind kind);
std::string to_string(Seq2SeqKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);
ExtractiveKind parse_extractive_kind(std::string_view name);
Seq2SeqKind parse_seq2seq_kind(std::string_view name);

using ConfigMap = std::map<std::string, std::string>;

struct ExtractiveModelConfig {
  ExtractiveKind kind = ExtractiveKind::kERnn;
  std::size_t layers = 1;
  std::size_t hidden = 64;
  std::size_t embed_dim = 32;
  std::size_t max_sentence_len = 15;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 0.003;  // 0.01 in the paper preset
  std::size_t batch = 256;
  int epochs = 60;
  std::uint64_t seed = 7;
  double init_scale = 0.1;  // uniform bound, or normal std for cnn_rnn
  double clip_norm = 5.0;
  std::size_t conv_filters = 64;
  std::size_t conv_width = 4;
  std::size_t pool = 4;
  double keep_prob = 0.5;

  bool context_enabled() const { return kind == ExtractiveKind::kEcRnn; }

  static ExtractiveModelConfig desk(ExtractiveKind kind);
  static ExtractiveModelConfig paper(ExtractiveKind kind);

  ConfigMap to_map() const;
  static ExtractiveModelConfig from_map(const ConfigMap& map);
};

struct Seq2SeqConfig {
  Seq2SeqKind kind = Seq2SeqKind::kARnn;
  std::size_t layers = 1;
  std::size_t hidden = 64;
  std::size_t embed_dim = 32;
  std::size_t input_len = 50;
  std::size_t output_len = 15;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 0.003;
  double momentum = 0.9;
  int halve_lr_every = 0;  // epochs; 0 keeps the rate fixed
  std::size_t batch = 8;
  int epochs = 60;
  std::uint64_t seed = 7;
  double init_scale = 0.1;
  double clip_norm = 5.0;

  bool context_enabled() const { return kind == Seq2SeqKind::kAcRnn; }

  static Seq2SeqConfig desk(Seq2SeqKind kind);
  static Seq2SeqConfig paper(Seq2SeqKind kind);

  ConfigMap to_map() const;
  static Seq2SeqConfig from_map(const ConfigMap& map);
};

enum class DecodeStrategy { kGreedy, kBeam };

struct DecodeConfig {
  DecodeStrategy strategy = DecodeStrategy::kBeam;
  std::size_t beam_width = 4;
  bool restrict_to_document_vocab = true;
  std::size_t max_len = 15;
};

// v_d rescaled to norm sqrt(k), i.e. unit RMS per component, as fed to the
// networks. A zero vector stays zero.
std::vector<float> context_input(std::span<const double> v_d);

// Sentence classifier: E-RNN, EC-RNN (v_d as the t=0 input) or CNN-RNN.
template <typename T>
class ExtractiveNet {
 public:
  ExtractiveNet() = default;
  ExtractiveNet(const ExtractiveModelConfig& config, std::size_t vocab_size);

  const ExtractiveModelConfig& config() const { return config_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  nn::Tensor<T>& embedding() { return embedding_; }

  // Initializer from the config, forget-gate bias 1.
  void init(Rng& rng);

  // B x 2 logits. Rows of `tokens` may differ in length and must already be
  // truncated; `contexts` is B x embed_dim row-major and read only by the
  // contextual model. `rng` drives dropout when training.
  nn::Tensor<T> logits(const std::vector<std::vector<int>>& tokens,
                       std::span<const T> contexts, Rng* rng,
                       bool training) const;

 private:
  ExtractiveModelConfig config_;
  nn::ParameterSet<T> params_;
  nn::Tensor<T> embedding_;
  nn::Tensor<T> conv_filters_;
  nn::Tensor<T> conv_bias_;
  nn::LstmStack<T> lstm_;
  nn::Linear<T> output_;
};

// Encoder-decoder. The encoder reads v_d (AC-RNN) or <start> (A-RNN) at t=0
// followed by the document tokens; the decoder starts from the encoder state
// and takes a projection of the encoder's top hidden vector as its first
// input.
template <typename T>
class Seq2SeqNet {
 public:
  Seq2SeqNet() = default;
  Seq2SeqNet(const Seq2SeqConfig& config, std::size_t vocab_size);

  const Seq2SeqConfig& config() const { return config_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  nn::Tensor<T>& embedding() { return embedding_; }
  std::size_t vocab_size() const { return vocab_size_; }

  void init(Rng& rng);

  nn::LstmState<T> encode(const std::vector<std::vector<int>>& inputs,
                          std::span<const T> contexts) const;
  nn::Tensor<T> first_decoder_input(const nn::LstmState<T>& encoded) const;
  nn::Tensor<T> embed(std::span<const int> ids) const;
  // Advances the decoder one step and returns B x V logits.
  nn::Tensor<T> decoder_step(const nn::Tensor<T>& x,
                             nn::LstmState<T>& state) const;

  // Mean token cross-entropy with teacher forcing. Targets end with <stop>
  // and are not padded; shorter rows simply stop contributing.
  nn::Tensor<T> loss(const std::vector<std::vector<int>>& inputs,
                     std::span<const T> contexts,
                     const std::vector<std::vector<int>>& targets) const;

 private:
  Seq2SeqConfig config_;
  std::size_t vocab_size_ = 0;
  nn::ParameterSet<T> params_;
  nn::Tensor<T> embedding_;
  nn::LstmStack<T> encoder_;
  nn::LstmStack<T> decoder_;
  nn::Linear<T> bridge_;
  nn::Linear<T> output_;
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

struct ExtractiveModel {
  ModelVocab vocab;
  ExtractiveNet<float> net;

  ExtractiveModel() = default;
  ExtractiveModel(const ExtractiveModelConfig& config, ModelVocab vocab);
  const ExtractiveModelConfig& config() const { return net.config(); }
};

struct Seq2SeqModel {
  ModelVocab vocab;
  Seq2SeqNet<float> net;

  Seq2SeqModel() = default;
  Seq2SeqModel(const Seq2SeqConfig& config, ModelVocab vocab);
  const Seq2SeqConfig& config() const { return net.config(); }
};

struct ClassifierExample {
  std::vector<std::string> tokens;
  std::vector<double> context;  // v_d of the sentence's document
  Label label = Label::kNegative;
};

// Joins labels with their sentences and document context vectors.
std::vector<ClassifierExample> classifier_examples(
    std::span<const Document> docs, std::span<const DocumentContext> contexts,
    std::span<const LabeledSentence> labels);

// Throws EmptyTrainingSet, SingleClassData, DimMismatch when `embeddings`
// (used to initialise corpus-word rows) has the wrong width.
ExtractiveModel train_classifier(std::span<const ClassifierExample> examples,
                                 const ModelVocab& vocab,
                                 const ExtractiveModelConfig& config,
                                 const EmbeddingMatrix* embeddings = nullptr,
                                 TrainLog* log = nullptr);

// P(summary). Throws MissingContext for ec_rnn without v_d, DimMismatch on a
// v_d of the wrong width. Non-contextual models ignore v_d.
double classify_sentence(const ExtractiveModel& model,
                         std::span<const std::string> tokens,
                         const std::vector<double>* v_d);

std::vector<double> classify_sentences(const ExtractiveModel& model,
                                       const Document& doc,
                                       const std::vector<double>* v_d);

struct ExtractTarget {
  std::size_t n_sentences = 0;  // used when char_budget == 0
  std::size_t char_budget = 0;

  static ExtractTarget sentences(std::size_t n) { return {n, 0}; }
  static ExtractTarget budget(std::size_t chars) { return {0, chars}; }
  // "1", "3", "5" or "<chars>c"
  static ExtractTarget parse(std::string_view text);
  std::string to_string() const;
};

// First n of `ranking` (or a budget fill), in document order.
std::vector<std::size_t> select_target(std::span<const std::size_t> ranking,
                                       const Document& doc,
                                       const ExtractTarget& target);

// Ranks sentences by P(summary) desc, earlier index first on ties.
// Throws EmptyDocument.
std::vector<std::size_t> rank_and_extract(const ExtractiveModel& model,
                                          const Document& doc,
                                          const std::vector<double>* v_d,
                                          const ExtractTarget& target);

struct Seq2SeqPair {
  std::vector<std::string> input;
  std::vector<std::string> target;
  std::vector<double> context;
};

// Body tokens in, title tokens out.
std::vector<Seq2SeqPair> seq2seq_pairs(std::span<const Document> docs,
                                       std::span<const DocumentContext> contexts);

// Throws EmptyTrainingSet.
Seq2SeqModel train_seq2seq(std::span<const Seq2SeqPair> pairs,
                           const ModelVocab& vocab, const Seq2SeqConfig& config,
                           const EmbeddingMatrix* embeddings = nullptr,
                           TrainLog* log = nullptr);

// Encoder input ids: stopwords dropped, unknown words as <unk>, truncated to
// input_len. Target ids: truncated to output_len, then <stop>.
std::vector<int> encoder_ids(const Seq2SeqModel& model,
                             std::span<const std::string> tokens);
std::vector<int> target_ids(const Seq2SeqModel& model,
                            std::span<const std::string> tokens);

// Full-vocabulary log-probabilities of the next token after `prefix`,
// recomputed from scratch.
std::vector<double> next_token_logprobs(const Seq2SeqModel& model,
                                        std::span<const std::string> input,
                                        const std::vector<double>* v_d,
                                        std::span<const int> prefix);

struct Hypothesis {
  std::vector<int> ids;  // without <stop>
  double logprob = 0.0;
  bool stopped = false;
};

// With restriction, log-softmax is renormalised over the input's token ids
// and <stop>. A hypothesis completes on <stop> or after max_len tokens.
Hypothesis decode_ids(const Seq2SeqModel& model,
                      std::span<const std::string> input,
                      const std::vector<double>* v_d, const DecodeConfig& cfg);
std::vector<std::string> decode(const Seq2SeqModel& model,
                                std::span<const std::string> input,
                                const std::vector<double>* v_d,
                                const DecodeConfig& cfg = {});

// Allowed next tokens under restriction, ascending.
std::vector<int> allowed_ids(const Seq2SeqModel& model,
                             std::span<const std::string> input);

// Teacher-forced sum of log p(y_t | v, y_<t) over the sentence's tokens with
// the full softmax; mean per token when normalised. Throws EmptySentence.
double sequence_loglik(const Seq2SeqModel& model,
                       std::span<const std::string> input,
                       const std::vector<double>* v_d,
                       std::span<const std::string> sentence,
                       bool length_normalize = true);

// Normalised (or summed) log-likelihood of each sentence under a single
// encoding of `input`; -inf for sentences with no scorable token.
std::vector<double> sentence_logliks(const Seq2SeqModel& model,
                                     std::span<const std::string> input,
                                     const std::vector<double>* v_d,
                                     std::span<const Sentence> sentences,
                                     bool length_normalize = true);

// Every body token of the document, sentence by sentence.
std::vector<std::string> body_tokens(const Document& doc);

// Sentences ranked by normalised likelihood, budget-filled. Sentences with
// no scorable token rank last. Throws EmptyDocument.
std::vector<std::size_t> rerank_extract(const Seq2SeqModel& model,
                                        const Document& doc,
                                        const std::vector<double>* v_d,
                                        std::size_t char_budget =
                                            kDefaultCharBudget);

}  // namespace ctxsum
