#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "internal.h"

namespace ctxsum {

namespace {

const std::string kSpecialNames[kNumSpecialIds] = {"<pad>", "<unk>", "<start>",
                                                   "<stop>"};

std::string fmt_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

const std::string& need(const ConfigMap& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw FormatError("config is missing key " + key);
  return it->second;
}

std::size_t get_size(const ConfigMap& m, const std::string& key) {
  return static_cast<std::size_t>(std::stoull(need(m, key)));
}

double get_double(const ConfigMap& m, const std::string& key) {
  return std::stod(need(m, key));
}

}  // namespace

ModelVocab::ModelVocab(std::vector<std::string> words, WordSet stopwords)
    : words_(std::move(words)), stopwords_(std::move(stopwords)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], static_cast<int>(i) + kNumSpecialIds);
  }
}

int ModelVocab::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& ModelVocab::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw UnknownWord("model id out of range: " + std::to_string(id));
  }
  if (id < kNumSpecialIds) return kSpecialNames[id];
  return words_[static_cast<std::size_t>(id - kNumSpecialIds)];
}

std::vector<int> ModelVocab::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (stopwords_.count(t)) continue;
    ids.push_back(id(t));
  }
  return ids;
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd_momentum";
}

std::string to_string(ExtractiveKind kind) {
  switch (kind) {
    case ExtractiveKind::kERnn: return "e-rnn";
    case ExtractiveKind::kEcRnn: return "ec-rnn";
    case ExtractiveKind::kCnnRnn: return "cnn-rnn";
  }
  return "";
}

std::string to_string(Seq2SeqKind kind) {
  return kind == Seq2SeqKind::kARnn ? "a-rnn" : "ac-rnn";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::kSgdMomentum;
  throw FormatError("unknown optimizer: " + std::string(name));
}

ExtractiveKind parse_extractive_kind(std::string_view name) {
  if (name == "e-rnn" || name == "e_rnn") return ExtractiveKind::kERnn;
  if (name == "ec-rnn" || name == "ec_rnn") return ExtractiveKind::kEcRnn;
  if (name == "cnn-rnn" || name == "cnn_rnn") return ExtractiveKind::kCnnRnn;
  throw FormatError("unknown extractive model: " + std::string(name));
}

Seq2SeqKind parse_seq2seq_kind(std::string_view name) {
  if (name == "a-rnn" || name == "a_rnn") return Seq2SeqKind::kARnn;
  if (name == "ac-rnn" || name == "ac_rnn") return Seq2SeqKind::kAcRnn;
  throw FormatError("unknown abstractive model: " + std::string(name));
}

ExtractiveModelConfig ExtractiveModelConfig::desk(ExtractiveKind kind) {
  ExtractiveModelConfig c;
  c.kind = kind;
  if (kind == ExtractiveKind::kCnnRnn) {
    c.batch = 128;
    c.conv_filters = 32;
  }
  return c;
}

ExtractiveModelConfig ExtractiveModelConfig::paper(ExtractiveKind kind) {
  ExtractiveModelConfig c = desk(kind);
  c.hidden = 300;
  c.embed_dim = 300;
  c.layers = kind == ExtractiveKind::kCnnRnn ? 1 : 2;
  c.learning_rate = 0.01;
  c.epochs = 10;
  c.conv_filters = kind == ExtractiveKind::kCnnRnn ? 128 : c.conv_filters;
  return c;
}

ConfigMap ExtractiveModelConfig::to_map() const {
  return {{"kind", ctxsum::to_string(kind)},
          {"layers", std::to_string(layers)},
          {"hidden", std::to_string(hidden)},
          {"embed_dim", std::to_string(embed_dim)},
          {"max_sentence_len", std::to_string(max_sentence_len)},
          {"optimizer", ctxsum::to_string(optimizer)},
          {"learning_rate", fmt_double(learning_rate)},
          {"batch", std::to_string(batch)},
          {"epochs", std::to_string(epochs)},
          {"seed", std::to_string(seed)},
          {"init_scale", fmt_double(init_scale)},
          {"clip_norm", fmt_double(clip_norm)},
          {"conv_filters", std::to_string(conv_filters)},
          {"conv_width", std::to_string(conv_width)},
          {"pool", std::to_string(pool)},
          {"keep_prob", fmt_double(keep_prob)}};
}

ExtractiveModelConfig ExtractiveModelConfig::from_map(const ConfigMap& m) {
  ExtractiveModelConfig c;
  c.kind = parse_extractive_kind(need(m, "kind"));
  c.layers = get_size(m, "layers");
  c.hidden = get_size(m, "hidden");
  c.embed_dim = get_size(m, "embed_dim");
  c.max_sentence_len = get_size(m, "max_sentence_len");
  c.optimizer = parse_optimizer_kind(need(m, "optimizer"));
  c.learning_rate = get_double(m, "learning_rate");
  c.batch = get_size(m, "batch");
  c.epochs = std::stoi(need(m, "epochs"));
  c.seed = std::stoull(need(m, "seed"));
  c.init_scale = get_double(m, "init_scale");
  c.clip_norm = get_double(m, "clip_norm");
  c.conv_filters = get_size(m, "conv_filters");
  c.conv_width = get_size(m, "conv_width");
  c.pool = get_size(m, "pool");
  c.keep_prob = get_double(m, "keep_prob");
  return c;
}

Seq2SeqConfig Seq2SeqConfig::desk(Seq2SeqKind kind) {
  Seq2SeqConfig c;
  c.kind = kind;
  return c;
}

Seq2SeqConfig Seq2SeqConfig::paper(Seq2SeqKind kind) {
  Seq2SeqConfig c;
  c.kind = kind;
  c.layers = 4;
  c.hidden = 1000;
  c.embed_dim = 300;
  c.optimizer = OptimizerKind::kSgdMomentum;
  c.learning_rate = 0.1;
  c.halve_lr_every = 3;
  c.batch = 128;
  c.epochs = 12;
  return c;
}

ConfigMap Seq2SeqConfig::to_map() const {
  return {{"kind", ctxsum::to_string(kind)},
          {"layers", std::to_string(layers)},
          {"hidden", std::to_string(hidden)},
          {"embed_dim", std::to_string(embed_dim)},
          {"input_len", std::to_string(input_len)},
          {"output_len", std::to_string(output_len)},
          {"optimizer", ctxsum::to_string(optimizer)},
          {"learning_rate", fmt_double(learning_rate)},
          {"momentum", fmt_double(momentum)},
          {"halve_lr_every", std::to_string(halve_lr_every)},
          {"batch", std::to_string(batch)},
          {"epochs", std::to_string(epochs)},
          {"seed", std::to_string(seed)},
          {"init_scale", fmt_double(init_scale)},
          {"clip_norm", fmt_double(clip_norm)}};
}

Seq2SeqConfig Seq2SeqConfig::from_map(const ConfigMap& m) {
  Seq2SeqConfig c;
  c.kind = parse_seq2seq_kind(need(m, "kind"));
  c.layers = get_size(m, "layers");
  c.hidden = get_size(m, "hidden");
  c.embed_dim = get_size(m, "embed_dim");
  c.input_len = get_size(m, "input_len");
  c.output_len = get_size(m, "output_len");
  c.optimizer = parse_optimizer_kind(need(m, "optimizer"));
  c.learning_rate = get_double(m, "learning_rate");
  c.momentum = get_double(m, "momentum");
  c.halve_lr_every = std::stoi(need(m, "halve_lr_every"));
  c.batch = get_size(m, "batch");
  c.epochs = std::stoi(need(m, "epochs"));
  c.seed = std::stoull(need(m, "seed"));
  c.init_scale = get_double(m, "init_scale");
  c.clip_norm = get_double(m, "clip_norm");
  return c;
}

std::vector<float> context_input(std::span<const double> v_d) {
  double sq = 0.0;
  for (double x : v_d) sq += x * x;
  const double norm = std::sqrt(sq);
  std::vector<float> out(v_d.size(), 0.0f);
  if (norm == 0.0) return out;
  const double target = std::sqrt(static_cast<double>(v_d.size()));
  for (std::size_t i = 0; i < v_d.size(); ++i) {
    out[i] = static_cast<float>(target * v_d[i] / norm);
  }
  return out;
}

ExtractTarget ExtractTarget::parse(std::string_view text) {
  if (text.empty()) throw FormatError("empty summary target");
  const bool chars = text.back() == 'c';
  std::string_view digits = chars ? text.substr(0, text.size() - 1) : text;
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
    throw FormatError("bad summary target: " + std::string(text));
  }
  return chars ? budget(n) : sentences(n);
}

std::string ExtractTarget::to_string() const {
  return char_budget > 0 ? std::to_string(char_budget) + "c"
                         : std::to_string(n_sentences);
}

std::vector<std::string> body_tokens(const Document& doc) {
  std::vector<std::string> out;
  for (const auto& s : doc.sentences) {
    out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  }
  return out;
}

namespace detail {

std::unique_ptr<nn::Optimizer<float>> make_optimizer(OptimizerKind kind,
                                                     double lr,
                                                     double momentum) {
  if (kind == OptimizerKind::kAdam) return std::make_unique<nn::Adam<float>>(lr);
  return std::make_unique<nn::SgdMomentum<float>>(lr, momentum);
}

void load_embedding_rows(nn::Tensor<float>& table,
                         const EmbeddingMatrix& embeddings) {
  const std::size_t dim = table.cols();
  if (embeddings.dim() != dim) {
    throw DimMismatch("embedding width " + std::to_string(embeddings.dim()) +
                      " does not match model width " + std::to_string(dim));
  }
  if (embeddings.rows() + kNumSpecialIds != table.rows()) {
    throw DimMismatch("embedding rows do not match the model vocabulary");
  }
  for (std::size_t w = 0; w < embeddings.rows(); ++w) {
    auto row = embeddings.row(w);
    std::copy(row.begin(), row.end(),
              table.values().begin() +
                  static_cast<std::ptrdiff_t>((w + kNumSpecialIds) * dim));
  }
}

std::vector<float> stack_contexts(
    const std::vector<const std::vector<double>*>& rows, std::size_t dim,
    bool required) {
  std::vector<float> out;
  if (!required) return out;
  out.reserve(rows.size() * dim);
  for (const auto* v : rows) {
    if (v == nullptr) throw MissingContext();
    if (v->size() != dim) {
      throw DimMismatch("context vector has width " + std::to_string(v->size()) +
                        ", model expects " + std::to_string(dim));
    }
    auto unit = context_input(*v);
    out.insert(out.end(), unit.begin(), unit.end());
  }
  return out;
}

}  // namespace detail

}  // namespace ctxsum
