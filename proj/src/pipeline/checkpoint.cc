#include "ctxsum/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ctxsum/error.h"

namespace ctxsum {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'C', 'T', 'X', 'S'};

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw FormatError("truncated checkpoint");
  return v;
}

std::string get_str(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw FormatError("truncated checkpoint");
  return s;
}

template <typename T>
NamedTensor from_tensor(const std::string& name, const nn::Tensor<T>& t) {
  NamedTensor nt;
  nt.name = name;
  for (auto d : t.shape()) nt.shape.push_back(static_cast<std::uint32_t>(d));
  nt.data.assign(t.values().begin(), t.values().end());
  return nt;
}

void load_params(nn::ParameterSet<float>& params, const Checkpoint& ckpt) {
  for (auto& [name, t] : params.items()) {
    const NamedTensor& nt = ckpt.tensor(name);
    if (nt.data.size() != t.size()) {
      throw FormatError("tensor " + name + " has the wrong size");
    }
    std::copy(nt.data.begin(), nt.data.end(), t.values().begin());
  }
}

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

void put_vocab(Checkpoint& c, const std::vector<std::string>& words,
               const WordSet& stopwords) {
  c.blobs["vocab"] = join_lines(words);
  c.blobs["stopwords"] = join_lines({stopwords.begin(), stopwords.end()});
}

ModelVocab get_model_vocab(const Checkpoint& c) {
  auto sw = split_lines(c.blob("stopwords"));
  return ModelVocab(split_lines(c.blob("vocab")), WordSet(sw.begin(), sw.end()));
}

void expect_kind(const Checkpoint& c, const std::string& kind) {
  if (c.kind != kind) {
    throw FormatError("expected a " + kind + " checkpoint, found " + c.kind);
  }
}

}  // namespace

const NamedTensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw FormatError("checkpoint has no tensor " + name);
}

const std::string& Checkpoint::blob(const std::string& name) const {
  auto it = blobs.find(name);
  if (it == blobs.end()) throw FormatError("checkpoint has no section " + name);
  return it->second;
}

std::string config_text(const ConfigMap& config) {
  std::string out;
  for (const auto& [k, v] : config) out += k + "=" + v + "\n";
  return out;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  for (const auto& line : split_lines(text)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("bad config line: " + line);
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic, 4);
  put_u32(out, Checkpoint::kVersion);
  put_str(out, ckpt.kind);
  put_str(out, config_text(ckpt.config));
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    put_str(out, t.name);
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    std::size_t n = 1;
    for (auto d : t.shape) {
      put_u32(out, d);
      n *= d;
    }
    if (n != t.data.size()) throw FormatError("tensor " + t.name + ": shape and data differ");
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  put_u32(out, static_cast<std::uint32_t>(ckpt.blobs.size()));
  for (const auto& [name, bytes] : ckpt.blobs) {
    put_str(out, name);
    put_str(out, bytes);
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_checkpoint(out, ckpt);
  if (!out) throw Error("failed writing " + path);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != Checkpoint::kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.kind = get_str(in);
  c.config = parse_config_text(get_str(in));
  const std::uint32_t n = get_u32(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = get_str(in);
    const std::uint32_t rank = get_u32(in);
    std::size_t count = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.shape.push_back(get_u32(in));
      count *= t.shape.back();
    }
    t.data.resize(count);
    if (count > 0 && !in.read(reinterpret_cast<char*>(t.data.data()),
                              static_cast<std::streamsize>(count * sizeof(float)))) {
      throw FormatError("truncated checkpoint");
    }
    c.tensors.push_back(std::move(t));
  }
  const std::uint32_t nb = get_u32(in);
  for (std::uint32_t i = 0; i < nb; ++i) {
    std::string name = get_str(in);
    c.blobs[name] = get_str(in);
  }
  return c;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_checkpoint(in);
}

Checkpoint embedding_checkpoint(const EmbeddingMatrix& m, const SgnsConfig& config) {
  Checkpoint c;
  c.kind = "sgns";
  c.config = {{"dim", std::to_string(config.dim)},
              {"window", std::to_string(config.window)},
              {"negatives", std::to_string(config.negatives)},
              {"epochs", std::to_string(config.epochs)},
              {"seed", std::to_string(config.seed)}};
  const auto rows = static_cast<std::uint32_t>(m.rows());
  const auto dim = static_cast<std::uint32_t>(m.dim());
  c.tensors.push_back({"input", {rows, dim}, m.input()});
  c.tensors.push_back({"output", {rows, dim}, m.output()});
  return c;
}

EmbeddingMatrix embedding_from_checkpoint(const Checkpoint& ckpt) {
  const NamedTensor& in = ckpt.tensor("input");
  if (in.shape.size() != 2) throw FormatError("embedding tensor must be 2-D");
  EmbeddingMatrix m(in.shape[0], in.shape[1]);
  m.input() = in.data;
  m.output() = ckpt.tensor("output").data;
  if (m.output().size() != m.input().size()) throw FormatError("embedding halves differ");
  return m;
}

Checkpoint model_checkpoint(const ExtractiveModel& model) {
  Checkpoint c;
  c.kind = "extractive";
  c.config = model.config().to_map();
  for (const auto& [name, t] : model.net.params().items()) {
    c.tensors.push_back(from_tensor(name, t));
  }
  put_vocab(c, model.vocab.words(), model.vocab.stopwords());
  return c;
}

Checkpoint model_checkpoint(const Seq2SeqModel& model) {
  Checkpoint c;
  c.kind = "seq2seq";
  c.config = model.config().to_map();
  for (const auto& [name, t] : model.net.params().items()) {
    c.tensors.push_back(from_tensor(name, t));
  }
  put_vocab(c, model.vocab.words(), model.vocab.stopwords());
  return c;
}

ExtractiveModel extractive_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "extractive");
  ExtractiveModel m(ExtractiveModelConfig::from_map(ckpt.config), get_model_vocab(ckpt));
  load_params(m.net.params(), ckpt);
  return m;
}

Seq2SeqModel seq2seq_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "seq2seq");
  Seq2SeqModel m(Seq2SeqConfig::from_map(ckpt.config), get_model_vocab(ckpt));
  load_params(m.net.params(), ckpt);
  return m;
}

namespace {

void put_corpus(Checkpoint& c, const CorpusBundle& corpus) {
  std::string docs;
  for (const auto& d : corpus.docs) docs += document_to_json(d) + "\n";
  c.blobs["documents"] = docs;
  put_vocab(c, corpus.vocab.words(), corpus.vocab.stopwords());
  std::string counts;
  for (auto n : corpus.vocab.counts()) counts += std::to_string(n) + "\n";
  c.blobs["counts"] = counts;
  c.config["min_count"] = std::to_string(corpus.min_count);
  c.config["documents"] = std::to_string(corpus.docs.size());
}

CorpusBundle get_corpus(const Checkpoint& c) {
  CorpusBundle b;
  std::istringstream in(c.blob("documents"));
  b.docs = ingest(in);
  auto words = split_lines(c.blob("vocab"));
  std::vector<std::int64_t> counts;
  for (const auto& line : split_lines(c.blob("counts"))) counts.push_back(std::stoll(line));
  auto sw = split_lines(c.blob("stopwords"));
  b.vocab = Vocabulary(std::move(words), std::move(counts), WordSet(sw.begin(), sw.end()));
  auto it = c.config.find("min_count");
  b.min_count = it == c.config.end() ? 1 : std::stoll(it->second);
  return b;
}

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

}  // namespace

Checkpoint corpus_checkpoint(const CorpusBundle& corpus) {
  Checkpoint c;
  c.kind = "corpus";
  put_corpus(c, corpus);
  return c;
}

CorpusBundle corpus_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "corpus");
  return get_corpus(ckpt);
}

Checkpoint context_checkpoint(const ContextBundle& bundle) {
  Checkpoint c;
  c.kind = "context";
  put_corpus(c, bundle.corpus);
  c.config["idf"] = to_string(bundle.idf_variant);
  c.config["beta_seller"] = fmt(bundle.betas.seller);
  c.config["beta_query"] = fmt(bundle.betas.query);
  c.config["beta_browse"] = fmt(bundle.betas.browse);
  const auto rows = static_cast<std::uint32_t>(bundle.embeddings.rows());
  const auto dim = static_cast<std::uint32_t>(bundle.embeddings.dim());
  c.tensors.push_back({"embedding", {rows, dim}, bundle.embeddings.input()});

  IdfTable idf = compute_idf(bundle.corpus.docs, bundle.corpus.vocab, bundle.idf_variant);
  ContextBuilder builder(bundle.corpus.vocab, idf, bundle.embeddings, bundle.betas);
  NamedTensor v{"context_vectors",
                {static_cast<std::uint32_t>(bundle.corpus.docs.size()), dim}, {}};
  for (const auto& doc : bundle.corpus.docs) {
    auto ctx = builder.build(doc);
    for (double x : ctx.vector.v) v.data.push_back(static_cast<float>(x));
  }
  c.tensors.push_back(std::move(v));
  return c;
}

ContextBundle context_from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "context");
  ContextBundle b;
  b.corpus = get_corpus(ckpt);
  b.idf_variant = parse_idf_variant(ckpt.config.at("idf"));
  b.betas.seller = std::stod(ckpt.config.at("beta_seller"));
  b.betas.query = std::stod(ckpt.config.at("beta_query"));
  b.betas.browse = std::stod(ckpt.config.at("beta_browse"));
  const NamedTensor& e = ckpt.tensor("embedding");
  if (e.shape.size() != 2) throw FormatError("embedding tensor must be 2-D");
  b.embeddings = EmbeddingMatrix(e.shape[0], e.shape[1]);
  b.embeddings.input() = e.data;
  return b;
}

}  // namespace ctxsum
