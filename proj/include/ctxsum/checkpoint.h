#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ctxsum/models.h"

namespace ctxsum {

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  bool operator==(const NamedTensor&) const = default;
};

// Binary container shared by every artifact file:
//   "CTXS" | u32 version | str kind | str config | u32 n | n x tensor | blobs
// where str is a u32 byte length followed by the bytes, config is sorted
// "key=value" lines, a tensor is str name | u32 rank | rank x u32 dim |
// float32 data, and blobs are u32 n | n x (str name | str bytes). All
// integers and floats are little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  ConfigMap config;
  std::vector<NamedTensor> tensors;
  std::map<std::string, std::string> blobs;

  const NamedTensor& tensor(const std::string& name) const;
  const std::string& blob(const std::string& name) const;

  bool operator==(const Checkpoint&) const = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
// Throws FormatError on a bad magic number, unknown version or truncation.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

std::string config_text(const ConfigMap& config);
ConfigMap parse_config_text(const std::string& text);

Checkpoint embedding_checkpoint(const EmbeddingMatrix& m, const SgnsConfig& config);
EmbeddingMatrix embedding_from_checkpoint(const Checkpoint& ckpt);

Checkpoint model_checkpoint(const ExtractiveModel& model);
Checkpoint model_checkpoint(const Seq2SeqModel& model);
// Kind "extractive" or "seq2seq".
ExtractiveModel extractive_from_checkpoint(const Checkpoint& ckpt);
Seq2SeqModel seq2seq_from_checkpoint(const Checkpoint& ckpt);

// Documents plus their vocabulary.
struct CorpusBundle {
  std::vector<Document> docs;
  Vocabulary vocab;
  std::int64_t min_count = 1;
};

Checkpoint corpus_checkpoint(const CorpusBundle& corpus);
CorpusBundle corpus_from_checkpoint(const Checkpoint& ckpt);

// Everything needed to rebuild document contexts: the corpus, the
// embeddings, the idf variant and betas. v_d of every document is stored as
// the tensor "context_vectors" for inspection.
struct ContextBundle {
  CorpusBundle corpus;
  EmbeddingMatrix embeddings;
  IdfVariant idf_variant = IdfVariant::kReciprocal;
  Betas betas;
};

Checkpoint context_checkpoint(const ContextBundle& bundle);
ContextBundle context_from_checkpoint(const Checkpoint& ckpt);

}  // namespace ctxsum
