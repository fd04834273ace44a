#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctxsum {

using WordId = std::uint32_t;
using WordCounts = std::map<std::string, std::int64_t>;
using WordSet = std::set<std::string>;

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  std::vector<std::string> tokens;
  std::size_t char_len = 0;  // code points, not bytes
  std::size_t offset = 0;    // code-point offset into the tag-stripped body
};

struct Document {
  std::string id;
  std::string title;
  WordCounts metadata;
  std::vector<std::string> taxonomy_path;  // root -> leaf
  std::string body;
  WordCounts queries;
  WordCounts browse_titles;
  std::vector<Sentence> sentences;  // derived from body
};

// Number of UTF-8 code points in `text`.
std::size_t utf8_length(std::string_view text);

// Removes HTML tags and decodes the common named entities. Block-level tags
// (p, br, div, li, headings, table cells, ...) become newlines so that they
// act as sentence boundaries; inline tags vanish.
std::string strip_html(std::string_view html);

// Lowercases ASCII and splits on anything that is not a letter or digit.
// Bytes >= 0x80 are treated as word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

// Splits on '.', '!', '?', newlines and block tags (after tag stripping).
// Runs of terminators stay with the sentence they close; a '.' between two
// digits is not a boundary. Returned sentences are whitespace-trimmed and
// never empty.
std::vector<Sentence> segment_sentences(std::string_view text,
                                        std::string_view doc_id = {});

// Fills doc.sentences from doc.body.
void derive_sentences(Document& doc);

// Tokens that feed corpus statistics: title followed by every sentence.
std::vector<std::string> document_tokens(const Document& doc);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words,
             std::vector<std::int64_t> counts, WordSet stopwords);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(WordId id) const { return words_.at(id); }
  std::optional<WordId> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  WordId id(std::string_view word) const;  // throws UnknownWord
  std::int64_t count(WordId id) const { return counts_.at(id); }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const WordSet& stopwords() const { return stopwords_; }
  bool is_stopword(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
  WordSet stopwords_;
};

// Words sorted by (count desc, word asc); stopwords and words rarer than
// min_count are dropped. Throws AllWordsFiltered when nothing survives.
Vocabulary build_vocabulary(std::span<const Document> docs,
                            const WordSet& stopwords, std::int64_t min_count);

enum class IdfVariant { kReciprocal, kLog };

std::string to_string(IdfVariant variant);
IdfVariant parse_idf_variant(std::string_view name);

class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(IdfVariant variant, std::size_t num_docs,
           std::vector<std::int64_t> df, const Vocabulary& vocab);

  IdfVariant variant() const { return variant_; }
  std::size_t num_docs() const { return num_docs_; }
  std::int64_t df(WordId id) const { return df_.at(id); }
  double idf(WordId id) const { return idf_.at(id); }
  double idf(std::string_view word) const;  // throws UnknownWord
  const std::vector<double>& values() const { return idf_; }
  IdfTable scaled(double factor) const;

 private:
  IdfVariant variant_ = IdfVariant::kReciprocal;
  std::size_t num_docs_ = 0;
  std::vector<std::int64_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, WordId> index_;
};

// Document frequency over document_tokens().
IdfTable compute_idf(std::span<const Document> docs, const Vocabulary& vocab,
                     IdfVariant variant);

// One record per line (see README for fields). Throws ParseError carrying the
// 1-based line number, or DuplicateId.
std::vector<Document> ingest(std::istream& in);
std::vector<Document> ingest(const std::string& path);

Document parse_document(std::string_view line, std::size_t line_no = 0);
std::string document_to_json(const Document& doc);

// One word or phrase per line; blank lines and '#' comments skipped;
// entries are lowercased and trimmed.
WordSet load_word_list(const std::string& path);
WordSet load_word_list(std::istream& in);

// The shipped data/stopwords.txt and data/blacklist.txt, compiled in.
const WordSet& default_stopwords();
const WordSet& default_blacklist();

}  // namespace ctxsum
