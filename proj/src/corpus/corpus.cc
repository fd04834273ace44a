#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "ctxsum/corpus.h"
#include "ctxsum/error.h"
#include "json.hpp"
#include "word_lists.h"

namespace ctxsum {

using json = nlohmann::json;

Vocabulary::Vocabulary(std::vector<std::string> words,
                       std::vector<std::int64_t> counts, WordSet stopwords)
    : words_(std::move(words)),
      counts_(std::move(counts)),
      stopwords_(std::move(stopwords)) {
  if (words_.size() != counts_.size()) {
    throw ShapeMismatch("vocabulary words/counts length mismatch");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw DuplicateId("duplicate vocabulary word: " + words_[i]);
    }
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id(std::string_view word) const {
  auto found = find(word);
  if (!found) throw UnknownWord("unknown word: " + std::string(word));
  return *found;
}

bool Vocabulary::is_stopword(std::string_view word) const {
  return stopwords_.count(std::string(word)) > 0;
}

Vocabulary build_vocabulary(std::span<const Document> docs,
                            const WordSet& stopwords, std::int64_t min_count) {
  if (docs.empty()) throw EmptyCorpus("no documents");
  std::map<std::string, std::int64_t> counts;
  for (const Document& doc : docs) {
    for (const std::string& tok : document_tokens(doc)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [word, count] : counts) {
    if (count < min_count || stopwords.count(word)) continue;
    kept.emplace_back(word, count);
  }
  if (kept.empty()) throw AllWordsFiltered();
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::int64_t> freq;
  words.reserve(kept.size());
  freq.reserve(kept.size());
  for (auto& [w, c] : kept) {
    words.push_back(w);
    freq.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(freq), stopwords);
}

std::string to_string(IdfVariant variant) {
  return variant == IdfVariant::kLog ? "log" : "reciprocal";
}

IdfVariant parse_idf_variant(std::string_view name) {
  if (name == "reciprocal") return IdfVariant::kReciprocal;
  if (name == "log") return IdfVariant::kLog;
  throw FormatError("unknown idf variant: " + std::string(name));
}

IdfTable::IdfTable(IdfVariant variant, std::size_t num_docs,
                   std::vector<std::int64_t> df, const Vocabulary& vocab)
    : variant_(variant), num_docs_(num_docs), df_(std::move(df)) {
  if (df_.size() != vocab.size()) {
    throw ShapeMismatch("idf table does not cover the vocabulary");
  }
  idf_.resize(df_.size());
  for (std::size_t i = 0; i < df_.size(); ++i) {
    const double d = static_cast<double>(std::max<std::int64_t>(df_[i], 1));
    idf_[i] = variant == IdfVariant::kReciprocal
                  ? 1.0 / d
                  : std::log(static_cast<double>(num_docs_) / d);
  }
  index_.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    index_.emplace(vocab.word(static_cast<WordId>(i)), static_cast<WordId>(i));
  }
}

double IdfTable::idf(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) {
    throw UnknownWord("word outside idf table: " + std::string(word));
  }
  return idf_[it->second];
}

IdfTable IdfTable::scaled(double factor) const {
  IdfTable out = *this;
  for (double& v : out.idf_) v *= factor;
  return out;
}

IdfTable compute_idf(std::span<const Document> docs, const Vocabulary& vocab,
                     IdfVariant variant) {
  if (docs.empty()) throw EmptyCorpus("no documents");
  std::vector<std::int64_t> df(vocab.size(), 0);
  std::vector<char> seen(vocab.size(), 0);
  std::vector<WordId> touched;
  for (const Document& doc : docs) {
    touched.clear();
    for (const std::string& tok : document_tokens(doc)) {
      auto id = vocab.find(tok);
      if (!id || seen[*id]) continue;
      seen[*id] = 1;
      touched.push_back(*id);
    }
    for (WordId id : touched) {
      ++df[id];
      seen[id] = 0;
    }
  }
  return IdfTable(variant, docs.size(), std::move(df), vocab);
}

namespace {

WordCounts parse_counts(const json& j, const char* field, std::size_t line_no,
                        std::string_view line) {
  WordCounts out;
  if (!j.contains(field) || j[field].is_null()) return out;
  const json& obj = j[field];
  if (!obj.is_object()) {
    throw ParseError(line_no, std::string(line),
                     std::string(field) + " must be an object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_number_integer() || it.value().get<std::int64_t>() < 0) {
      throw ParseError(line_no, std::string(line),
                       std::string(field) + " counts must be nonneg integers");
    }
    out[it.key()] += it.value().get<std::int64_t>();
  }
  return out;
}

std::string required_string(const json& j, const char* field,
                            std::size_t line_no, std::string_view line) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw ParseError(line_no, std::string(line),
                     std::string("missing string field \"") + field + "\"");
  }
  return j[field].get<std::string>();
}

json counts_to_json(const WordCounts& counts) {
  json out = json::object();
  for (const auto& [w, c] : counts) out[w] = c;
  return out;
}

}  // namespace

Document parse_document(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string(line), e.what());
  }
  if (!j.is_object()) {
    throw ParseError(line_no, std::string(line), "record is not an object");
  }
  Document doc;
  doc.id = required_string(j, "id", line_no, line);
  doc.title = required_string(j, "title", line_no, line);
  doc.body = required_string(j, "body", line_no, line);
  doc.metadata = parse_counts(j, "metadata", line_no, line);
  doc.queries = parse_counts(j, "queries", line_no, line);
  doc.browse_titles = parse_counts(j, "browse_titles", line_no, line);
  if (j.contains("taxonomy_path") && !j["taxonomy_path"].is_null()) {
    const json& path = j["taxonomy_path"];
    if (!path.is_array()) {
      throw ParseError(line_no, std::string(line),
                       "taxonomy_path must be a list");
    }
    for (const json& taxon : path) {
      if (!taxon.is_string()) {
        throw ParseError(line_no, std::string(line),
                         "taxonomy_path entries must be strings");
      }
      doc.taxonomy_path.push_back(taxon.get<std::string>());
    }
  }
  derive_sentences(doc);
  return doc;
}

std::string document_to_json(const Document& doc) {
  json j;
  j["id"] = doc.id;
  j["title"] = doc.title;
  j["body"] = doc.body;
  j["metadata"] = counts_to_json(doc.metadata);
  j["queries"] = counts_to_json(doc.queries);
  j["browse_titles"] = counts_to_json(doc.browse_titles);
  j["taxonomy_path"] = doc.taxonomy_path;
  return j.dump();
}

std::vector<Document> ingest(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Document doc = parse_document(line, line_no);
    if (!ids.insert(doc.id).second) {
      throw DuplicateId("duplicate document id \"" + doc.id + "\" at line " +
                        std::to_string(line_no));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return ingest(in);
}

WordSet load_word_list(std::istream& in) {
  WordSet out;
  std::string line;
  while (std::getline(in, line)) {
    std::string entry;
    for (char c : line) {
      entry.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    const auto b = entry.find_first_not_of(" \t\r");
    if (b == std::string::npos || entry[b] == '#') continue;
    const auto e = entry.find_last_not_of(" \t\r");
    out.insert(entry.substr(b, e - b + 1));
  }
  return out;
}

WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return load_word_list(in);
}

const WordSet& default_stopwords() {
  static const WordSet words = [] {
    std::istringstream in{std::string(kStopwordsText)};
    return load_word_list(in);
  }();
  return words;
}

const WordSet& default_blacklist() {
  static const WordSet words = [] {
    std::istringstream in{std::string(kBlacklistText)};
    return load_word_list(in);
  }();
  return words;
}

}  // namespace ctxsum
