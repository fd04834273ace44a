#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "ctxsum/corpus.h"

namespace ctxsum {
namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

constexpr std::array<std::string_view, 30> kBlockTags = {
    "address", "article", "aside",   "blockquote", "br",    "dd",
    "div",     "dl",      "dt",      "fieldset",   "footer", "form",
    "h1",      "h2",      "h3",      "h4",         "h5",     "h6",
    "header",  "hr",      "li",      "main",       "nav",    "ol",
    "p",       "pre",     "section", "table",      "td",     "tr"};

bool is_block_tag(std::string_view name) {
  return name == "ul" || name == "th" ||
         std::find(kBlockTags.begin(), kBlockTags.end(), name) !=
             kBlockTags.end();
}

struct Entity {
  std::string_view name;
  std::string_view text;
};

constexpr std::array<Entity, 7> kEntities = {{{"&amp;", "&"},
                                              {"&lt;", "<"},
                                              {"&gt;", ">"},
                                              {"&quot;", "\""},
                                              {"&#39;", "'"},
                                              {"&apos;", "'"},
                                              {"&nbsp;", " "}}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string strip_html(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '<') {
      const std::size_t close = html.find('>', i + 1);
      if (close == std::string_view::npos) {
        out.append(html.substr(i));
        break;
      }
      std::string_view inner = html.substr(i + 1, close - i - 1);
      if (!inner.empty() && inner.front() == '/') inner.remove_prefix(1);
      std::string name;
      for (char ch : inner) {
        if (!std::isalnum(static_cast<unsigned char>(ch))) break;
        name.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      }
      if (name.empty()) {
        // Not a tag ("a < b"); keep the character.
        out.push_back(c);
        ++i;
        continue;
      }
      if (is_block_tag(name)) out.push_back('\n');
      i = close + 1;
      continue;
    }
    if (c == '&') {
      bool matched = false;
      for (const auto& e : kEntities) {
        if (html.substr(i, e.name.size()) == e.name) {
          out.append(e.text);
          i += e.name.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<Sentence> segment_sentences(std::string_view text,
                                        std::string_view doc_id) {
  const std::string clean = strip_html(text);
  std::vector<Sentence> sentences;

  auto emit = [&](std::size_t begin, std::size_t end) {
    std::string_view raw(clean.data() + begin, end - begin);
    std::string_view body = trim(raw);
    if (body.empty()) return;
    const std::size_t lead = static_cast<std::size_t>(body.data() - clean.data());
    Sentence s;
    s.doc_id = std::string(doc_id);
    s.index = sentences.size();
    s.text = std::string(body);
    s.tokens = tokenize(body);
    s.char_len = utf8_length(body);
    s.offset = utf8_length(std::string_view(clean.data(), lead));
    sentences.push_back(std::move(s));
  };

  std::size_t start = 0;
  std::size_t i = 0;
  const std::size_t n = clean.size();
  while (i < n) {
    const char c = clean[i];
    if (c == '\n' || c == '\r') {
      emit(start, i);
      start = ++i;
      continue;
    }
    if (is_terminator(c)) {
      if (c == '.' && i > 0 && i + 1 < n && is_digit(clean[i - 1]) &&
          is_digit(clean[i + 1])) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < n && is_terminator(clean[j])) ++j;
      emit(start, j);
      start = i = j;
      continue;
    }
    ++i;
  }
  emit(start, n);
  return sentences;
}

void derive_sentences(Document& doc) {
  doc.sentences = segment_sentences(doc.body, doc.id);
}

std::vector<std::string> document_tokens(const Document& doc) {
  std::vector<std::string> tokens = tokenize(doc.title);
  for (const Sentence& s : doc.sentences) {
    tokens.insert(tokens.end(), s.tokens.begin(), s.tokens.end());
  }
  return tokens;
}

}  // namespace ctxsum
