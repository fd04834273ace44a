#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "ctxsum/corpus.h"
#include "ctxsum/error.h"
#include "ctxsum/synth.h"

using namespace ctxsum;

namespace {

Document doc_with(const std::string& id, const std::string& title, const std::string& body) {
  Document d;
  d.id = id;
  d.title = title;
  d.body = body;
  derive_sentences(d);
  return d;
}

// Reference segmenter: strip tags by hand, then cut after every terminator
// run that is not a decimal point.
std::vector<std::string> reference_segments(const std::string& html) {
  std::string text;
  for (std::size_t i = 0; i < html.size();) {
    if (html[i] == '<') {
      auto close = html.find('>', i);
      std::string tag = html.substr(i + 1, close - i - 1);
      std::string name;
      for (char c : tag) {
        if (c == '/' && name.empty()) continue;
        if (!std::isalnum(static_cast<unsigned char>(c))) break;
        name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      static const std::set<std::string> block = {"p", "br", "div", "li", "ul", "ol",
                                                  "h1", "h2", "h3", "tr", "td", "table"};
      if (block.count(name)) text += '\n';
      i = close + 1;
    } else {
      text += html[i++];
    }
  }
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto b = cur.find_first_not_of(" \t\n");
    if (b != std::string::npos) {
      auto e = cur.find_last_not_of(" \t\n");
      out.push_back(cur.substr(b, e - b + 1));
    }
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      flush();
      continue;
    }
    cur += c;
    bool term = c == '!' || c == '?' ||
                (c == '.' && !(i > 0 && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                               std::isdigit(static_cast<unsigned char>(text[i + 1]))));
    if (term) {
      while (i + 1 < text.size() && (text[i + 1] == '.' || text[i + 1] == '!' || text[i + 1] == '?')) {
        cur += text[++i];
      }
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Camo Sling-Backpack") == std::vector<std::string>{"camo", "sling", "backpack"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("5-star!!") == std::vector<std::string>{"5", "star"});
  CHECK(tokenize("Café au lait") == std::vector<std::string>{"café", "au", "lait"});
}

TEST_CASE("tokenize is idempotent") {
  for (std::string t : {"Hello, World! 3.5in", "a--b  c", "ÜBER cool-Thing_99", ""}) {
    auto once = tokenize(t);
    std::string joined;
    for (const auto& w : once) joined += w + " ";
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("utf8_length counts code points") {
  CHECK(utf8_length("") == 0);
  CHECK(utf8_length("abc") == 3);
  CHECK(utf8_length("café") == 4);
  CHECK(utf8_length("日本") == 2);
}

TEST_CASE("segment_sentences basic rules") {
  CHECK(segment_sentences("").empty());
  auto s = segment_sentences("A b. C d!");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "A b.");
  CHECK(s[1].text == "C d!");
  CHECK(s[0].index == 0);
  CHECK(s[1].index == 1);
  auto br = segment_sentences(strip_html("x<br>y"));
  REQUIRE(br.size() == 2);
  CHECK(br[0].text == "x");
  CHECK(br[1].text == "y");
  auto dec = segment_sentences("It weighs 3.5 kg. Nice!");
  REQUIRE(dec.size() == 2);
  CHECK(dec[0].text == "It weighs 3.5 kg.");
}

TEST_CASE("segment_sentences matches a reference segmenter on a fixture") {
  const std::vector<std::string> fixture = {
      "One. Two. Three.",
      "Wow!! Really?? Yes.",
      "<p>First para</p><p>Second para</p>",
      "Line one\nLine two",
      "Price 3.50 only. Buy now",
      "<div>Block</div>inline <b>bold</b> text.",
      "No terminator at all",
      "Trailing dots... next one",
      "<ul><li>a</li><li>b</li></ul>",
      "Mixed!? ending",
      "<br><br>",
      "  spaced   out .  ",
      "Version 2.0.1 is out. Update.",
      "Q? A.",
      "<h1>Title</h1>Body text here.",
      "<table><tr><td>x</td><td>y</td></tr></table>",
      "ends with newline\n",
      "a.b.c",
      "1.5 and 2.5. Done",
      "!!!",
  };
  for (const auto& text : fixture) {
    auto got = segment_sentences(strip_html(text));
    auto want = reference_segments(text);
    std::vector<std::string> got_text;
    for (const auto& s : got) got_text.push_back(s.text);
    INFO(text);
    CHECK(got_text == want);
  }
}

TEST_CASE("sentence char_len is text length in code points") {
  auto s = segment_sentences("Très bien. Ok.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].char_len == utf8_length(s[0].text));
  CHECK(s[0].char_len == 10);
}

TEST_CASE("ingest") {
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK(ingest(in).empty());
  }
  SUBCASE("one record") {
    std::istringstream in(
        R"({"id":"d1","title":"Red Bag","body":"Nice bag. Very red!","metadata":{"brand":2},"queries":{"red bag":3},"taxonomy_path":["bags","totes"]})"
        "\n");
    auto docs = ingest(in);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].id == "d1");
    CHECK(docs[0].sentences.size() == 2);
    CHECK(docs[0].metadata.at("brand") == 2);
    CHECK(docs[0].queries.at("red bag") == 3);
    CHECK(docs[0].browse_titles.empty());
    CHECK(docs[0].taxonomy_path.size() == 2);
  }
  SUBCASE("missing body is a parse error with the line number") {
    std::istringstream in("{\"id\":\"a\",\"title\":\"t\",\"body\":\"x.\"}\n{\"id\":\"b\",\"title\":\"t\"}\n");
    try {
      ingest(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line_no() == 2);
    }
  }
  SUBCASE("duplicate id") {
    std::istringstream in("{\"id\":\"a\",\"title\":\"t\",\"body\":\"x.\"}\n{\"id\":\"a\",\"title\":\"u\",\"body\":\"y.\"}\n");
    CHECK_THROWS_AS(ingest(in), DuplicateId);
  }
  SUBCASE("document_to_json round trips") {
    Document d = doc_with("z", "Title", "Body one. Body two.");
    d.metadata = {{"color", 1}};
    std::istringstream in(document_to_json(d) + "\n");
    auto back = ingest(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].title == d.title);
    CHECK(back[0].body == d.body);
    CHECK(back[0].metadata == d.metadata);
    CHECK(back[0].sentences.size() == 2);
  }
}

TEST_CASE("build_vocabulary") {
  std::vector<Document> docs = {doc_with("1", "", "the cat cat")};
  auto v = build_vocabulary(docs, {"the"}, 1);
  CHECK(v.words() == std::vector<std::string>{"cat"});
  CHECK(v.size() == 1);
  CHECK_THROWS_AS(build_vocabulary(docs, {"the"}, 3), AllWordsFiltered);

  std::vector<Document> two = {doc_with("1", "b a", "c b."), doc_with("2", "", "a b d.")};
  auto w = build_vocabulary(two, {}, 1);
  // b:3, a:2, c:1, d:1
  CHECK(w.words() == std::vector<std::string>{"b", "a", "c", "d"});
  CHECK(w.count(*w.find("a")) == 2);
  CHECK_THROWS_AS(w.id("zzz"), UnknownWord);
}

TEST_CASE("vocabulary size matches an independent distinct counter") {
  SynthOptions o;
  o.n_docs = 100;
  auto sc = synth_corpus(o);
  const auto& sw = default_stopwords();
  auto v = build_vocabulary(sc.docs, sw, 1);
  std::set<std::string> distinct;
  for (const auto& d : sc.docs) {
    for (const auto& t : tokenize(d.title)) {
      if (!sw.count(t)) distinct.insert(t);
    }
    for (const auto& s : d.sentences) {
      for (const auto& t : tokenize(s.text)) {
        if (!sw.count(t)) distinct.insert(t);
      }
    }
  }
  CHECK(v.size() == distinct.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(*v.find(v.word(static_cast<WordId>(i))) == i);
}

TEST_CASE("compute_idf") {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(doc_with(std::to_string(i), "", "common word."));
  auto v = build_vocabulary(docs, {}, 1);
  CHECK(compute_idf(docs, v, IdfVariant::kReciprocal).idf("common") == doctest::Approx(0.1));
  CHECK(compute_idf(docs, v, IdfVariant::kLog).idf("common") == doctest::Approx(0.0));

  std::vector<Document> twelve;
  for (int i = 0; i < 12; ++i) {
    twelve.push_back(doc_with(std::to_string(i), "", i < 3 ? "rare base." : "base."));
  }
  auto v12 = build_vocabulary(twelve, {}, 1);
  auto idf = compute_idf(twelve, v12, IdfVariant::kLog);
  int brute_df = 0;
  for (const auto& d : twelve) {
    auto toks = document_tokens(d);
    brute_df += std::find(toks.begin(), toks.end(), "rare") != toks.end();
  }
  CHECK(brute_df == 3);
  CHECK(idf.df(*v12.find("rare")) == 3);
  CHECK(idf.idf("rare") == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(idf.idf("base") <= idf.idf("rare"));
  CHECK_THROWS_AS(idf.idf("missing"), UnknownWord);
}

TEST_CASE("df bounds and log idf monotonicity on a synthetic corpus") {
  SynthOptions o;
  o.n_docs = 60;
  auto sc = synth_corpus(o);
  auto v = build_vocabulary(sc.docs, default_stopwords(), 1);
  auto idf = compute_idf(sc.docs, v, IdfVariant::kLog);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto df = idf.df(static_cast<WordId>(i));
    CHECK(df >= 1);
    CHECK(df <= static_cast<std::int64_t>(sc.docs.size()));
    total += df;
    CHECK(idf.idf(static_cast<WordId>(i)) >= 0.0);
  }
  CHECK(total <= static_cast<std::int64_t>(v.size() * sc.docs.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (idf.df(static_cast<WordId>(i)) < idf.df(static_cast<WordId>(j))) {
        CHECK(idf.idf(static_cast<WordId>(i)) > idf.idf(static_cast<WordId>(j)));
      }
    }
  }
}

TEST_CASE("word lists") {
  std::istringstream in("# comment\n  Free Shipping \n\nreturns\n");
  auto w = load_word_list(in);
  CHECK(w == WordSet{"free shipping", "returns"});
  CHECK(default_stopwords().count("the"));
  CHECK(!default_blacklist().empty());
}
