#include "ctxsum/synth.h"

#include <algorithm>
#include <cstdio>
#include <random>

#include "ctxsum/error.h"
#include "ctxsum/rng.h"

namespace ctxsum {

namespace {

struct Category {
  const char* noun;
  std::vector<std::string> taxonomy;
};

struct Aspect {
  const char* head;
  const char* companions[4];
};

const std::vector<Category>& categories() {
  static const std::vector<Category> c = {
      {"backpack", {"bags", "outdoor bags", "backpacks"}},
      {"jacket", {"clothing", "outerwear", "jackets"}},
      {"lamp", {"home", "lighting", "lamps"}},
      {"headphones", {"electronics", "audio", "headphones"}},
      {"boots", {"shoes", "outdoor shoes", "boots"}},
      {"kettle", {"kitchen", "appliances", "kettles"}},
  };
  return c;
}

const std::vector<Aspect>& aspects() {
  static const std::vector<Aspect> a = {
      {"waterproof", {"rain", "sealed", "seams", "dry"}},
      {"lightweight", {"ounces", "carry", "light", "airy"}},
      {"leather", {"genuine", "stitched", "hide", "grain"}},
      {"wireless", {"bluetooth", "pairing", "antenna", "signal"}},
      {"rechargeable", {"battery", "charge", "usb", "cell"}},
      {"padded", {"cushion", "foam", "comfort", "soft"}},
      {"vintage", {"retro", "classic", "era", "antique"}},
      {"insulated", {"warm", "thermal", "cold", "winter"}},
      {"adjustable", {"strap", "fit", "buckle", "length"}},
      {"stainless", {"steel", "rust", "metal", "durable"}},
      {"compact", {"small", "fold", "pocket", "space"}},
      {"handmade", {"artisan", "crafted", "unique", "hand"}},
  };
  return a;
}

const std::vector<std::string>& boilerplate() {
  static const std::vector<std::string> b = {
      "Free shipping on every order.",
      "Returns accepted within 30 days.",
      "Please leave feedback once it arrives.",
      "Payment is expected within 3 days.",
      "Rate me 5 stars if you love it.",
      "Check out my other items for more deals.",
      "Combined shipping is available.",
      "Thanks for looking and have a great day.",
  };
  return b;
}

std::string aspect_sentence(const Aspect& a, const char* noun, Rng& rng) {
  std::uniform_int_distribution<int> tmpl(0, 3);
  std::vector<int> pick = {0, 1, 2, 3};
  std::shuffle(pick.begin(), pick.end(), rng);
  const std::string h = a.head, c1 = a.companions[pick[0]], c2 = a.companions[pick[1]];
  switch (tmpl(rng)) {
    case 0: return "The " + std::string(noun) + " is " + h + " with " + c1 + " " + c2 + ".";
    case 1: return "It is " + h + " and offers " + c1 + " and " + c2 + ".";
    case 2: return "Expect a " + h + " feel with " + c1 + " plus " + c2 + ".";
    default: return "A " + h + " build brings " + c1 + " and " + c2 + " together.";
  }
}

struct Slot {
  std::string text;
  int aspect = -1;  // -1 for boilerplate
  bool context_regime = false;
};

}  // namespace

SynthCorpus synth_corpus(const SynthOptions& options) {
  const double cd = options.context_dependence;
  if (!(cd >= 0.0 && cd <= 1.0)) throw BadProb("context_dependence must be in [0, 1]");
  Rng rng(options.seed);
  std::bernoulli_distribution coin(0.5), context_regime(cd);
  std::uniform_int_distribution<std::size_t> pick_cat(0, categories().size() - 1);
  const std::size_t n_aspects = std::min(options.aspects_per_doc, aspects().size());

  SynthCorpus out;
  for (std::size_t d = 0; d < options.n_docs; ++d) {
    const Category& cat = categories()[pick_cat(rng)];
    std::vector<int> all(aspects().size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<int> doc_aspects(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_aspects));

    std::vector<bool> selected(aspects().size(), false);
    for (int a : doc_aspects) selected[static_cast<std::size_t>(a)] = coin(rng);

    std::vector<Slot> slots;
    for (int a : doc_aspects) {
      Slot s;
      s.aspect = a;
      s.context_regime = context_regime(rng);
      s.text = aspect_sentence(aspects()[static_cast<std::size_t>(a)], cat.noun, rng);
      // Text regime: an aspect sentence is always a summary sentence, so its
      // aspect must reach the title and context channels.
      if (!s.context_regime) selected[static_cast<std::size_t>(a)] = true;
      slots.push_back(std::move(s));
    }
    for (std::size_t b = 0; b < options.max_boilerplate; ++b) {
      // Boilerplate is labelled by its text, so it only appears in the text
      // regime.
      if (context_regime(rng)) continue;
      std::uniform_int_distribution<std::size_t> pick_b(0, boilerplate().size() - 1);
      slots.push_back({boilerplate()[pick_b(rng)], -1, false});
    }
    bool any = false;
    for (int a : doc_aspects) any = any || selected[static_cast<std::size_t>(a)];
    if (!any && !doc_aspects.empty()) {
      std::uniform_int_distribution<std::size_t> pick_a(0, doc_aspects.size() - 1);
      selected[static_cast<std::size_t>(doc_aspects[pick_a(rng)])] = true;
    }
    std::shuffle(slots.begin(), slots.end(), rng);

    char id[32];
    std::snprintf(id, sizeof id, "synth-%06zu", d);
    Document doc;
    doc.id = id;
    doc.taxonomy_path = cat.taxonomy;
    std::string title;
    std::uniform_int_distribution<int> query_count(1, 3);
    for (std::size_t a = 0; a < aspects().size(); ++a) {
      if (!selected[a]) continue;
      const std::string head = aspects()[a].head;
      title += head + " ";
      doc.metadata[head] += 1;
      doc.queries[head] += query_count(rng);
      doc.browse_titles[head] += 1;
    }
    title += cat.noun;
    doc.title = title;
    doc.metadata[cat.noun] += 1;
    doc.queries[cat.noun] += 2;
    doc.browse_titles[cat.noun] += 1;

    GoldSummary gold;
    gold.doc_id = doc.id;
    gold.reference = title;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (i > 0) doc.body += " ";
      doc.body += slots[i].text;
      const int label = slots[i].aspect >= 0 &&
                        selected[static_cast<std::size_t>(slots[i].aspect)];
      gold.labels.push_back(label);
      if (label) gold.summary.push_back(i);
    }
    derive_sentences(doc);
    if (doc.sentences.size() != slots.size()) {
      throw Error("synthetic body segmented into an unexpected sentence count");
    }
    out.docs.push_back(std::move(doc));
    out.gold.push_back(std::move(gold));
  }
  return out;
}

}  // namespace ctxsum
