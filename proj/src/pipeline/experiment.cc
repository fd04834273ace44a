#include "ctxsum/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "ctxsum/baselines.h"
#include "ctxsum/error.h"

namespace ctxsum {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kModels = {
    "fuzzy", "nb", "svm", "lsa", "lexrank", "textrank",
    "e-rnn", "ec-rnn", "cnn-rnn", "a-rnn", "ac-rnn"};

constexpr const char* kNoSetting = "-";
constexpr const char* kTitleTarget = "title";

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string fmt_real(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

std::vector<std::string> sentence_tokens(const Document& doc,
                                         std::span<const std::size_t> idx) {
  std::vector<std::string> out;
  for (std::size_t i : idx) {
    if (i >= doc.sentences.size()) {
      throw FormatError("sentence index " + std::to_string(i) + " out of range in " + doc.id);
    }
    const auto& t = doc.sentences[i].tokens;
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

std::string sentence_text(const Document& doc, std::span<const std::size_t> idx) {
  std::string out;
  for (std::size_t i : idx) {
    if (!out.empty()) out += " ";
    out += doc.sentences[i].text;
  }
  return out;
}

}  // namespace

// ---- evaluation ----

EvalReport evaluate(const std::vector<PredRecord>& preds,
                    const std::vector<GoldSummary>& gold,
                    std::span<const Document> docs, const Vocabulary& vocab,
                    const IdfTable& idf) {
  std::unordered_map<std::string, const GoldSummary*> gold_by_id;
  for (const auto& g : gold) gold_by_id[g.doc_id] = &g;
  std::unordered_map<std::string, const Document*> doc_by_id;
  for (const auto& d : docs) doc_by_id[d.id] = &d;

  struct SimAcc {
    SimilarityRow row;
  };
  struct RankAcc {
    RankingRow row;
    std::set<std::string> seen;
  };
  struct ClsAcc {
    std::string model, setting;
    std::vector<int> pred, label;
    std::set<std::string> seen;
  };
  std::vector<SimAcc> sims;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> sim_index;
  std::vector<RankAcc> ranks;
  std::map<std::pair<std::string, std::string>, std::size_t> rank_index;
  std::vector<ClsAcc> clss;
  std::map<std::pair<std::string, std::string>, std::size_t> cls_index;
  std::unordered_map<std::string, WordSet> topics;

  for (const auto& p : preds) {
    auto git = gold_by_id.find(p.doc_id);
    auto dit = doc_by_id.find(p.doc_id);
    if (git == gold_by_id.end() || dit == doc_by_id.end()) {
      throw FormatError("no gold summary or document for " + p.doc_id);
    }
    const GoldSummary& g = *git->second;
    const Document& doc = *dit->second;
    if (g.labels.size() != doc.sentences.size()) {
      throw FormatError("gold labels do not match the sentences of " + doc.id);
    }

    auto tkey = std::make_tuple(p.model, p.setting, p.target);
    auto [sit, sfresh] = sim_index.emplace(tkey, sims.size());
    if (sfresh) {
      SimAcc a;
      a.row.model = p.model;
      a.row.setting = p.setting;
      a.row.target = p.target;
      sims.push_back(a);
    }
    SimilarityRow& row = sims[sit->second].row;

    std::vector<std::string> cand, ref;
    if (p.kind == SummaryKind::kAbstractive) {
      cand = tokenize(p.text);
      ref = tokenize(g.reference);
    } else {
      cand = sentence_tokens(doc, p.sentences);
      ref = sentence_tokens(doc, g.summary);
    }
    auto tit = topics.find(doc.id);
    if (tit == topics.end()) {
      tit = topics.emplace(doc.id, topic_words(body_tokens(doc), idf, vocab)).first;
    }
    row.docs += 1;
    row.token_sim += token_similarity(cand, ref, idf);
    row.rouge1 += rouge_n(cand, ref, 1).f1;
    row.rouge2 += rouge_n(cand, ref, 2).f1;
    row.rouge_lcs += rouge_lcs(cand, ref).f1;
    row.bleu += bleu(cand, {ref});
    row.topic_sim += topic_similarity(cand, ref, tit->second);

    auto mkey = std::make_pair(p.model, p.setting);
    if (!p.scores.empty()) {
      if (p.scores.size() != doc.sentences.size()) {
        throw FormatError("scores do not match the sentences of " + doc.id);
      }
      auto [rit, rfresh] = rank_index.emplace(mkey, ranks.size());
      if (rfresh) {
        RankAcc a;
        a.row.model = p.model;
        a.row.setting = p.setting;
        ranks.push_back(a);
      }
      RankAcc& acc = ranks[rit->second];
      if (acc.seen.insert(doc.id).second) {
        auto order = rank_order(p.scores);
        std::vector<double> gains;
        std::vector<int> rel;
        for (std::size_t i : order) {
          gains.push_back(g.labels[i]);
          rel.push_back(g.labels[i]);
        }
        acc.row.docs += 1;
        acc.row.ndcg1 += ndcg_at_k(gains, 1);
        acc.row.ndcg3 += ndcg_at_k(gains, 3);
        acc.row.map1 += average_precision_at_k(rel, 1);
        acc.row.map3 += average_precision_at_k(rel, 3);
      }
    }
    if (!p.labels.empty()) {
      if (p.labels.size() != doc.sentences.size()) {
        throw FormatError("labels do not match the sentences of " + doc.id);
      }
      auto [cit, cfresh] = cls_index.emplace(mkey, clss.size());
      if (cfresh) {
        ClsAcc a;
        a.model = p.model;
        a.setting = p.setting;
        clss.push_back(a);
      }
      ClsAcc& acc = clss[cit->second];
      if (acc.seen.insert(doc.id).second) {
        acc.pred.insert(acc.pred.end(), p.labels.begin(), p.labels.end());
        acc.label.insert(acc.label.end(), g.labels.begin(), g.labels.end());
      }
    }
  }

  EvalReport report;
  for (auto& a : sims) {
    SimilarityRow r = a.row;
    const double n = static_cast<double>(r.docs);
    r.token_sim /= n;
    r.rouge1 /= n;
    r.rouge2 /= n;
    r.rouge_lcs /= n;
    r.bleu /= n;
    r.topic_sim /= n;
    report.similarity.push_back(r);
  }
  for (auto& a : ranks) {
    RankingRow r = a.row;
    const double n = static_cast<double>(r.docs);
    r.ndcg1 /= n;
    r.ndcg3 /= n;
    r.map1 /= n;
    r.map3 /= n;
    report.ranking.push_back(r);
  }
  for (auto& a : clss) {
    report.classification.push_back({a.model, a.setting, classification_report(a.pred, a.label)});
  }
  return report;
}

namespace {

void append(std::string& out, const char* format, ...) __attribute__((format(printf, 2, 3)));

void append(std::string& out, const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  out += buf;
}

}  // namespace

std::string report_text(const EvalReport& report) {
  std::string out;
  std::vector<std::string> targets;
  for (const auto& r : report.similarity) {
    if (std::find(targets.begin(), targets.end(), r.target) == targets.end()) {
      targets.push_back(r.target);
    }
  }
  for (const auto& t : targets) {
    append(out, "Similarity, target %s\n", t.c_str());
    append(out, "%-10s %-16s %5s %9s %7s %7s %9s %7s %9s\n", "model", "setting",
           "docs", "token_sim", "rouge1", "rouge2", "rouge_lcs", "bleu", "topic_sim");
    for (const auto& r : report.similarity) {
      if (r.target != t) continue;
      append(out, "%-10s %-16s %5zu %9.4f %7.4f %7.4f %9.4f %7.4f %9.4f\n",
             r.model.c_str(), r.setting.c_str(), r.docs, r.token_sim, r.rouge1,
             r.rouge2, r.rouge_lcs, r.bleu, r.topic_sim);
    }
    out += "\n";
  }
  if (!report.ranking.empty()) {
    out += "Ranking\n";
    append(out, "%-10s %-16s %5s %7s %7s %7s %7s\n", "model", "setting", "docs",
           "ndcg@1", "ndcg@3", "map@1", "map@3");
    for (const auto& r : report.ranking) {
      append(out, "%-10s %-16s %5zu %7.4f %7.4f %7.4f %7.4f\n", r.model.c_str(),
             r.setting.c_str(), r.docs, r.ndcg1, r.ndcg3, r.map1, r.map3);
    }
    out += "\n";
  }
  if (!report.classification.empty()) {
    out += "Classification\n";
    append(out, "%-10s %-16s %8s %7s %7s %7s %7s %7s %7s\n", "model", "setting",
           "accuracy", "p0", "p1", "r0", "r1", "f0", "f1");
    for (const auto& r : report.classification) {
      const auto& c = r.report;
      append(out, "%-10s %-16s %8.4f %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f\n",
             r.model.c_str(), r.setting.c_str(), c.accuracy,
             c.per_class[0].precision, c.per_class[1].precision,
             c.per_class[0].recall, c.per_class[1].recall, c.per_class[0].f1,
             c.per_class[1].f1);
    }
    out += "\n";
  }
  if (!report.failures.empty()) {
    out += "Failures\n";
    for (const auto& f : report.failures) {
      out += f.model + " " + f.setting + ": " + f.message + "\n";
    }
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  json j;
  j["similarity"] = json::array();
  for (const auto& r : report.similarity) {
    j["similarity"].push_back({{"model", r.model},
                               {"setting", r.setting},
                               {"target", r.target},
                               {"docs", r.docs},
                               {"token_sim", r.token_sim},
                               {"rouge1", r.rouge1},
                               {"rouge2", r.rouge2},
                               {"rouge_lcs", r.rouge_lcs},
                               {"bleu", r.bleu},
                               {"topic_sim", r.topic_sim}});
  }
  j["ranking"] = json::array();
  for (const auto& r : report.ranking) {
    j["ranking"].push_back({{"model", r.model},
                            {"setting", r.setting},
                            {"docs", r.docs},
                            {"ndcg@1", r.ndcg1},
                            {"ndcg@3", r.ndcg3},
                            {"map@1", r.map1},
                            {"map@3", r.map3}});
  }
  j["classification"] = json::array();
  for (const auto& r : report.classification) {
    const auto& c = r.report;
    json per = json::array();
    for (int k = 0; k < 2; ++k) {
      per.push_back({{"precision", c.per_class[k].precision},
                     {"recall", c.per_class[k].recall},
                     {"f1", c.per_class[k].f1},
                     {"support", c.support[k]}});
    }
    j["classification"].push_back({{"model", r.model},
                                   {"setting", r.setting},
                                   {"accuracy", c.accuracy},
                                   {"per_class", per}});
  }
  j["failures"] = json::array();
  for (const auto& f : report.failures) {
    j["failures"].push_back({{"model", f.model}, {"setting", f.setting}, {"message", f.message}});
  }
  return j.dump(2) + "\n";
}

// ---- spec ----

std::string to_string(Setting setting) {
  return setting == Setting::kSupervised ? "supervised" : "semi-supervised";
}

Setting parse_setting(std::string_view name) {
  if (name == "supervised") return Setting::kSupervised;
  if (name == "semi-supervised" || name == "semi_supervised") {
    return Setting::kSemiSupervised;
  }
  throw FormatError("unknown setting: " + std::string(name));
}

bool uses_labels(const std::string& model) {
  return model == "nb" || model == "svm" || model == "e-rnn" ||
         model == "ec-rnn" || model == "cnn-rnn";
}

ConfigMap ExperimentSpec::to_map() const {
  ConfigMap m;
  m["docs"] = docs_path;
  m["gold"] = gold_path;
  m["synth.seed"] = std::to_string(synth.seed);
  m["synth.n_docs"] = std::to_string(synth.n_docs);
  m["synth.context_dependence"] = fmt_real(synth.context_dependence);
  m["split_seed"] = std::to_string(split_seed);
  m["train_size"] = std::to_string(train_size);
  m["eval_size"] = std::to_string(eval_size);
  std::vector<std::string> s, t;
  for (auto x : settings) s.push_back(to_string(x));
  for (const auto& x : targets) t.push_back(x.to_string());
  m["settings"] = join_list(s);
  m["targets"] = join_list(t);
  m["models"] = join_list(models);
  m["preset"] = paper_preset ? "paper" : "desk";
  m["seed"] = std::to_string(seed);
  m["threads"] = std::to_string(threads);
  m["min_count"] = std::to_string(min_count);
  m["sgns.dim"] = std::to_string(sgns.dim);
  m["sgns.window"] = std::to_string(sgns.window);
  m["sgns.negatives"] = std::to_string(sgns.negatives);
  m["sgns.epochs"] = std::to_string(sgns.epochs);
  m["idf"] = to_string(idf_variant);
  m["betas"] = fmt_real(betas.seller) + "," + fmt_real(betas.query) + "," +
               fmt_real(betas.browse);
  m["top_m"] = std::to_string(labeling.top_m);
  m["beam_width"] = std::to_string(decode.beam_width);
  m["extractive_epochs"] = std::to_string(extractive_epochs);
  m["seq2seq_epochs"] = std::to_string(seq2seq_epochs);
  return m;
}

ExperimentSpec ExperimentSpec::from_map(const ConfigMap& map) {
  ExperimentSpec s;
  auto u64 = [](const std::string& v) { return static_cast<std::uint64_t>(std::stoull(v)); };
  for (const auto& [key, v] : map) {
    try {
      if (key == "docs") {
        s.docs_path = v;
      } else if (key == "gold") {
        s.gold_path = v;
      } else if (key == "synth.seed") {
        s.synth.seed = u64(v);
      } else if (key == "synth.n_docs") {
        s.synth.n_docs = u64(v);
      } else if (key == "synth.context_dependence") {
        s.synth.context_dependence = std::stod(v);
      } else if (key == "split_seed") {
        s.split_seed = u64(v);
      } else if (key == "train_size") {
        s.train_size = u64(v);
      } else if (key == "eval_size") {
        s.eval_size = u64(v);
      } else if (key == "settings") {
        s.settings.clear();
        for (const auto& x : split_list(v)) s.settings.push_back(parse_setting(x));
      } else if (key == "targets") {
        s.targets.clear();
        for (const auto& x : split_list(v)) s.targets.push_back(ExtractTarget::parse(x));
      } else if (key == "models") {
        s.models = split_list(v);
        for (const auto& m : s.models) {
          if (std::find(kModels.begin(), kModels.end(), m) == kModels.end()) {
            throw FormatError("unknown model: " + m);
          }
        }
      } else if (key == "preset") {
        if (v != "desk" && v != "paper") throw FormatError("unknown preset: " + v);
        s.paper_preset = v == "paper";
      } else if (key == "seed") {
        s.seed = u64(v);
      } else if (key == "threads") {
        s.threads = std::max<std::size_t>(1, u64(v));
      } else if (key == "min_count") {
        s.min_count = std::stoll(v);
      } else if (key == "sgns.dim") {
        s.sgns.dim = std::stoi(v);
      } else if (key == "sgns.window") {
        s.sgns.window = std::stoi(v);
      } else if (key == "sgns.negatives") {
        s.sgns.negatives = std::stoi(v);
      } else if (key == "sgns.epochs") {
        s.sgns.epochs = std::stoi(v);
      } else if (key == "idf") {
        s.idf_variant = parse_idf_variant(v);
      } else if (key == "betas") {
        auto b = split_list(v);
        if (b.size() != 3) throw FormatError("betas needs three values");
        s.betas = {std::stod(b[0]), std::stod(b[1]), std::stod(b[2])};
      } else if (key == "top_m") {
        s.labeling.top_m = u64(v);
      } else if (key == "beam_width") {
        s.decode.beam_width = std::max<std::size_t>(1, u64(v));
      } else if (key == "extractive_epochs") {
        s.extractive_epochs = std::stoi(v);
      } else if (key == "seq2seq_epochs") {
        s.seq2seq_epochs = std::stoi(v);
      } else {
        throw FormatError("unknown experiment key: " + key);
      }
    } catch (const std::logic_error&) {
      throw FormatError("bad value for " + key + ": " + v);
    }
  }
  return s;
}

// ---- workspace ----

Workspace prepare_workspace(const ExperimentSpec& spec, std::vector<Document> docs,
                            std::vector<GoldSummary> gold) {
  Workspace ws;
  std::unordered_map<std::string, std::size_t> gold_index;
  for (std::size_t i = 0; i < gold.size(); ++i) gold_index[gold[i].doc_id] = i;
  for (const auto& d : docs) {
    auto it = gold_index.find(d.id);
    if (it == gold_index.end()) throw FormatError("no gold summary for " + d.id);
    GoldSummary g = gold[it->second];
    if (g.labels.size() != d.sentences.size()) {
      throw FormatError("gold labels do not match the sentences of " + d.id);
    }
    ws.gold.push_back(std::move(g));
  }
  ws.docs = std::move(docs);

  std::vector<std::size_t> order(ws.docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(spec.split_seed);
  std::shuffle(order.begin(), order.end(), split_rng);
  std::size_t n_train = spec.train_size;
  if (n_train == 0) n_train = ws.docs.size() * 4 / 5;
  n_train = std::min(n_train, ws.docs.size());
  std::size_t n_eval = spec.eval_size;
  if (n_eval == 0 || n_eval > ws.docs.size() - n_train) n_eval = ws.docs.size() - n_train;
  ws.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  ws.eval.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_eval));
  std::sort(ws.train.begin(), ws.train.end());
  std::sort(ws.eval.begin(), ws.eval.end());

  std::set<std::string> train_ids;
  for (auto i : ws.train) train_ids.insert(ws.docs[i].id);
  for (auto i : ws.eval) {
    if (train_ids.count(ws.docs[i].id)) {
      throw DataLeak("document " + ws.docs[i].id + " is in both splits");
    }
  }

  ws.vocab = build_vocabulary(ws.docs, default_stopwords(), spec.min_count);
  ws.idf = compute_idf(ws.docs, ws.vocab, spec.idf_variant);
  SgnsConfig sg = spec.sgns;
  if (spec.paper_preset) sg.dim = SgnsConfig::paper().dim;
  sg.seed = spec.seed;
  ws.embeddings = train_sgns(ws.docs, ws.vocab, sg);
  ContextBuilder builder(ws.vocab, ws.idf, ws.embeddings, spec.betas);
  ws.contexts = builder.build_all(ws.docs);
  return ws;
}

Workspace prepare_workspace(const ExperimentSpec& spec) {
  if (spec.docs_path.empty()) {
    SynthCorpus sc = synth_corpus(spec.synth);
    return prepare_workspace(spec, std::move(sc.docs), std::move(sc.gold));
  }
  auto docs = ingest(spec.docs_path);
  std::ifstream in(spec.gold_path);
  if (!in) throw Error("cannot open " + spec.gold_path);
  return prepare_workspace(spec, std::move(docs), read_gold(in));
}

// ---- experiment ----

namespace {

struct Job {
  std::string model;
  std::string setting;
  const std::vector<LabeledSentence>* labels = nullptr;
};

struct JobResult {
  std::vector<PredRecord> preds;
  std::string error;
};

// Emits one extractive record per target from a full sentence ranking.
void emit_targets(const ExperimentSpec& spec, const Job& job, const Document& doc,
                  std::span<const std::size_t> ranking,
                  const std::vector<double>& scores, const std::vector<int>& labels,
                  std::vector<PredRecord>& out) {
  for (const auto& target : spec.targets) {
    PredRecord p;
    p.doc_id = doc.id;
    p.model = job.model;
    p.setting = job.setting;
    p.target = target.to_string();
    p.kind = SummaryKind::kExtractive;
    p.sentences = select_target(ranking, doc, target);
    p.text = sentence_text(doc, p.sentences);
    p.scores = scores;
    p.labels = labels;
    out.push_back(std::move(p));
  }
}

std::vector<PredRecord> run_job(const ExperimentSpec& spec, const Workspace& ws,
                                const Job& job) {
  std::vector<PredRecord> out;
  const auto& m = job.model;

  std::vector<Document> train_docs;
  std::vector<DocumentContext> train_ctx;
  for (auto i : ws.train) {
    train_docs.push_back(ws.docs[i]);
    train_ctx.push_back(ws.contexts[i]);
  }

  if (m == "fuzzy") {
    for (auto d : ws.eval) {
      Rng rng(spec.seed + d);
      auto ranking = fuzzy_ranking(ws.docs[d], rng);
      emit_targets(spec, job, ws.docs[d], ranking, {}, {}, out);
    }
  } else if (m == "lsa") {
    for (auto d : ws.eval) {
      auto ranking = lsa_ranking(ws.docs[d], ws.idf, ws.vocab);
      emit_targets(spec, job, ws.docs[d], ranking, {}, {}, out);
    }
  } else if (m == "lexrank" || m == "textrank") {
    for (auto d : ws.eval) {
      const Document& doc = ws.docs[d];
      auto graph = m == "lexrank" ? lexrank_graph(doc, ws.idf, ws.vocab)
                                  : textrank_graph(doc, default_stopwords());
      auto scores = pagerank(graph).scores;
      emit_targets(spec, job, doc, rank_order(scores), scores, {}, out);
    }
  } else if (m == "nb" || m == "svm") {
    auto examples = classifier_examples(train_docs, train_ctx, *job.labels);
    std::vector<std::vector<std::string>> x;
    std::vector<int> y;
    for (const auto& e : examples) {
      x.push_back(e.tokens);
      y.push_back(e.label == Label::kPositive ? 1 : 0);
    }
    NaiveBayes nb;
    LinearSvm svm;
    if (m == "nb") {
      nb.train(x, y);
    } else {
      std::vector<FeatureVector> f;
      for (const auto& t : x) f.push_back(tfidf_features(t, ws.idf, ws.vocab));
      SvmOptions opt;
      opt.seed = spec.seed;
      svm.train(f, y, opt);
    }
    for (auto d : ws.eval) {
      const Document& doc = ws.docs[d];
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& s : doc.sentences) {
        if (m == "nb") {
          scores.push_back(nb.predict_proba(s.tokens));
          labels.push_back(nb.predict(s.tokens));
        } else {
          auto f = tfidf_features(s.tokens, ws.idf, ws.vocab);
          scores.push_back(svm.score(f));
          labels.push_back(svm.predict(f));
        }
      }
      emit_targets(spec, job, doc, rank_order(scores), scores, labels, out);
    }
  } else if (m == "e-rnn" || m == "ec-rnn" || m == "cnn-rnn") {
    const ExtractiveKind kind = parse_extractive_kind(m);
    auto cfg = spec.paper_preset ? ExtractiveModelConfig::paper(kind)
                                 : ExtractiveModelConfig::desk(kind);
    cfg.embed_dim = ws.embeddings.dim();
    cfg.seed = spec.seed;
    if (spec.extractive_epochs > 0) cfg.epochs = spec.extractive_epochs;
    auto examples = classifier_examples(train_docs, train_ctx, *job.labels);
    auto model = train_classifier(examples, ModelVocab(ws.vocab), cfg, &ws.embeddings);
    for (auto d : ws.eval) {
      const Document& doc = ws.docs[d];
      auto scores = classify_sentences(model, doc, &ws.contexts[d].vector.v);
      std::vector<int> labels;
      for (double p : scores) labels.push_back(p >= 0.5 ? 1 : 0);
      emit_targets(spec, job, doc, rank_order(scores), scores, labels, out);
    }
  } else if (m == "a-rnn" || m == "ac-rnn") {
    const Seq2SeqKind kind = parse_seq2seq_kind(m);
    auto cfg = spec.paper_preset ? Seq2SeqConfig::paper(kind) : Seq2SeqConfig::desk(kind);
    cfg.embed_dim = ws.embeddings.dim();
    cfg.seed = spec.seed;
    if (spec.seq2seq_epochs > 0) cfg.epochs = spec.seq2seq_epochs;
    auto pairs = seq2seq_pairs(train_docs, train_ctx);
    auto model = train_seq2seq(pairs, ModelVocab(ws.vocab), cfg, &ws.embeddings);
    for (auto d : ws.eval) {
      const Document& doc = ws.docs[d];
      const auto* v_d = &ws.contexts[d].vector.v;
      auto input = body_tokens(doc);
      auto scores = sentence_logliks(model, input, v_d, doc.sentences, true);
      for (double& s : scores) {
        if (!std::isfinite(s)) s = std::numeric_limits<double>::lowest();
      }
      emit_targets(spec, job, doc, rank_order(scores), scores, {}, out);

      PredRecord p;
      p.doc_id = doc.id;
      p.model = m;
      p.setting = job.setting;
      p.target = kTitleTarget;
      p.kind = SummaryKind::kAbstractive;
      auto words = decode(model, input, v_d, spec.decode);
      for (std::size_t i = 0; i < words.size(); ++i) p.text += (i ? " " : "") + words[i];
      out.push_back(std::move(p));
    }
  } else {
    throw FormatError("unknown model: " + m);
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const Workspace& ws) {
  std::vector<Document> train_docs;
  std::vector<DocumentContext> train_ctx;
  std::vector<LabeledSentence> gold_labels;
  for (auto i : ws.train) {
    train_docs.push_back(ws.docs[i]);
    train_ctx.push_back(ws.contexts[i]);
    const auto& g = ws.gold[i];
    for (std::size_t s = 0; s < g.labels.size(); ++s) {
      gold_labels.push_back({g.doc_id, s, g.labels[s] ? Label::kPositive : Label::kNegative,
                             LabelSource::kHuman, 0.0});
    }
  }
  bool want_semi = std::find(spec.settings.begin(), spec.settings.end(),
                             Setting::kSemiSupervised) != spec.settings.end();
  std::vector<LabeledSentence> semi_labels;
  std::string semi_error;
  if (want_semi) {
    try {
      ScoringResources res{ws.vocab, ws.idf, ws.embeddings};
      semi_labels = generate_labels(train_docs, train_ctx,
                                    Blacklist(default_blacklist()), res, spec.labeling);
    } catch (const Error& e) {
      semi_error = e.what();
    }
  }

  std::vector<Job> jobs;
  for (const auto& m : spec.models) {
    if (!uses_labels(m)) {
      jobs.push_back({m, kNoSetting, nullptr});
      continue;
    }
    for (auto s : spec.settings) {
      jobs.push_back({m, to_string(s),
                      s == Setting::kSupervised ? &gold_labels : &semi_labels});
    }
  }

  std::vector<JobResult> results(jobs.size());
  auto run = [&](std::size_t i) {
    try {
      if (jobs[i].labels == &semi_labels && !semi_error.empty()) {
        throw Error(semi_error);
      }
      results[i].preds = run_job(spec, ws, jobs[i]);
    } catch (const std::exception& e) {
      results[i].preds.clear();
      results[i].error = e.what();
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(1, spec.threads), jobs.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  for (auto& r : results) {
    result.preds.insert(result.preds.end(), r.preds.begin(), r.preds.end());
  }
  std::vector<Document> docs;
  std::vector<GoldSummary> gold;
  for (auto i : ws.eval) {
    docs.push_back(ws.docs[i]);
    gold.push_back(ws.gold[i]);
  }
  result.report = evaluate(result.preds, gold, docs, ws.vocab, ws.idf);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!results[i].error.empty()) {
      result.report.failures.push_back({jobs[i].model, jobs[i].setting, results[i].error});
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  return run_experiment(spec, prepare_workspace(spec));
}

}  // namespace ctxsum
