#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ctxsum/baselines.h"
#include "ctxsum/checkpoint.h"
#include "ctxsum/error.h"
#include "ctxsum/experiment.h"
#include "ctxsum/records.h"

using namespace ctxsum;

namespace {

struct Globals {
  std::uint64_t seed = 7;
  std::size_t threads = 1;
  std::string preset = "desk";
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

// Runs f(i) for i in [0, n) on up to `threads` threads.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
  threads = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// A context bundle with the derived tables kept alive next to it.
struct LoadedContext {
  ContextBundle bundle;
  IdfTable idf;
  std::vector<DocumentContext> contexts;
};

std::unique_ptr<LoadedContext> load_context(const std::string& path) {
  auto lc = std::make_unique<LoadedContext>();
  lc->bundle = context_from_checkpoint(load_checkpoint(path));
  const auto& corpus = lc->bundle.corpus;
  lc->idf = compute_idf(corpus.docs, corpus.vocab, lc->bundle.idf_variant);
  ContextBuilder builder(corpus.vocab, lc->idf, lc->bundle.embeddings, lc->bundle.betas);
  lc->contexts = builder.build_all(corpus.docs);
  return lc;
}

// corpus.bin or ctx.bin
CorpusBundle load_any_corpus(const std::string& path) {
  Checkpoint c = load_checkpoint(path);
  if (c.kind == "context") return context_from_checkpoint(c).corpus;
  return corpus_from_checkpoint(c);
}

Betas parse_betas(const std::string& text) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) throw FormatError("--betas needs three comma-separated values");
  return {v[0], v[1], v[2]};
}

PredRecord extractive_record(const Document& doc, const std::string& model,
                             const std::string& setting, const ExtractTarget& target,
                             std::vector<std::size_t> picked, std::vector<double> scores,
                             std::vector<int> labels) {
  PredRecord p;
  p.doc_id = doc.id;
  p.model = model;
  p.setting = setting;
  p.target = target.to_string();
  p.kind = SummaryKind::kExtractive;
  for (std::size_t i : picked) {
    if (!p.text.empty()) p.text += " ";
    p.text += doc.sentences[i].text;
  }
  p.sentences = std::move(picked);
  p.scores = std::move(scores);
  p.labels = std::move(labels);
  return p;
}

std::vector<LabeledSentence> read_label_file(const std::string& path) {
  auto in = open_in(path);
  return read_labels(in);
}

ConfigMap read_key_values(const std::string& path) {
  auto in = open_in(path);
  ConfigMap m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, line, "expected key = value");
    auto trim = [](std::string s) {
      auto x = s.find_first_not_of(" \t\r");
      auto y = s.find_last_not_of(" \t\r");
      return x == std::string::npos ? std::string{} : s.substr(x, y - x + 1);
    };
    m[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-aware extractive and abstractive summarization"};
  app.set_config("--config", "", "INI file of option values; [section] per command");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for inference and experiments")
      ->capture_default_str();
  app.add_option("--preset", g.preset, "Model size preset")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Read documents and build the vocabulary");
  std::string ingest_input, ingest_stopwords, ingest_out = "corpus.bin";
  std::int64_t min_count = 1;
  ingest_cmd->add_option("--input", ingest_input, "Document records (JSONL)")->required();
  ingest_cmd->add_option("--stopwords", ingest_stopwords, "Stopword list; default: built in");
  ingest_cmd->add_option("--min-count", min_count, "Drop rarer words")->capture_default_str();
  ingest_cmd->add_option("--out", ingest_out)->capture_default_str();

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "Train skip-gram embeddings");
  std::string embed_corpus = "corpus.bin", embed_out = "embed.ckpt";
  SgnsConfig sgns;
  embed_cmd->add_option("--corpus", embed_corpus)->capture_default_str();
  embed_cmd->add_option("--dim", sgns.dim)->capture_default_str();
  embed_cmd->add_option("--window", sgns.window)->capture_default_str();
  embed_cmd->add_option("--negatives", sgns.negatives)->capture_default_str();
  embed_cmd->add_option("--epochs", sgns.epochs)->capture_default_str();
  embed_cmd->add_option("--out", embed_out)->capture_default_str();

  // context
  auto* context_cmd = app.add_subcommand("context", "Build document context vectors");
  std::string ctx_corpus = "corpus.bin", ctx_embed = "embed.ckpt", ctx_out = "ctx.bin";
  std::string betas_text = "1,1,1", idf_name = "reciprocal";
  context_cmd->add_option("--corpus", ctx_corpus)->capture_default_str();
  context_cmd->add_option("--embed", ctx_embed)->capture_default_str();
  context_cmd->add_option("--betas", betas_text, "seller,query,browse weights")
      ->capture_default_str();
  context_cmd->add_option("--idf", idf_name)
      ->check(CLI::IsMember({"reciprocal", "log"}))
      ->capture_default_str();
  context_cmd->add_option("--out", ctx_out)->capture_default_str();

  // label
  auto* label_cmd = app.add_subcommand("label", "Label sentences from context and blacklist");
  std::string label_ctx = "ctx.bin", label_blacklist, label_out = "labels.jsonl";
  LabelingOptions labeling;
  label_cmd->add_option("--ctx", label_ctx)->capture_default_str();
  label_cmd->add_option("--blacklist", label_blacklist, "Phrase list; default: built in");
  label_cmd->add_option("--top-m", labeling.top_m)->capture_default_str();
  label_cmd->add_flag("--normalize", labeling.normalize, "Mean instead of summed word scores");
  label_cmd->add_option("--out", label_out)->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train an extractive or abstractive model");
  std::string train_model, train_labels, train_ctx = "ctx.bin", train_out = "model.ckpt";
  int train_epochs = 0;
  train_cmd->add_option("--model", train_model)
      ->required()
      ->check(CLI::IsMember({"e-rnn", "ec-rnn", "cnn-rnn", "a-rnn", "ac-rnn"}));
  train_cmd->add_option("--labels", train_labels, "Sentence labels; classifiers only");
  train_cmd->add_option("--ctx", train_ctx)->capture_default_str();
  train_cmd->add_option("--epochs", train_epochs, "Override the preset; 0 keeps it")
      ->capture_default_str();
  train_cmd->add_option("--out", train_out)->capture_default_str();

  // summarize
  auto* sum_cmd = app.add_subcommand("summarize", "Summarize documents with a trained model");
  std::string sum_model = "model.ckpt", sum_ctx = "ctx.bin", sum_mode, sum_target = "800c",
              sum_out = "summaries.jsonl";
  DecodeConfig decode_cfg;
  bool greedy = false, no_restrict = false;
  sum_cmd->add_option("--model", sum_model)->capture_default_str();
  sum_cmd->add_option("--ctx", sum_ctx)->capture_default_str();
  sum_cmd->add_option("--mode", sum_mode)
      ->required()
      ->check(CLI::IsMember({"classify", "decode", "rerank"}));
  sum_cmd->add_option("--target", sum_target, "1, 3, 5 or <chars>c")->capture_default_str();
  sum_cmd->add_option("--beam-width", decode_cfg.beam_width)->capture_default_str();
  sum_cmd->add_flag("--greedy", greedy);
  sum_cmd->add_flag("--no-restrict", no_restrict, "Allow any vocabulary word when decoding");
  sum_cmd->add_option("--out", sum_out)->capture_default_str();

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "Summarize with a baseline method");
  std::string base_method, base_ctx = "ctx.bin", base_labels, base_target = "800c",
              base_out = "summaries.jsonl";
  base_cmd->add_option("--method", base_method)
      ->required()
      ->check(CLI::IsMember({"fuzzy", "nb", "svm", "lsa", "lexrank", "textrank"}));
  base_cmd->add_option("--ctx", base_ctx)->capture_default_str();
  base_cmd->add_option("--labels", base_labels, "Training labels for nb and svm");
  base_cmd->add_option("--target", base_target)->capture_default_str();
  base_cmd->add_option("--out", base_out)->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold summaries");
  std::string eval_pred = "summaries.jsonl", eval_gold = "gold.jsonl", eval_corpus = "ctx.bin",
              eval_report = "report.json";
  eval_cmd->add_option("--pred", eval_pred)->capture_default_str();
  eval_cmd->add_option("--gold", eval_gold)->capture_default_str();
  eval_cmd->add_option("--corpus", eval_corpus, "corpus.bin or ctx.bin")->capture_default_str();
  eval_cmd->add_option("--report", eval_report)->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  SynthOptions synth;
  std::string synth_out = "docs.jsonl", synth_gold = "gold.jsonl";
  synth_cmd->add_option("--n-docs", synth.n_docs)->capture_default_str();
  synth_cmd->add_option("--context-dependence", synth.context_dependence)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_out)->capture_default_str();
  synth_cmd->add_option("--gold", synth_gold)->capture_default_str();

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Train, summarize and evaluate in one run");
  std::string exp_spec, exp_report = "report.txt", exp_json = "report.json", exp_preds;
  std::vector<std::string> exp_sets;
  exp_cmd->add_option("--spec", exp_spec, "key = value experiment file");
  exp_cmd->add_option("--set", exp_sets, "key=value override, repeatable");
  exp_cmd->add_option("--report", exp_report)->capture_default_str();
  exp_cmd->add_option("--json", exp_json)->capture_default_str();
  exp_cmd->add_option("--preds", exp_preds, "Also write every prediction record");

  CLI11_PARSE(app, argc, argv);
  const bool paper = g.preset == "paper";

  try {
    if (*ingest_cmd) {
      CorpusBundle b;
      b.docs = ingest(ingest_input);
      WordSet stopwords =
          ingest_stopwords.empty() ? default_stopwords() : load_word_list(ingest_stopwords);
      b.vocab = build_vocabulary(b.docs, stopwords, min_count);
      b.min_count = min_count;
      save_checkpoint(ingest_out, corpus_checkpoint(b));
      std::cout << b.docs.size() << " documents, " << b.vocab.size() << " words\n";
    } else if (*embed_cmd) {
      auto b = corpus_from_checkpoint(load_checkpoint(embed_corpus));
      sgns.seed = g.seed;
      if (paper && embed_cmd->count("--dim") == 0) sgns.dim = SgnsConfig::paper().dim;
      SgnsLog log;
      auto m = train_sgns(b.docs, b.vocab, sgns, &log);
      save_checkpoint(embed_out, embedding_checkpoint(m, sgns));
      std::cout << "final loss " << log.epoch_loss.back() << "\n";
    } else if (*context_cmd) {
      ContextBundle b;
      b.corpus = corpus_from_checkpoint(load_checkpoint(ctx_corpus));
      b.embeddings = embedding_from_checkpoint(load_checkpoint(ctx_embed));
      if (b.embeddings.rows() != b.corpus.vocab.size()) {
        throw DimMismatch("embeddings were trained on a different vocabulary");
      }
      b.idf_variant = parse_idf_variant(idf_name);
      b.betas = parse_betas(betas_text);
      save_checkpoint(ctx_out, context_checkpoint(b));
    } else if (*label_cmd) {
      auto lc = load_context(label_ctx);
      const auto& corpus = lc->bundle.corpus;
      WordSet phrases =
          label_blacklist.empty() ? default_blacklist() : load_word_list(label_blacklist);
      ScoringResources res{corpus.vocab, lc->idf, lc->bundle.embeddings};
      auto labels = generate_labels(corpus.docs, lc->contexts, Blacklist(phrases), res, labeling);
      auto out = open_out(label_out);
      write_labels(out, labels);
      std::cout << labels.size() << " labelled sentences\n";
    } else if (*train_cmd) {
      auto lc = load_context(train_ctx);
      const auto& corpus = lc->bundle.corpus;
      const auto& emb = lc->bundle.embeddings;
      if (train_model == "a-rnn" || train_model == "ac-rnn") {
        auto kind = parse_seq2seq_kind(train_model);
        auto cfg = paper ? Seq2SeqConfig::paper(kind) : Seq2SeqConfig::desk(kind);
        cfg.embed_dim = emb.dim();
        cfg.seed = g.seed;
        if (train_epochs > 0) cfg.epochs = train_epochs;
        TrainLog log;
        auto model = train_seq2seq(seq2seq_pairs(corpus.docs, lc->contexts),
                                   ModelVocab(corpus.vocab), cfg, &emb, &log);
        save_checkpoint(train_out, model_checkpoint(model));
        if (!log.epoch_loss.empty()) std::cout << "final loss " << log.epoch_loss.back() << "\n";
      } else {
        if (train_labels.empty()) throw Error("--labels is required for " + train_model);
        auto kind = parse_extractive_kind(train_model);
        auto cfg = paper ? ExtractiveModelConfig::paper(kind) : ExtractiveModelConfig::desk(kind);
        cfg.embed_dim = emb.dim();
        cfg.seed = g.seed;
        if (train_epochs > 0) cfg.epochs = train_epochs;
        auto labels = read_label_file(train_labels);
        TrainLog log;
        auto model = train_classifier(classifier_examples(corpus.docs, lc->contexts, labels),
                                      ModelVocab(corpus.vocab), cfg, &emb, &log);
        save_checkpoint(train_out, model_checkpoint(model));
        if (!log.epoch_loss.empty()) std::cout << "final loss " << log.epoch_loss.back() << "\n";
      }
    } else if (*sum_cmd) {
      auto lc = load_context(sum_ctx);
      const auto& docs = lc->bundle.corpus.docs;
      const auto target = ExtractTarget::parse(sum_target);
      Checkpoint ckpt = load_checkpoint(sum_model);
      std::vector<PredRecord> preds(docs.size());
      if (greedy) decode_cfg.strategy = DecodeStrategy::kGreedy;
      decode_cfg.restrict_to_document_vocab = !no_restrict;
      if (sum_mode == "classify") {
        auto model = extractive_from_checkpoint(ckpt);
        const std::string name = to_string(model.config().kind);
        parallel_for(docs.size(), g.threads, [&](std::size_t d) {
          if (docs[d].sentences.empty()) throw EmptyDocument(docs[d].id);
          auto scores = classify_sentences(model, docs[d], &lc->contexts[d].vector.v);
          std::vector<int> labels;
          for (double p : scores) labels.push_back(p >= 0.5 ? 1 : 0);
          auto picked = select_target(rank_order(scores), docs[d], target);
          preds[d] = extractive_record(docs[d], name, "", target, std::move(picked),
                                       std::move(scores), std::move(labels));
        });
      } else {
        auto model = seq2seq_from_checkpoint(ckpt);
        const std::string name = to_string(model.config().kind);
        parallel_for(docs.size(), g.threads, [&](std::size_t d) {
          const auto* v_d = &lc->contexts[d].vector.v;
          auto input = body_tokens(docs[d]);
          if (sum_mode == "decode") {
            PredRecord p;
            p.doc_id = docs[d].id;
            p.model = name;
            p.target = "title";
            p.kind = SummaryKind::kAbstractive;
            auto words = decode(model, input, v_d, decode_cfg);
            for (std::size_t i = 0; i < words.size(); ++i) p.text += (i ? " " : "") + words[i];
            preds[d] = std::move(p);
          } else {
            if (docs[d].sentences.empty()) throw EmptyDocument(docs[d].id);
            auto scores = sentence_logliks(model, input, v_d, docs[d].sentences, true);
            for (double& s : scores) {
              if (!std::isfinite(s)) s = std::numeric_limits<double>::lowest();
            }
            auto picked = select_target(rank_order(scores), docs[d], target);
            preds[d] = extractive_record(docs[d], name, "", target, std::move(picked),
                                         std::move(scores), {});
          }
        });
      }
      auto out = open_out(sum_out);
      write_preds(out, preds);
    } else if (*base_cmd) {
      auto lc = load_context(base_ctx);
      const auto& corpus = lc->bundle.corpus;
      const auto& docs = corpus.docs;
      const auto target = ExtractTarget::parse(base_target);
      NaiveBayes nb;
      LinearSvm svm;
      if (base_method == "nb" || base_method == "svm") {
        if (base_labels.empty()) throw Error("--labels is required for " + base_method);
        auto examples = classifier_examples(docs, lc->contexts, read_label_file(base_labels));
        std::vector<std::vector<std::string>> x;
        std::vector<int> y;
        for (const auto& e : examples) {
          x.push_back(e.tokens);
          y.push_back(e.label == Label::kPositive ? 1 : 0);
        }
        if (base_method == "nb") {
          nb.train(x, y);
        } else {
          std::vector<FeatureVector> f;
          for (const auto& t : x) f.push_back(tfidf_features(t, lc->idf, corpus.vocab));
          SvmOptions opt;
          opt.seed = g.seed;
          svm.train(f, y, opt);
        }
      }
      std::vector<PredRecord> preds(docs.size());
      parallel_for(docs.size(), g.threads, [&](std::size_t d) {
        const Document& doc = docs[d];
        std::vector<std::size_t> ranking;
        std::vector<double> scores;
        std::vector<int> labels;
        if (base_method == "fuzzy") {
          Rng rng(g.seed + d);
          ranking = fuzzy_ranking(doc, rng);
        } else if (base_method == "lsa") {
          ranking = lsa_ranking(doc, lc->idf, corpus.vocab);
        } else if (base_method == "lexrank" || base_method == "textrank") {
          auto graph = base_method == "lexrank" ? lexrank_graph(doc, lc->idf, corpus.vocab)
                                                : textrank_graph(doc, default_stopwords());
          scores = pagerank(graph).scores;
          ranking = rank_order(scores);
        } else {
          for (const auto& s : doc.sentences) {
            if (base_method == "nb") {
              scores.push_back(nb.predict_proba(s.tokens));
              labels.push_back(nb.predict(s.tokens));
            } else {
              auto f = tfidf_features(s.tokens, lc->idf, corpus.vocab);
              scores.push_back(svm.score(f));
              labels.push_back(svm.predict(f));
            }
          }
          ranking = rank_order(scores);
        }
        auto picked = select_target(ranking, doc, target);
        preds[d] = extractive_record(doc, base_method, "", target, std::move(picked),
                                     std::move(scores), std::move(labels));
      });
      auto out = open_out(base_out);
      write_preds(out, preds);
    } else if (*eval_cmd) {
      auto corpus = load_any_corpus(eval_corpus);
      auto idf = compute_idf(corpus.docs, corpus.vocab, IdfVariant::kReciprocal);
      auto pin = open_in(eval_pred);
      auto gin = open_in(eval_gold);
      auto preds = read_preds(pin);
      auto gold = read_gold(gin);
      std::set<std::string> wanted;
      for (const auto& p : preds) wanted.insert(p.doc_id);
      std::vector<Document> docs;
      for (const auto& d : corpus.docs) {
        if (wanted.count(d.id)) docs.push_back(d);
      }
      auto report = evaluate(preds, gold, docs, corpus.vocab, idf);
      auto out = open_out(eval_report);
      out << report_json(report);
      std::cout << report_text(report);
    } else if (*synth_cmd) {
      synth.seed = g.seed;
      auto sc = synth_corpus(synth);
      auto out = open_out(synth_out);
      for (const auto& d : sc.docs) out << document_to_json(d) << "\n";
      auto gout = open_out(synth_gold);
      write_gold(gout, sc.gold);
    } else if (*exp_cmd) {
      ConfigMap m;
      if (!exp_spec.empty()) m = read_key_values(exp_spec);
      if (app.count("--seed")) m["seed"] = std::to_string(g.seed);
      if (app.count("--threads")) m["threads"] = std::to_string(g.threads);
      if (app.count("--preset")) m["preset"] = g.preset;
      for (const auto& kv : exp_sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw FormatError("--set expects key=value: " + kv);
        m[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      auto spec = ExperimentSpec::from_map(m);
      auto result = run_experiment(spec);
      {
        auto out = open_out(exp_report);
        out << report_text(result.report);
      }
      {
        auto out = open_out(exp_json);
        out << report_json(result.report);
      }
      if (!exp_preds.empty()) {
        auto out = open_out(exp_preds);
        write_preds(out, result.preds);
      }
      std::cout << report_text(result.report);
      if (!result.report.failures.empty()) return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
