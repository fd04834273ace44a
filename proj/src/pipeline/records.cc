#include "ctxsum/records.h"

#include <json.hpp>

#include "ctxsum/error.h"

namespace ctxsum {

using json = nlohmann::json;

namespace {

template <typename F>
void for_each_record(std::istream& in, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(line_no, line, e.what());
    }
  }
}

LabelSource parse_source(const std::string& s) {
  if (s == "blacklist") return LabelSource::kBlacklist;
  if (s == "context_top") return LabelSource::kContextTop;
  if (s == "human") return LabelSource::kHuman;
  throw FormatError("unknown label source: " + s);
}

}  // namespace

void write_gold(std::ostream& out, const std::vector<GoldSummary>& gold) {
  for (const auto& g : gold) {
    json j;
    j["doc_id"] = g.doc_id;
    j["labels"] = g.labels;
    j["summary"] = g.summary;
    j["reference"] = g.reference;
    out << j.dump() << "\n";
  }
}

std::vector<GoldSummary> read_gold(std::istream& in) {
  std::vector<GoldSummary> gold;
  for_each_record(in, [&](const json& j) {
    GoldSummary g;
    g.doc_id = j.at("doc_id").get<std::string>();
    g.labels = j.at("labels").get<std::vector<int>>();
    g.summary = j.at("summary").get<std::vector<std::size_t>>();
    g.reference = j.value("reference", std::string{});
    gold.push_back(std::move(g));
  });
  return gold;
}

void write_labels(std::ostream& out, const std::vector<LabeledSentence>& labels) {
  for (const auto& l : labels) {
    json j;
    j["doc_id"] = l.doc_id;
    j["sentence_index"] = l.sentence_index;
    j["label"] = l.label == Label::kPositive ? 1 : 0;
    j["source"] = to_string(l.source);
    j["score"] = l.score;
    out << j.dump() << "\n";
  }
}

std::vector<LabeledSentence> read_labels(std::istream& in) {
  std::vector<LabeledSentence> labels;
  for_each_record(in, [&](const json& j) {
    LabeledSentence l;
    l.doc_id = j.at("doc_id").get<std::string>();
    l.sentence_index = j.at("sentence_index").get<std::size_t>();
    l.label = j.at("label").get<int>() != 0 ? Label::kPositive : Label::kNegative;
    l.source = parse_source(j.value("source", std::string("human")));
    l.score = j.value("score", 0.0);
    labels.push_back(std::move(l));
  });
  return labels;
}

std::string pred_to_json(const PredRecord& p) {
  json j;
  j["doc_id"] = p.doc_id;
  j["model"] = p.model;
  j["setting"] = p.setting;
  j["target"] = p.target;
  j["kind"] = p.kind == SummaryKind::kExtractive ? "extractive" : "abstractive";
  j["sentences"] = p.sentences;
  j["text"] = p.text;
  j["scores"] = p.scores;
  j["labels"] = p.labels;
  return j.dump();
}

namespace {

PredRecord pred_from(const json& j) {
  PredRecord p;
  p.doc_id = j.at("doc_id").get<std::string>();
  p.model = j.at("model").get<std::string>();
  p.setting = j.value("setting", std::string{});
  p.target = j.value("target", std::string{});
  const std::string kind = j.value("kind", std::string("extractive"));
  if (kind == "extractive") {
    p.kind = SummaryKind::kExtractive;
  } else if (kind == "abstractive") {
    p.kind = SummaryKind::kAbstractive;
  } else {
    throw FormatError("unknown summary kind: " + kind);
  }
  p.sentences = j.value("sentences", std::vector<std::size_t>{});
  p.text = j.value("text", std::string{});
  p.scores = j.value("scores", std::vector<double>{});
  p.labels = j.value("labels", std::vector<int>{});
  return p;
}

}  // namespace

PredRecord pred_from_json(const std::string& line) {
  try {
    return pred_from(json::parse(line));
  } catch (const json::exception& e) {
    throw ParseError(1, line, e.what());
  }
}

void write_preds(std::ostream& out, const std::vector<PredRecord>& preds) {
  for (const auto& p : preds) out << pred_to_json(p) << "\n";
}

std::vector<PredRecord> read_preds(std::istream& in) {
  std::vector<PredRecord> preds;
  for_each_record(in, [&](const json& j) { preds.push_back(pred_from(j)); });
  return preds;
}

}  // namespace ctxsum
