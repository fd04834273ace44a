#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ctxsum/baselines.h"
#include "ctxsum/error.h"

namespace ctxsum {

void NaiveBayes::train(const std::vector<std::vector<std::string>>& docs,
                       std::span<const int> labels) {
  if (docs.empty()) throw EmptyTrainingSet();
  if (docs.size() != labels.size()) throw DimMismatch("one label per document");
  std::size_t class_docs[2] = {0, 0};
  std::map<std::string, double> counts[2];
  double totals[2] = {0, 0};
  std::set<std::string> vocab;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const int c = labels[i] != 0;
    ++class_docs[c];
    for (const auto& w : docs[i]) {
      counts[c][w] += 1.0;
      totals[c] += 1.0;
      vocab.insert(w);
    }
  }
  if (class_docs[0] == 0 || class_docs[1] == 0) throw SingleClassData();
  const double v = static_cast<double>(vocab.size());
  for (int c = 0; c < 2; ++c) {
    log_prior_[c] = std::log(static_cast<double>(class_docs[c]) /
                             static_cast<double>(docs.size()));
    log_likelihood_[c].clear();
    for (const auto& w : vocab) {
      auto it = counts[c].find(w);
      const double k = it == counts[c].end() ? 0.0 : it->second;
      log_likelihood_[c][w] = std::log((k + 1.0) / (totals[c] + v));
    }
  }
}

double NaiveBayes::log_joint(std::span<const std::string> tokens, int cls) const {
  const int c = cls != 0;
  double s = log_prior_[c];
  for (const auto& w : tokens) {
    auto it = log_likelihood_[c].find(w);
    if (it != log_likelihood_[c].end()) s += it->second;
  }
  return s;
}

double NaiveBayes::predict_proba(std::span<const std::string> tokens) const {
  const double a = log_joint(tokens, 0), b = log_joint(tokens, 1);
  return 1.0 / (1.0 + std::exp(a - b));
}

int NaiveBayes::predict(std::span<const std::string> tokens) const {
  return log_joint(tokens, 1) > log_joint(tokens, 0) ? 1 : 0;
}

FeatureVector tfidf_features(std::span<const std::string> tokens,
                             const IdfTable& idf, const Vocabulary& vocab) {
  FeatureVector f;
  for (const auto& t : tokens) {
    auto id = vocab.find(t);
    if (id) f[t] += idf.idf(*id);
  }
  double sq = 0.0;
  for (const auto& [w, x] : f) sq += x * x;
  if (sq > 0) {
    const double n = std::sqrt(sq);
    for (auto& [w, x] : f) x /= n;
  }
  return f;
}

void LinearSvm::train(const std::vector<FeatureVector>& x,
                      std::span<const int> labels, const SvmOptions& options) {
  if (x.empty()) throw EmptyTrainingSet();
  if (x.size() != labels.size()) throw DimMismatch("one label per example");
  if (options.lambda <= 0) throw BadProb("svm lambda must be positive");

  // Dense weights over the training features, scaled lazily: w = scale * raw.
  std::map<std::string, std::size_t> index;
  for (const auto& f : x) {
    for (const auto& [w, v] : f) index.emplace(w, 0);
  }
  std::size_t next = 0;
  for (auto& [w, i] : index) i = next++;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  for (const auto& f : x) {
    std::vector<std::pair<std::size_t, double>> r;
    for (const auto& [w, v] : f) r.emplace_back(index[w], v);
    rows.push_back(std::move(r));
  }

  std::vector<double> raw(index.size(), 0.0);
  double scale = 1.0, b = 0.0;
  Rng rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  const std::size_t steps = static_cast<std::size_t>(std::max(options.epochs, 0)) * x.size();
  for (std::size_t t = 1; t <= steps; ++t) {
    const std::size_t i = pick(rng);
    const double y = labels[i] != 0 ? 1.0 : -1.0;
    const double eta = 1.0 / (options.lambda * static_cast<double>(t));
    double margin = b;
    for (const auto& [j, v] : rows[i]) margin += scale * raw[j] * v;
    margin *= y;
    const double shrink = 1.0 - eta * options.lambda;
    if (shrink <= 0.0) {
      std::fill(raw.begin(), raw.end(), 0.0);
      scale = 1.0;
    } else {
      scale *= shrink;
    }
    if (margin < 1.0) {
      for (const auto& [j, v] : rows[i]) raw[j] += eta * y * v / scale;
      b += eta * y * options.lambda;  // unregularised bias, step 1/t
    }
    if (scale < 1e-9) {
      for (double& r : raw) r *= scale;
      scale = 1.0;
    }
  }
  weights_.clear();
  for (const auto& [w, j] : index) {
    const double v = scale * raw[j];
    if (v != 0.0) weights_[w] = v;
  }
  bias_ = b;
}

double LinearSvm::score(const FeatureVector& x) const {
  double s = bias_;
  for (const auto& [w, v] : x) {
    auto it = weights_.find(w);
    if (it != weights_.end()) s += it->second * v;
  }
  return s;
}

}  // namespace ctxsum
