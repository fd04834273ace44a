#include <algorithm>
#include <cmath>
#include <map>

#include "ctxsum/error.h"
#include "ctxsum/metrics.h"

namespace ctxsum {

namespace {

std::map<std::vector<std::string>, std::size_t> ngram_counts(
    std::span<const std::string> tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> out;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

PrfScore prf(double overlap, double cand_total, double ref_total) {
  PrfScore s;
  if (cand_total <= 0 || ref_total <= 0) return s;
  s.precision = overlap / cand_total;
  s.recall = overlap / ref_total;
  if (s.precision + s.recall > 0) {
    s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

double cosine_maps(const std::map<std::string, double>& a,
                   const std::map<std::string, double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [w, x] : a) {
    na += x * x;
    auto it = b.find(w);
    if (it != b.end()) dot += x * it->second;
  }
  for (const auto& [w, y] : b) nb += y * y;
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace

PrfScore rouge_n(std::span<const std::string> candidate,
                 std::span<const std::string> reference, std::size_t n) {
  auto c = ngram_counts(candidate, n);
  auto r = ngram_counts(reference, n);
  std::size_t overlap = 0, ct = 0, rt = 0;
  for (const auto& [g, k] : c) {
    ct += k;
    auto it = r.find(g);
    if (it != r.end()) overlap += std::min(k, it->second);
  }
  for (const auto& [g, k] : r) rt += k;
  return prf(static_cast<double>(overlap), static_cast<double>(ct),
             static_cast<double>(rt));
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrfScore rouge_lcs(std::span<const std::string> candidate,
                   std::span<const std::string> reference) {
  return prf(static_cast<double>(lcs_length(candidate, reference)),
             static_cast<double>(candidate.size()),
             static_cast<double>(reference.size()));
}

double bleu(std::span<const std::string> candidate,
            const std::vector<Tokens>& references, std::size_t max_n) {
  if (candidate.empty() || references.empty()) return 0.0;
  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    auto c = ngram_counts(candidate, n);
    if (c.empty()) continue;
    std::map<std::vector<std::string>, std::size_t> max_ref;
    for (const auto& ref : references) {
      for (const auto& [g, k] : ngram_counts(ref, n)) {
        max_ref[g] = std::max(max_ref[g], k);
      }
    }
    std::size_t clipped = 0, total = 0;
    for (const auto& [g, k] : c) {
      total += k;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(k, it->second);
    }
    if (clipped == 0) return 0.0;
    log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double c_len = static_cast<double>(candidate.size());
  double r_len = static_cast<double>(references[0].size());
  for (const auto& ref : references) {
    const double len = static_cast<double>(ref.size());
    const double d = std::abs(len - c_len), best = std::abs(r_len - c_len);
    if (d < best || (d == best && len < r_len)) r_len = len;
  }
  const double bp = c_len < r_len ? std::exp(1.0 - r_len / c_len) : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(orders));
}

double token_similarity(std::span<const std::string> candidate,
                        std::span<const std::string> reference,
                        const IdfTable& idf) {
  auto bag = [&](std::span<const std::string> tokens) {
    std::map<std::string, double> tf;
    for (const auto& t : tokens) tf[t] += 1.0;
    std::map<std::string, double> out;
    for (const auto& [w, f] : tf) {
      double weight = 0.0;
      try {
        weight = idf.idf(w);
      } catch (const UnknownWord&) {
        weight = 0.0;
      }
      if (weight > 0) out[w] = f * weight;
    }
    return out;
  };
  return cosine_maps(bag(candidate), bag(reference));
}

WordSet topic_words(std::span<const std::string> source, const IdfTable& idf,
                    const Vocabulary& vocab, std::size_t q) {
  std::map<std::string, double> seen;
  for (const auto& t : source) {
    auto id = vocab.find(t);
    if (id) seen[t] = idf.idf(*id);
  }
  std::vector<std::pair<std::string, double>> ranked(seen.begin(), seen.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  WordSet out;
  for (std::size_t i = 0; i < ranked.size() && i < q; ++i) out.insert(ranked[i].first);
  return out;
}

double topic_similarity(std::span<const std::string> candidate,
                        std::span<const std::string> reference,
                        const WordSet& topic) {
  auto indicator = [&](std::span<const std::string> tokens) {
    std::map<std::string, double> out;
    for (const auto& t : tokens) {
      if (topic.count(t)) out[t] = 1.0;
    }
    return out;
  };
  return cosine_maps(indicator(candidate), indicator(reference));
}

}  // namespace ctxsum
