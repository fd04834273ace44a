#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxsum/baselines.h"
#include "ctxsum/error.h"
#include <map>

namespace ctxsum {

SvdResult jacobi_svd(const Matrix& a) {
  const std::size_t m = a.size();
  const std::size_t n = m == 0 ? 0 : a[0].size();
  for (const auto& row : a) {
    if (row.size() != n) throw ShapeMismatch("jacobi_svd: ragged matrix");
  }
  // Work on columns: u[j] is column j of A, rotated until pairwise orthogonal.
  std::vector<std::vector<double>> u(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) u[j][i] = a[i][j];
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u[p][i] * u[p][i];
          beta += u[q][i] * u[q][i];
          gamma += u[p][i] * u[q][i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u[p][i], uq = u[q][i];
          u[p][i] = c * up - s * uq;
          u[q][i] = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[i][p], vq = v[i][q];
          v[i][p] = c * vp - s * vq;
          v[i][q] = s * vp + c * vq;
        }
      }
    }
    if (off < 1e-15) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0;
    for (double x : u[j]) sq += x * x;
    sigma[j] = std::sqrt(sq);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
  SvdResult r;
  r.v.assign(n, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    r.singular_values.push_back(sigma[order[k]]);
    for (std::size_t i = 0; i < n; ++i) r.v[i][k] = v[i][order[k]];
  }
  return r;
}

Matrix term_sentence_matrix(const Document& doc, const IdfTable& idf,
                            const Vocabulary& vocab) {
  std::map<std::string, std::size_t> terms;
  for (const auto& s : doc.sentences)
    for (const auto& t : s.tokens)
      if (vocab.contains(t)) terms.emplace(t, 0);
  std::size_t next = 0;
  for (auto& [w, i] : terms) i = next++;
  Matrix a(terms.size(), std::vector<double>(doc.sentences.size(), 0.0));
  for (std::size_t j = 0; j < doc.sentences.size(); ++j) {
    for (const auto& t : doc.sentences[j].tokens) {
      auto it = terms.find(t);
      if (it != terms.end()) a[it->second][j] += idf.idf(t);
    }
  }
  return a;
}

std::vector<std::size_t> lsa_ranking(const Document& doc, const IdfTable& idf,
                                     const Vocabulary& vocab) {
  const std::size_t count = doc.sentences.size();
  const std::size_t n = count;
  std::vector<std::size_t> picked;
  std::vector<bool> taken(count, false);
  Matrix a = term_sentence_matrix(doc, idf, vocab);
  if (!a.empty() && count > 0) {
    SvdResult svd = jacobi_svd(a);
    for (std::size_t k = 0; k < svd.singular_values.size() && picked.size() < n; ++k) {
      if (svd.singular_values[k] <= 1e-12) break;
      std::size_t best = count;
      for (std::size_t j = 0; j < count; ++j) {
        if (taken[j]) continue;
        if (best == count || std::abs(svd.v[j][k]) > std::abs(svd.v[best][k])) best = j;
      }
      if (best == count) break;
      taken[best] = true;
      picked.push_back(best);
    }
  }
  // Topics exhausted: fill in document order.
  for (std::size_t j = 0; j < count && picked.size() < n; ++j) {
    if (!taken[j]) {
      taken[j] = true;
      picked.push_back(j);
    }
  }
  return picked;
}

std::vector<std::size_t> lsa_summarize(const Document& doc, std::size_t n,
                                       const IdfTable& idf,
                                       const Vocabulary& vocab) {
  auto picked = lsa_ranking(doc, idf, vocab);
  picked.resize(std::min(n, picked.size()));
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace ctxsum
