#pragma once

// Reference implementations used only by tests. Each one is written the
// slow, obvious way so it shares nothing with the code under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctxsum/models.h"
#include "ctxsum/nn/tensor.h"

namespace oracle {

using ctxsum::nn::Tensor;

// Largest relative error between backprop gradients and central differences
// over every entry of `params`. Entries where both gradients are tiny are
// compared against `floor` instead of their own magnitude.
inline double grad_check(std::vector<Tensor<double>> params,
                         const std::function<Tensor<double>()>& loss_fn,
                         double eps = 1e-5, double floor = 1e-6) {
  for (auto& p : params) p.zero_grad();
  Tensor<double> loss = loss_fn();
  loss.backward();
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) {
    auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& v = params[k].values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + eps;
      const double up = loss_fn().item();
      v[i] = saved - eps;
      const double down = loss_fn().item();
      v[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

// Longest common subsequence by trying every subsequence of `a`.
inline std::size_t brute_lcs(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) sub.push_back(a[i]);
    }
    std::size_t j = 0;
    for (const auto& w : b) {
      if (j < sub.size() && sub[j] == w) ++j;
    }
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

// Stationary vector of x = (1 - d)/n + d P^T x by a dense linear solve.
inline std::vector<double> dense_pagerank(const std::vector<std::vector<double>>& w,
                                          double d) {
  const auto n = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) row += w[i][j];
    for (Eigen::Index j = 0; j < n; ++j) {
      p(i, j) = row > 0 ? w[i][j] / row : 1.0 / static_cast<double>(n);
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - d * p.transpose();
  Eigen::VectorXd b = Eigen::VectorXd::Constant(n, (1 - d) / static_cast<double>(n));
  Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + n};
}

// Singular values as square roots of the eigenvalues of A^T A, descending.
inline std::vector<double> gram_singular_values(const std::vector<std::vector<double>>& a) {
  const auto m = static_cast<Eigen::Index>(a.size());
  const auto n = static_cast<Eigen::Index>(a.empty() ? 0 : a[0].size());
  Eigen::MatrixXd x(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = a[i][j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x);
  std::vector<double> s;
  for (Eigen::Index i = 0; i < n; ++i) s.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
  std::sort(s.rbegin(), s.rend());
  return s;
}

// NDCG with the ideal DCG found by trying every ordering.
inline double brute_ndcg(std::vector<double> rel, std::size_t k) {
  auto dcg = [&](const std::vector<double>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(k, r.size()); ++i) s += r[i] / std::log2(i + 2.0);
    return s;
  };
  const double actual = dcg(rel);
  std::sort(rel.begin(), rel.end());
  double ideal = 0.0;
  do {
    ideal = std::max(ideal, dcg(rel));
  } while (std::next_permutation(rel.begin(), rel.end()));
  return ideal > 0 ? actual / ideal : 0.0;
}

// AP@k straight from the definition.
inline double brute_ap(const std::vector<int>& rel, std::size_t k) {
  const std::size_t total = static_cast<std::size_t>(std::count(rel.begin(), rel.end(), 1));
  if (total == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) {
    if (!rel[i]) continue;
    double hits = 0;
    for (std::size_t j = 0; j <= i; ++j) hits += rel[j];
    sum += hits / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(std::min(k, total));
}

struct Scored {
  std::vector<int> ids;
  double logprob = -std::numeric_limits<double>::infinity();
};

// Best completed hypothesis over every sequence of allowed tokens up to
// max_len, scored by re-running the model from scratch for each prefix.
inline Scored exhaustive_decode(const ctxsum::Seq2SeqModel& model,
                                const std::vector<std::string>& input,
                                const std::vector<double>* v_d, std::size_t max_len) {
  const auto allowed = ctxsum::allowed_ids(model, input);
  auto step_logprob = [&](const std::vector<int>& prefix, int token) {
    auto lp = ctxsum::next_token_logprobs(model, input, v_d, prefix);
    double mx = -std::numeric_limits<double>::infinity();
    for (int a : allowed) mx = std::max(mx, lp[static_cast<std::size_t>(a)]);
    double z = 0.0;
    for (int a : allowed) z += std::exp(lp[static_cast<std::size_t>(a)] - mx);
    return lp[static_cast<std::size_t>(token)] - (mx + std::log(z));
  };
  Scored best;
  std::function<void(std::vector<int>&, double)> walk = [&](std::vector<int>& prefix,
                                                            double lp) {
    for (int a : allowed) {
      const double next = lp + step_logprob(prefix, a);
      if (a == ctxsum::kStopId) {
        if (next > best.logprob) best = {prefix, next};
        continue;
      }
      prefix.push_back(a);
      if (prefix.size() >= max_len) {
        if (next > best.logprob) best = {prefix, next};
      } else {
        walk(prefix, next);
      }
      prefix.pop_back();
    }
  };
  std::vector<int> prefix;
  walk(prefix, 0.0);
  return best;
}

// Plug-in mutual information (nats) between two discrete variables given
// as paired samples.
inline double plugin_mi(const std::vector<std::string>& x, const std::vector<int>& y) {
  std::map<std::string, double> px;
  std::map<int, double> py;
  std::map<std::pair<std::string, int>, double> pxy;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    px[x[i]] += 1;
    py[y[i]] += 1;
    pxy[{x[i], y[i]}] += 1;
  }
  double mi = 0.0;
  for (const auto& [key, c] : pxy) {
    mi += (c / n) * std::log((c / n) / ((px[key.first] / n) * (py[key.second] / n)));
  }
  return mi;
}

}  // namespace oracle
