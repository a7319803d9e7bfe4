#pragma once

// Brute-force references shared by the unit and acceptance suites. These stay
// deliberately naive (double loops straight from the definitions) and must
// not reuse the library's computation paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "xrisk/metrics.hpp"
#include "xrisk/rng.hpp"

namespace brute {

inline double auroc(const xrisk::LabeledScores& ls) {
  double count = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (ls.labels[i] <= 0) continue;
    ++n_pos;
    for (std::size_t j = 0; j < ls.scores.size(); ++j) {
      if (ls.labels[j] > 0) continue;
      if (ls.scores[i] > ls.scores[j])
        count += 1.0;
      else if (ls.scores[i] == ls.scores[j])
        count += 0.5;
    }
  }
  for (double y : ls.labels)
    if (y <= 0) ++n_neg;
  return count / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double average_precision(const xrisk::LabeledScores& ls) {
  double sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (ls.labels[i] <= 0) continue;
    ++n_pos;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < ls.scores.size(); ++j) {
      if (ls.scores[j] >= ls.scores[i]) {
        den += 1.0;
        if (ls.labels[j] > 0) num += 1.0;
      }
    }
    sum += num / den;
  }
  return sum / static_cast<double>(n_pos);
}

inline double partial_auc(const xrisk::LabeledScores& ls, double beta) {
  std::vector<std::size_t> neg;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (ls.labels[i] > 0)
      ++n_pos;
    else
      neg.push_back(i);
  }
  auto k = static_cast<std::size_t>(std::floor(static_cast<double>(neg.size()) * beta));
  std::stable_sort(neg.begin(), neg.end(), [&](std::size_t a, std::size_t b) {
    return ls.scores[a] > ls.scores[b];
  });
  neg.resize(k);
  double count = 0.0;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (ls.labels[i] <= 0) continue;
    for (std::size_t j : neg) {
      if (ls.scores[i] > ls.scores[j])
        count += 1.0;
      else if (ls.scores[i] == ls.scores[j])
        count += 0.5;
    }
  }
  return count / (static_cast<double>(n_pos) * static_cast<double>(k));
}

// Counting-rank route: position of i under (score desc, index asc) computed
// pairwise, no sorting.
inline double ndcg_at_k(const std::vector<double>& rel, const std::vector<double>& scores,
                        std::size_t k) {
  const std::size_t n = scores.size();
  auto rank_of = [n](const std::vector<double>& key, std::size_t i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (key[j] > key[i] || (key[j] == key[i] && j < i)) ++r;
    }
    return r;
  };
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = rank_of(scores, i);
    if (r <= k) dcg += (std::exp2(rel[i]) - 1.0) / std::log2(static_cast<double>(r) + 1.0);
    std::size_t ri = rank_of(rel, i);
    if (ri <= k) idcg += (std::exp2(rel[i]) - 1.0) / std::log2(static_cast<double>(ri) + 1.0);
  }
  return dcg / idcg;
}

// Random instance with ties: scores on a coarse grid, both classes present.
inline xrisk::LabeledScores random_tied_instance(xrisk::Rng& rng, std::size_t max_n = 50) {
  std::size_t n = 2 + rng.below(max_n - 1);
  xrisk::LabeledScores ls;
  ls.scores.resize(n);
  ls.labels.resize(n);
  for (;;) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ls.scores[i] = static_cast<double>(rng.below(9)) / 8.0;
      bool pos = rng.below(2) == 0;
      ls.labels[i] = pos ? 1.0 : -1.0;
      n_pos += pos;
    }
    if (n_pos >= 1 && n_pos < n) return ls;
  }
}

}  // namespace brute
