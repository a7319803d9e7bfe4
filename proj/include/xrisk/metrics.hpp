#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "xrisk/csv.hpp"
#include "xrisk/error.hpp"

namespace xrisk {

// Scores with either signed binary labels (+1/-1) or nonnegative relevance
// grades; which reading applies depends on the metric.
struct LabeledScores {
  std::vector<double> scores;
  std::vector<double> labels;
};

namespace detail {

inline void check_lengths(const LabeledScores& ls) {
  require(ls.scores.size() == ls.labels.size(), ErrorKind::shape,
          "scores and labels must have equal length");
  require(!ls.scores.empty(), ErrorKind::shape, "empty input");
  for (double s : ls.scores)
    require(std::isfinite(s), ErrorKind::numeric_domain, "non-finite score");
}

struct BinaryCounts {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// Binary reading: label > 0 is positive. Strict +1/-1 inputs and 0/grade
// inputs both map through this.
inline BinaryCounts check_binary(const LabeledScores& ls) {
  check_lengths(ls);
  BinaryCounts c;
  for (double y : ls.labels) {
    if (y > 0)
      ++c.n_pos;
    else
      ++c.n_neg;
  }
  require(c.n_pos >= 1 && c.n_neg >= 1, ErrorKind::degenerate_labels,
          "binary metric needs at least one positive and one negative");
  return c;
}

// Indices sorted by (score desc, index asc): the stable tie-break used for
// top-k selection everywhere.
inline std::vector<std::size_t> order_by_score_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

}  // namespace detail

// Fraction of correctly ordered positive-negative pairs, ties counting 1/2.
// Computed from midranks (Mann-Whitney U), not by pair enumeration.
inline double auroc(const LabeledScores& ls) {
  auto counts = detail::check_binary(ls);
  const std::size_t n = ls.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ls.scores[a] < ls.scores[b];
  });
  // midrank in doubled units to stay exact on ties
  std::vector<double> rank2(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && ls.scores[order[j + 1]] == ls.scores[order[i]]) ++j;
    double mid2 = static_cast<double>(i + 1 + j + 1);  // 2 * average 1-based rank
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = mid2;
    i = j + 1;
  }
  double pos_rank2_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (ls.labels[k] > 0) pos_rank2_sum += rank2[k];
  double np = static_cast<double>(counts.n_pos);
  double nn = static_cast<double>(counts.n_neg);
  double u = 0.5 * pos_rank2_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

// AP with the >= tie convention: for each positive i, the term is
// #{pos j: s_j >= s_i} / #{all j: s_j >= s_i}.
inline double average_precision(const LabeledScores& ls) {
  detail::check_lengths(ls);
  std::size_t n_pos = 0;
  for (double y : ls.labels)
    if (y > 0) ++n_pos;
  require(n_pos >= 1, ErrorKind::degenerate_labels, "average_precision needs a positive");

  auto order = detail::order_by_score_desc(ls.scores);
  const std::size_t n = ls.scores.size();
  double sum = 0.0;
  std::size_t seen_all = 0, seen_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && ls.scores[order[j + 1]] == ls.scores[order[i]]) ++j;
    std::size_t group_pos = 0;
    for (std::size_t k = i; k <= j; ++k)
      if (ls.labels[order[k]] > 0) ++group_pos;
    seen_all += j - i + 1;
    seen_pos += group_pos;
    // every positive in this tie group sees all scores >= its own
    sum += static_cast<double>(group_pos) * static_cast<double>(seen_pos) /
           static_cast<double>(seen_all);
    i = j + 1;
  }
  return sum / static_cast<double>(n_pos);
}

// One-way pAUC: pairwise count restricted to the k = floor(n_neg * beta)
// highest-scoring negatives, normalized by n_pos * k.
inline double partial_auc(const LabeledScores& ls, double beta) {
  auto counts = detail::check_binary(ls);
  require(beta > 0.0 && beta <= 1.0, ErrorKind::configuration,
          "beta must be in (0,1]");
  std::size_t k = static_cast<std::size_t>(
      std::floor(static_cast<double>(counts.n_neg) * beta));
  require(k >= 1, ErrorKind::configuration,
          "beta too small: floor(n_neg*beta) = 0");

  std::vector<std::size_t> negs;
  std::vector<double> pos_scores;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (ls.labels[i] > 0)
      pos_scores.push_back(ls.scores[i]);
    else
      negs.push_back(i);
  }
  std::sort(negs.begin(), negs.end(), [&](std::size_t a, std::size_t b) {
    if (ls.scores[a] != ls.scores[b]) return ls.scores[a] > ls.scores[b];
    return a < b;
  });
  negs.resize(k);

  std::sort(pos_scores.begin(), pos_scores.end());
  double count = 0.0;
  for (std::size_t j : negs) {
    double s = ls.scores[j];
    // positives strictly above s, plus half of the ties
    auto lo = std::lower_bound(pos_scores.begin(), pos_scores.end(), s);
    auto hi = std::upper_bound(pos_scores.begin(), pos_scores.end(), s);
    count += static_cast<double>(pos_scores.end() - hi) +
             0.5 * static_cast<double>(hi - lo);
  }
  return count / (static_cast<double>(counts.n_pos) * static_cast<double>(k));
}

// NDCG@k with gain 2^y - 1, discount log2(rank+1), score ties broken by
// stable index order.
inline double ndcg_at_k(const std::vector<double>& relevances,
                        const std::vector<double>& scores, std::size_t k) {
  require(relevances.size() == scores.size(), ErrorKind::shape,
          "relevances and scores must have equal length");
  require(!scores.empty(), ErrorKind::shape, "empty input");
  require(k >= 1, ErrorKind::configuration, "k must be >= 1");
  double max_rel = 0.0;
  for (double y : relevances) {
    require(std::isfinite(y) && y >= 0.0, ErrorKind::numeric_domain,
            "relevance grades must be finite and >= 0");
    max_rel = std::max(max_rel, y);
  }
  require(max_rel > 0.0, ErrorKind::degenerate_labels, "all-zero relevance");

  const std::size_t top = std::min(k, scores.size());
  auto order = detail::order_by_score_desc(scores);
  double dcg = 0.0;
  for (std::size_t r = 0; r < top; ++r)
    dcg += (std::exp2(relevances[order[r]]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);

  std::vector<double> ideal = relevances;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < top; ++r)
    idcg += (std::exp2(ideal[r]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

// A metric request as written in configs: auroc | ap | pauc:<beta> | ndcg:<k>.
struct MetricRequest {
  enum class Kind { auroc, ap, pauc, ndcg } kind;
  double beta = 0.3;
  std::size_t k = 5;
  std::string name;  // the literal request token, echoed in outputs
};

inline MetricRequest parse_metric(const std::string& token) {
  MetricRequest m;
  m.name = token;
  std::string head = token;
  std::string arg;
  if (auto pos = token.find(':'); pos != std::string::npos) {
    head = token.substr(0, pos);
    arg = token.substr(pos + 1);
  }
  if (head == "auroc") {
    m.kind = MetricRequest::Kind::auroc;
  } else if (head == "ap") {
    m.kind = MetricRequest::Kind::ap;
  } else if (head == "pauc") {
    m.kind = MetricRequest::Kind::pauc;
    if (!arg.empty()) m.beta = parse_double(arg, "metric '" + token + "'");
  } else if (head == "ndcg") {
    m.kind = MetricRequest::Kind::ndcg;
    if (!arg.empty()) {
      long long k = parse_int(arg, "metric '" + token + "'");
      require(k >= 1, ErrorKind::configuration, "ndcg cutoff must be >= 1");
      m.k = static_cast<std::size_t>(k);
    }
  } else {
    fail(ErrorKind::configuration, "unknown metric '" + token + "'");
  }
  return m;
}

inline std::vector<MetricRequest> parse_metric_list(const std::string& csv_list) {
  std::vector<MetricRequest> out;
  for (const auto& tok : split(csv_list)) {
    auto t = trim(tok);
    if (!t.empty()) out.push_back(parse_metric(t));
  }
  require(!out.empty(), ErrorKind::configuration, "empty metric list");
  return out;
}

// All-in-one evaluation; returns (request name, value) in request order.
// Labels may be +1/-1 or nonnegative grades: binary metrics read label>0 as
// positive, ndcg reads max(label, 0) as the grade.
inline std::vector<std::pair<std::string, double>> evaluate_all(
    const LabeledScores& ls, const std::vector<MetricRequest>& which) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& m : which) {
    double v = 0.0;
    switch (m.kind) {
      case MetricRequest::Kind::auroc: v = auroc(ls); break;
      case MetricRequest::Kind::ap:    v = average_precision(ls); break;
      case MetricRequest::Kind::pauc:  v = partial_auc(ls, m.beta); break;
      case MetricRequest::Kind::ndcg: {
        std::vector<double> rel(ls.labels.size());
        for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = std::max(ls.labels[i], 0.0);
        v = ndcg_at_k(rel, ls.scores, m.k);
        break;
      }
    }
    out.emplace_back(m.name, v);
  }
  return out;
}

}  // namespace xrisk
