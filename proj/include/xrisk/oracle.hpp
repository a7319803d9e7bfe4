#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "xrisk/dataset.hpp"
#include "xrisk/error.hpp"
#include "xrisk/losses.hpp"
#include "xrisk/model.hpp"
#include "xrisk/surrogate.hpp"

namespace xrisk {

enum class LossKind { aucm, ap, pauc, ndcg, listwise_ce, gcl, ce, focal };

inline LossKind parse_loss_kind(const std::string& s) {
  if (s == "aucm") return LossKind::aucm;
  if (s == "ap") return LossKind::ap;
  if (s == "pauc") return LossKind::pauc;
  if (s == "ndcg") return LossKind::ndcg;
  if (s == "listwise_ce") return LossKind::listwise_ce;
  if (s == "gcl") return LossKind::gcl;
  if (s == "ce") return LossKind::ce;
  if (s == "focal") return LossKind::focal;
  fail(ErrorKind::configuration, "unknown loss '" + s + "'");
}

inline const char* loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::aucm:        return "aucm";
    case LossKind::ap:          return "ap";
    case LossKind::pauc:        return "pauc";
    case LossKind::ndcg:        return "ndcg";
    case LossKind::listwise_ce: return "listwise_ce";
    case LossKind::gcl:         return "gcl";
    case LossKind::ce:          return "ce";
    case LossKind::focal:       return "focal";
  }
  return "?";
}

// Full-objective description for the brute-force references. Everything here
// is exact double loops over the whole dataset, guarded to desk sizes.
struct ObjectiveSpec {
  LossKind kind = LossKind::pauc;
  Surrogate surrogate;
  double lambda = 1.0;       // pauc
  double tau = 0.5;          // gcl
  double focal_alpha_hat = 1.0;
  double focal_gamma_hat = 0.5;
  MinMaxState minmax;        // aucm
  const IndexedDataset* data = nullptr;
  const ScoringModel* model = nullptr;
};

namespace oracle_detail {

inline void size_guard(const ObjectiveSpec& spec) {
  require(spec.data && spec.model, ErrorKind::configuration, "oracle spec incomplete");
  require(spec.data->features.rows <= 200, ErrorKind::configuration,
          "oracle size guard: n <= 200");
  require(spec.data->dim() <= 64, ErrorKind::configuration, "oracle size guard: d <= 64");
}

inline Matrix all_scores(const ObjectiveSpec& spec, const ParamVector& w) {
  return spec.model->forward(w, spec.data->features);
}

inline Matrix unit_rows(const Matrix& e) {
  Matrix u = e;
  for (std::size_t r = 0; r < e.rows; ++r) {
    double nrm = std::max(l2_norm(e.row(r)), 1e-12);
    for (std::size_t c = 0; c < e.cols; ++c) u.at(r, c) /= nrm;
  }
  return u;
}

}  // namespace oracle_detail

// Exact per-anchor inner values g_i by full double loop. Anchor order:
// pauc/ap: dataset positives in index order; ndcg/listwise: relevant items in
// index order; gcl: all 2n view rows.
inline std::vector<double> exact_inner_values(const ObjectiveSpec& spec,
                                              const ParamVector& w) {
  oracle_detail::size_guard(spec);
  const IndexedDataset& ds = *spec.data;
  Matrix h = oracle_detail::all_scores(spec, w);
  std::vector<double> g;

  switch (spec.kind) {
    case LossKind::pauc: {
      auto pos = ds.positive_indices();
      auto neg = ds.negative_indices();
      require(!pos.empty() && !neg.empty(), ErrorKind::degenerate_labels,
              "pauc needs both classes");
      for (std::size_t i : pos) {
        double acc = 0.0;
        for (std::size_t j : neg)
          acc += std::exp(spec.surrogate.value(h.at(j, 0) - h.at(i, 0)) / spec.lambda);
        g.push_back(acc / static_cast<double>(neg.size()));
      }
      break;
    }
    case LossKind::listwise_ce: {
      auto items = ds.items_by_query();
      for (const auto& q_items : items)
        for (std::size_t i : q_items) {
          if (ds.targets[i] <= 0) continue;
          double acc = 0.0;
          for (std::size_t j : q_items) acc += std::exp(h.at(j, 0) - h.at(i, 0));
          g.push_back(acc / static_cast<double>(q_items.size()));
        }
      break;
    }
    case LossKind::ndcg: {
      auto items = ds.items_by_query();
      for (const auto& q_items : items)
        for (std::size_t i : q_items) {
          if (ds.targets[i] <= 0) continue;
          double acc = 0.0;
          for (std::size_t j : q_items)
            acc += spec.surrogate.value(h.at(j, 0) - h.at(i, 0));
          g.push_back(acc);  // sum form: the rank surrogate lives on [~, N_q]
        }
      break;
    }
    case LossKind::gcl: {
      Matrix unit = oracle_detail::unit_rows(h);
      const std::size_t rows = h.rows;
      for (std::size_t r = 0; r < rows; ++r) {
        std::size_t partner = r ^ 1;
        double acc = 0.0;
        for (std::size_t c = 0; c < rows; ++c) {
          if (c == r || c == partner) continue;
          acc += std::exp(dot(unit.row(r), unit.row(c)) / spec.tau);
        }
        g.push_back(acc / static_cast<double>(rows - 2));
      }
      break;
    }
    default:
      fail(ErrorKind::configuration, "exact_inner_values: loss has no inner function");
  }
  return g;
}

// Paired inner values for AP: g1 = mean surrogate over positives, g2 over the
// whole set (self-pair included in both).
inline std::pair<std::vector<double>, std::vector<double>> exact_inner_values_ap(
    const ObjectiveSpec& spec, const ParamVector& w) {
  oracle_detail::size_guard(spec);
  const IndexedDataset& ds = *spec.data;
  Matrix h = oracle_detail::all_scores(spec, w);
  auto pos = ds.positive_indices();
  require(!pos.empty(), ErrorKind::degenerate_labels, "ap needs a positive");
  std::vector<double> g1, g2;
  const std::size_t n = ds.features.rows;
  for (std::size_t i : pos) {
    double sum_pos = 0.0, sum_all = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double v = spec.surrogate.value(h.at(j, 0) - h.at(i, 0));
      sum_all += v;
      if (ds.targets[j] > 0) sum_pos += v;
    }
    g1.push_back(sum_pos / static_cast<double>(ds.n_pos));
    g2.push_back(sum_all / static_cast<double>(n));
  }
  return {g1, g2};
}

// Exact F(w) composed from the exact inner values.
inline double full_objective_value(const ObjectiveSpec& spec, const ParamVector& w) {
  oracle_detail::size_guard(spec);
  const IndexedDataset& ds = *spec.data;

  switch (spec.kind) {
    case LossKind::pauc: {
      auto g = exact_inner_values(spec, w);
      double acc = 0.0;
      for (double gi : g) acc += spec.lambda * std::log(gi);
      return acc / static_cast<double>(g.size());
    }
    case LossKind::ap: {
      auto [g1, g2] = exact_inner_values_ap(spec, w);
      double acc = 0.0;
      for (std::size_t i = 0; i < g1.size(); ++i) acc += -g1[i] / g2[i];
      return acc / static_cast<double>(g1.size());
    }
    case LossKind::aucm: {
      Matrix h = oracle_detail::all_scores(spec, w);
      double mp = 0.0, mn = 0.0, sp = 0.0, sn = 0.0;
      for (std::size_t i = 0; i < ds.features.rows; ++i) {
        double v = h.at(i, 0);
        if (ds.targets[i] > 0) {
          mp += v;
          sp += (v - spec.minmax.a) * (v - spec.minmax.a);
        } else {
          mn += v;
          sn += (v - spec.minmax.b) * (v - spec.minmax.b);
        }
      }
      require(ds.n_pos > 0 && ds.n_neg > 0, ErrorKind::degenerate_labels,
              "aucm needs both classes");
      mp /= static_cast<double>(ds.n_pos);
      mn /= static_cast<double>(ds.n_neg);
      return sp / static_cast<double>(ds.n_pos) + sn / static_cast<double>(ds.n_neg) +
             spec.minmax.alpha * (mn - mp + spec.minmax.margin_c) -
             0.5 * spec.minmax.alpha * spec.minmax.alpha;
    }
    case LossKind::ndcg: {
      auto infos = detail::query_infos(ds);
      auto g = exact_inner_values(spec, w);
      auto items = ds.items_by_query();
      double acc = 0.0;
      std::size_t k = 0;
      for (std::size_t q = 0; q < items.size(); ++q) {
        require(infos[q].z_ideal > 0.0, ErrorKind::degenerate_labels,
                "all-zero relevance query");
        for (std::size_t i : items[q]) {
          if (ds.targets[i] <= 0) continue;
          double gain = std::exp2(ds.targets[i]) - 1.0;
          acc += -gain / (infos[q].z_ideal * std::log2(g[k] + 1.0));
          ++k;
        }
      }
      return acc / static_cast<double>(items.size());
    }
    case LossKind::listwise_ce: {
      auto infos = detail::query_infos(ds);
      auto g = exact_inner_values(spec, w);
      auto items = ds.items_by_query();
      double acc = 0.0;
      std::size_t k = 0;
      for (std::size_t q = 0; q < items.size(); ++q) {
        require(infos[q].grade_sum > 0.0, ErrorKind::degenerate_labels,
                "all-zero relevance query");
        for (std::size_t i : items[q]) {
          if (ds.targets[i] <= 0) continue;
          acc += ds.targets[i] / infos[q].grade_sum * std::log(g[k]);
          ++k;
        }
      }
      return acc / static_cast<double>(items.size());
    }
    case LossKind::gcl: {
      auto g = exact_inner_values(spec, w);
      Matrix h = oracle_detail::all_scores(spec, w);
      Matrix unit = oracle_detail::unit_rows(h);
      double acc = 0.0;
      for (std::size_t r = 0; r < h.rows; ++r) {
        double s_pos = dot(unit.row(r), unit.row(r ^ 1));
        acc += spec.tau * std::log(g[r]) - s_pos;
      }
      return acc / static_cast<double>(h.rows);
    }
    case LossKind::ce: {
      Matrix h = oracle_detail::all_scores(spec, w);
      double acc = 0.0;
      for (std::size_t i = 0; i < ds.features.rows; ++i) {
        double z = (ds.targets[i] > 0 ? 1.0 : -1.0) * h.at(i, 0);
        acc += z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
      }
      return acc / static_cast<double>(ds.features.rows);
    }
    case LossKind::focal: {
      Matrix h = oracle_detail::all_scores(spec, w);
      double acc = 0.0;
      for (std::size_t i = 0; i < ds.features.rows; ++i) {
        double z = (ds.targets[i] > 0 ? 1.0 : -1.0) * h.at(i, 0);
        double pt = 1.0 / (1.0 + std::exp(-z));
        double log_pt = z > 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
        acc += -spec.focal_alpha_hat * std::pow(1.0 - pt, spec.focal_gamma_hat) * log_pt;
      }
      return acc / static_cast<double>(ds.features.rows);
    }
  }
  fail(ErrorKind::configuration, "unknown loss kind");
}

// Central finite differences of an arbitrary scalar function of w.
inline ParamVector finite_diff(const std::function<double(const ParamVector&)>& f,
                               const ParamVector& w, double h) {
  require(h >= 1e-7 && h <= 1e-3, ErrorKind::configuration,
          "finite-difference step must be in [1e-7, 1e-3]");
  ParamVector grad(w.size());
  ParamVector probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double orig = probe[i];
    probe[i] = orig + h;
    double fp = f(probe);
    probe[i] = orig - h;
    double fm = f(probe);
    probe[i] = orig;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

inline ParamVector finite_diff_grad(const ObjectiveSpec& spec, const ParamVector& w,
                                    double h = 1e-5) {
  oracle_detail::size_guard(spec);
  return finite_diff([&](const ParamVector& v) { return full_objective_value(spec, v); },
                     w, h);
}

inline double rel_error(const ParamVector& a, const ParamVector& b) {
  require(a.size() == b.size(), ErrorKind::shape, "gradient size mismatch");
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    da += a[i] * a[i];
    db += b[i] * b[i];
  }
  double denom = std::max(std::sqrt(da), std::sqrt(db));
  if (denom == 0.0) return std::sqrt(num) == 0.0 ? 0.0 : 1.0;
  return std::sqrt(num) / denom;
}

}  // namespace xrisk
