#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "xrisk/dataset.hpp"
#include "xrisk/error.hpp"
#include "xrisk/estimator.hpp"
#include "xrisk/matrix.hpp"
#include "xrisk/model.hpp"
#include "xrisk/sampler.hpp"
#include "xrisk/surrogate.hpp"

namespace xrisk {

// Auxiliary scalars of the min-max AUC margin objective; alpha is projected
// onto R+ after every step.
struct MinMaxState {
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;
  double margin_c = 1.0;
};

// Output contract of every dynamic mini-batch loss: grad_w is the chain-rule
// gradient with the coefficient matrix p held numerically constant
// (stop-gradient). `loss` is the plug-in objective estimate built from the
// bank values; `linearized_loss` is the detached-coefficient batch loss whose
// analytic w-gradient equals grad_w.
struct DynamicLossOutput {
  double loss = 0.0;
  double linearized_loss = 0.0;
  Matrix p;
  ParamVector grad_w;
  std::size_t clamp_events = 0;
  std::size_t clip_events = 0;
};

inline constexpr double kExpArgClip = 30.0;

namespace detail {

inline double clipped_exp(double arg, std::size_t& clip_events) {
  if (arg > kExpArgClip) {
    ++clip_events;
    arg = kExpArgClip;
  } else if (arg < -kExpArgClip) {
    ++clip_events;
    arg = -kExpArgClip;
  }
  return std::exp(arg);
}

// Snapshot of bank values for the theory-order variant (coefficients from
// u^t instead of u^{t+1}); entries untouched before the update fall back to
// the post-update (first-touch) value either way.
struct AnchorEstimates {
  std::vector<double> u;
  std::vector<double> u2;
};

inline AnchorEstimates anchor_estimates(const InnerEstimatorBank& bank,
                                        const std::vector<std::size_t>& anchors,
                                        const std::vector<double>& prev_u,
                                        const std::vector<double>& prev_u2,
                                        const std::vector<bool>& prev_touched,
                                        bool theory_order) {
  AnchorEstimates out;
  out.u.resize(anchors.size());
  if (bank.paired()) out.u2.resize(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    bool use_prev = theory_order && prev_touched[k];
    out.u[k] = use_prev ? prev_u[k] : bank.value(anchors[k]);
    if (bank.paired()) out.u2[k] = use_prev ? prev_u2[k] : bank.value2(anchors[k]);
  }
  return out;
}

inline Matrix forward_scores_1d(const ScoringModel& model, const ParamVector& w,
                                const Matrix& x) {
  require(model.output_dim == 1, ErrorKind::shape,
          "this loss needs a scalar scoring model");
  return model.forward(w, x);
}

}  // namespace detail

// One-way pAUC surrogate (Eq.-3 form): per positive anchor the inner function
// is the mean over negatives of exp(l(h_j - h_i)/lambda), tracked by the
// moving-average bank; coefficients p_ij = exp(l_ij/lambda)/u_i are detached.
inline DynamicLossOutput pauc_dynamic_loss(const ScoringModel& model,
                                           const ParamVector& w,
                                           const IndexedDataset& ds,
                                           const MiniBatch& batch,
                                           const Surrogate& sur, double lambda,
                                           InnerEstimatorBank& bank,
                                           bool theory_order = false) {
  require(lambda > 0.0, ErrorKind::configuration, "lambda must be > 0");
  require(!batch.pos_indices.empty() && !batch.neg_indices.empty(),
          ErrorKind::batch_composition, "pauc batch needs both classes");
  const std::size_t b1 = batch.pos_indices.size();
  const std::size_t b2 = batch.neg_indices.size();

  std::vector<std::size_t> rows(batch.pos_indices);
  rows.insert(rows.end(), batch.neg_indices.begin(), batch.neg_indices.end());
  Matrix x = rows_subset(ds.features, rows);
  Matrix h = detail::forward_scores_1d(model, w, x);

  DynamicLossOutput out;
  std::size_t clamps_before = bank.clamp_count();

  Matrix lval(b1, b2), lder(b1, b2), expv(b1, b2);
  std::vector<double> fresh(b1, 0.0);
  for (std::size_t i = 0; i < b1; ++i) {
    for (std::size_t j = 0; j < b2; ++j) {
      double gap = h.at(b1 + j, 0) - h.at(i, 0);
      lval.at(i, j) = sur.value(gap);
      lder.at(i, j) = sur.derivative(gap);
      expv.at(i, j) = detail::clipped_exp(lval.at(i, j) / lambda, out.clip_events);
      fresh[i] += expv.at(i, j);
    }
    fresh[i] /= static_cast<double>(b2);
  }

  std::vector<double> prev_u(b1), prev_u2;
  std::vector<bool> prev_touched(b1);
  for (std::size_t i = 0; i < b1; ++i) {
    prev_u[i] = bank.value(batch.pos_indices[i]);
    prev_touched[i] = bank.touched(batch.pos_indices[i]);
  }
  bank.update(batch.pos_indices, fresh);
  auto est = detail::anchor_estimates(bank, batch.pos_indices, prev_u, prev_u2,
                                      prev_touched, theory_order);

  out.p = Matrix(b1, b2);
  Matrix upstream(rows.size(), 1);
  const double pair_w = 1.0 / static_cast<double>(b1 * b2);
  for (std::size_t i = 0; i < b1; ++i) {
    double denom = bank.floored(est.u[i]);
    out.loss += lambda * std::log(denom);
    for (std::size_t j = 0; j < b2; ++j) {
      double p = expv.at(i, j) / denom;
      out.p.at(i, j) = p;
      out.linearized_loss += pair_w * p * lval.at(i, j);
      double c = pair_w * p * lder.at(i, j);
      upstream.at(b1 + j, 0) += c;
      upstream.at(i, 0) -= c;
    }
  }
  out.loss /= static_cast<double>(b1);
  out.grad_w = model.vjp(w, x, upstream);
  out.clamp_events = bank.clamp_count() - clamps_before;
  return out;
}

// AP surrogate: f(g1, g2) = -g1/g2 with g1 the mean surrogate over positives
// and g2 over the whole set. Batch estimates of g2 are reweighted by the true
// class priors because controlled batches distort class proportions.
inline DynamicLossOutput ap_dynamic_loss(const ScoringModel& model,
                                         const ParamVector& w,
                                         const IndexedDataset& ds,
                                         const MiniBatch& batch,
                                         const Surrogate& sur,
                                         InnerEstimatorBank& bank,
                                         bool theory_order = false) {
  require(!batch.pos_indices.empty(), ErrorKind::batch_composition,
          "ap batch needs at least one positive");
  const std::size_t b1 = batch.pos_indices.size();
  const std::size_t bn = batch.neg_indices.size();
  const double n_total = static_cast<double>(ds.n_pos + ds.n_neg);
  const double w_pos = static_cast<double>(ds.n_pos) / n_total;
  const double w_neg = static_cast<double>(ds.n_neg) / n_total;
  require(ds.n_neg == 0 || bn >= 1, ErrorKind::batch_composition,
          "ap batch needs negatives to estimate the full-set mean");

  std::vector<std::size_t> rows(batch.pos_indices);
  rows.insert(rows.end(), batch.neg_indices.begin(), batch.neg_indices.end());
  Matrix x = rows_subset(ds.features, rows);
  Matrix h = detail::forward_scores_1d(model, w, x);

  DynamicLossOutput out;
  std::size_t clamps_before = bank.clamp_count();

  Matrix lder(b1, rows.size());
  std::vector<double> fresh1(b1, 0.0), fresh2(b1, 0.0);
  for (std::size_t i = 0; i < b1; ++i) {
    double sum_pos = 0.0, sum_neg = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      double gap = h.at(j, 0) - h.at(i, 0);
      double v = sur.value(gap);
      lder.at(i, j) = sur.derivative(gap);
      (j < b1 ? sum_pos : sum_neg) += v;
    }
    double mean_pos = sum_pos / static_cast<double>(b1);
    double mean_neg = bn ? sum_neg / static_cast<double>(bn) : 0.0;
    fresh1[i] = mean_pos;
    fresh2[i] = w_pos * mean_pos + w_neg * mean_neg;
  }

  std::vector<double> prev_u(b1), prev_u2(b1);
  std::vector<bool> prev_touched(b1);
  for (std::size_t i = 0; i < b1; ++i) {
    prev_u[i] = bank.value(batch.pos_indices[i]);
    prev_u2[i] = bank.value2(batch.pos_indices[i]);
    prev_touched[i] = bank.touched(batch.pos_indices[i]);
  }
  bank.update_paired(batch.pos_indices, fresh1, fresh2);
  auto est = detail::anchor_estimates(bank, batch.pos_indices, prev_u, prev_u2,
                                      prev_touched, theory_order);

  out.p = Matrix(b1, 2);
  Matrix upstream(rows.size(), 1);
  const double outer = 1.0 / static_cast<double>(b1);
  for (std::size_t i = 0; i < b1; ++i) {
    double d2 = bank.floored(est.u2[i]);
    double coef1 = -1.0 / d2;
    double coef2 = est.u[i] / (d2 * d2);
    out.p.at(i, 0) = coef1;
    out.p.at(i, 1) = coef2;
    out.loss += outer * (-est.u[i] / d2);
    out.linearized_loss += outer * (coef1 * fresh1[i] + coef2 * fresh2[i]);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      double weight = j < b1 ? (coef1 + coef2 * w_pos) / static_cast<double>(b1)
                             : coef2 * w_neg / static_cast<double>(bn);
      double c = outer * weight * lder.at(i, j);
      upstream.at(j, 0) += c;
      upstream.at(i, 0) -= c;
    }
  }
  out.grad_w = model.vjp(w, x, upstream);
  out.clamp_events = bank.clamp_count() - clamps_before;
  return out;
}

struct AucmOutput {
  double loss = 0.0;
  ParamVector grad_w;
  double grad_a = 0.0;
  double grad_b = 0.0;
  double grad_alpha = 0.0;
};

// Min-max AUC margin objective on the batch:
//   E_pos[(h-a)^2] + E_neg[(h-b)^2] + alpha*(E_neg[h] - E_pos[h] + c) - alpha^2/2
inline AucmOutput aucm_loss_and_grads(const ScoringModel& model, const ParamVector& w,
                                      const IndexedDataset& ds, const MiniBatch& batch,
                                      const MinMaxState& mm) {
  require(!batch.pos_indices.empty() && !batch.neg_indices.empty(),
          ErrorKind::batch_composition, "aucm batch needs both classes");
  const std::size_t b1 = batch.pos_indices.size();
  const std::size_t b2 = batch.neg_indices.size();

  std::vector<std::size_t> rows(batch.pos_indices);
  rows.insert(rows.end(), batch.neg_indices.begin(), batch.neg_indices.end());
  Matrix x = rows_subset(ds.features, rows);
  Matrix h = detail::forward_scores_1d(model, w, x);

  double mean_pos = 0.0, mean_neg = 0.0, sq_pos = 0.0, sq_neg = 0.0;
  for (std::size_t i = 0; i < b1; ++i) {
    double v = h.at(i, 0);
    mean_pos += v;
    sq_pos += (v - mm.a) * (v - mm.a);
  }
  for (std::size_t j = 0; j < b2; ++j) {
    double v = h.at(b1 + j, 0);
    mean_neg += v;
    sq_neg += (v - mm.b) * (v - mm.b);
  }
  mean_pos /= static_cast<double>(b1);
  mean_neg /= static_cast<double>(b2);

  AucmOutput out;
  out.loss = sq_pos / static_cast<double>(b1) + sq_neg / static_cast<double>(b2) +
             mm.alpha * (mean_neg - mean_pos + mm.margin_c) -
             0.5 * mm.alpha * mm.alpha;
  Matrix upstream(rows.size(), 1);
  for (std::size_t i = 0; i < b1; ++i)
    upstream.at(i, 0) = (2.0 * (h.at(i, 0) - mm.a) - mm.alpha) / static_cast<double>(b1);
  for (std::size_t j = 0; j < b2; ++j)
    upstream.at(b1 + j, 0) =
        (2.0 * (h.at(b1 + j, 0) - mm.b) + mm.alpha) / static_cast<double>(b2);
  out.grad_w = model.vjp(w, x, upstream);
  out.grad_a = 2.0 * (mm.a - mean_pos);
  out.grad_b = 2.0 * (mm.b - mean_neg);
  out.grad_alpha = (mean_neg - mean_pos + mm.margin_c) - mm.alpha;
  return out;
}

namespace detail {

// Per-query constants shared by the listwise losses.
struct QueryInfo {
  double z_ideal = 0.0;       // ideal DCG over the full query
  double grade_sum = 0.0;     // sum of relevance grades
  std::size_t n_items = 0;
  std::size_t n_relevant = 0;
};

inline std::vector<QueryInfo> query_infos(const IndexedDataset& ds) {
  auto items = ds.items_by_query();
  std::vector<QueryInfo> out(items.size());
  for (std::size_t q = 0; q < items.size(); ++q) {
    std::vector<double> grades;
    grades.reserve(items[q].size());
    for (std::size_t i : items[q]) grades.push_back(ds.targets[i]);
    std::sort(grades.begin(), grades.end(), std::greater<>());
    QueryInfo info;
    info.n_items = grades.size();
    for (std::size_t r = 0; r < grades.size(); ++r) {
      info.z_ideal += (std::exp2(grades[r]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
      info.grade_sum += grades[r];
      if (grades[r] > 0) ++info.n_relevant;
    }
    out[q] = info;
  }
  return out;
}

}  // namespace detail

// NDCG surrogate (sum-form rank estimate): per relevant anchor the bank
// tracks g_i ~ N_q * mean over sampled items of l(h_j - h_i), and
// f(g) = -(2^y - 1)/(Z_q * log2(g+1)).
inline DynamicLossOutput ndcg_dynamic_loss(const ScoringModel& model,
                                           const ParamVector& w,
                                           const IndexedDataset& ds,
                                           const MiniBatch& batch,
                                           const Surrogate& sur,
                                           InnerEstimatorBank& bank,
                                           bool theory_order = false) {
  require(!batch.per_query.empty(), ErrorKind::batch_composition,
          "ndcg batch needs query structure");
  auto infos = detail::query_infos(ds);
  const double n_queries = static_cast<double>(batch.per_query.size());
  constexpr double ln2 = std::numbers::ln2;

  DynamicLossOutput out;
  std::size_t clamps_before = bank.clamp_count();
  std::vector<double> grads(w.size(), 0.0);

  // anchors across all query parts, updated in one pass
  std::vector<std::size_t> anchors;
  std::vector<double> fresh;
  struct PartScores {
    Matrix x, h, lder;
    std::vector<std::size_t> items;
    double scale = 0.0, zq = 0.0, nq = 0.0;
  };
  std::vector<PartScores> parts;
  for (const auto& part : batch.per_query) {
    require(!part.pos.empty(), ErrorKind::batch_composition,
            "query part without relevant anchors");
    const auto& info = infos.at(part.query);
    require(info.z_ideal > 0.0, ErrorKind::degenerate_labels,
            "query " + std::to_string(part.query) + " has all-zero relevance");
    PartScores ps;
    ps.items = part.pos;
    ps.items.insert(ps.items.end(), part.neg.begin(), part.neg.end());
    ps.x = rows_subset(ds.features, ps.items);
    ps.h = detail::forward_scores_1d(model, w, ps.x);
    ps.zq = info.z_ideal;
    ps.nq = static_cast<double>(info.n_items);
    // upscale by how many of the query's relevant items the batch carries;
    // zero-grade anchors contribute nothing (gain 0) and do not count
    std::size_t relevant_anchors = 0;
    for (std::size_t i : part.pos) relevant_anchors += ds.targets[i] > 0;
    require(relevant_anchors > 0, ErrorKind::batch_composition,
            "query part without relevant anchors");
    ps.scale = static_cast<double>(info.n_relevant) / static_cast<double>(relevant_anchors);
    ps.lder = Matrix(part.pos.size(), ps.items.size());
    for (std::size_t i = 0; i < part.pos.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < ps.items.size(); ++j) {
        double gap = ps.h.at(j, 0) - ps.h.at(i, 0);
        acc += sur.value(gap);
        ps.lder.at(i, j) = sur.derivative(gap);
      }
      anchors.push_back(part.pos[i]);
      fresh.push_back(ps.nq * acc / static_cast<double>(ps.items.size()));
    }
    parts.push_back(std::move(ps));
  }

  std::vector<double> prev_u(anchors.size()), prev_u2;
  std::vector<bool> prev_touched(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    prev_u[k] = bank.value(anchors[k]);
    prev_touched[k] = bank.touched(anchors[k]);
  }
  bank.update(anchors, fresh);
  auto est = detail::anchor_estimates(bank, anchors, prev_u, prev_u2, prev_touched,
                                      theory_order);

  out.p = Matrix(anchors.size(), 1);
  std::size_t k = 0;
  for (std::size_t pi = 0; pi < batch.per_query.size(); ++pi) {
    auto& ps = parts[pi];
    const auto& part = batch.per_query[pi];
    Matrix upstream(ps.items.size(), 1);
    for (std::size_t i = 0; i < part.pos.size(); ++i, ++k) {
      double u = bank.floored(est.u[k]);
      double gain = std::exp2(ds.targets[part.pos[i]]) - 1.0;
      double log2u1 = std::log2(u + 1.0);
      out.loss += ps.scale / n_queries * (-gain / (ps.zq * log2u1));
      double p = gain / (ps.zq * (u + 1.0) * ln2 * log2u1 * log2u1);
      out.p.at(k, 0) = p;
      out.linearized_loss += ps.scale / n_queries * p * fresh[k];
      double pair_c = ps.scale / n_queries * p * ps.nq /
                      static_cast<double>(ps.items.size());
      for (std::size_t j = 0; j < ps.items.size(); ++j) {
        double c = pair_c * ps.lder.at(i, j);
        upstream.at(j, 0) += c;
        upstream.at(i, 0) -= c;
      }
    }
    ParamVector g = model.vjp(w, ps.x, upstream);
    for (std::size_t d = 0; d < grads.size(); ++d) grads[d] += g[d];
  }
  out.grad_w = std::move(grads);
  out.clamp_events = bank.clamp_count() - clamps_before;
  return out;
}

// Listwise CE (FCCO form): g_i ~ mean over sampled items of exp(h_j - h_i),
// f(g) = P(y_i) log g with P proportional to the grade, normalized over the
// full query.
inline DynamicLossOutput listwise_ce_dynamic_loss(const ScoringModel& model,
                                                  const ParamVector& w,
                                                  const IndexedDataset& ds,
                                                  const MiniBatch& batch,
                                                  InnerEstimatorBank& bank,
                                                  bool theory_order = false) {
  require(!batch.per_query.empty(), ErrorKind::batch_composition,
          "listwise batch needs query structure");
  auto infos = detail::query_infos(ds);
  const double n_queries = static_cast<double>(batch.per_query.size());

  DynamicLossOutput out;
  std::size_t clamps_before = bank.clamp_count();
  std::vector<double> grads(w.size(), 0.0);

  std::vector<std::size_t> anchors;
  std::vector<double> fresh;
  struct PartScores {
    Matrix x, expm;
    std::vector<std::size_t> items;
    double scale = 0.0, grade_sum = 0.0;
  };
  std::vector<PartScores> parts;
  for (const auto& part : batch.per_query) {
    require(!part.pos.empty(), ErrorKind::batch_composition,
            "query part without relevant anchors");
    const auto& info = infos.at(part.query);
    require(info.grade_sum > 0.0, ErrorKind::degenerate_labels,
            "query " + std::to_string(part.query) + " has all-zero relevance");
    PartScores ps;
    ps.items = part.pos;
    ps.items.insert(ps.items.end(), part.neg.begin(), part.neg.end());
    ps.x = rows_subset(ds.features, ps.items);
    Matrix h = detail::forward_scores_1d(model, w, ps.x);
    std::size_t relevant_anchors = 0;
    for (std::size_t i : part.pos) relevant_anchors += ds.targets[i] > 0;
    require(relevant_anchors > 0, ErrorKind::batch_composition,
            "query part without relevant anchors");
    ps.scale = static_cast<double>(info.n_relevant) / static_cast<double>(relevant_anchors);
    ps.grade_sum = info.grade_sum;
    ps.expm = Matrix(part.pos.size(), ps.items.size());
    for (std::size_t i = 0; i < part.pos.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < ps.items.size(); ++j) {
        double e = detail::clipped_exp(h.at(j, 0) - h.at(i, 0), out.clip_events);
        ps.expm.at(i, j) = e;
        acc += e;
      }
      anchors.push_back(part.pos[i]);
      fresh.push_back(acc / static_cast<double>(ps.items.size()));
    }
    parts.push_back(std::move(ps));
  }

  std::vector<double> prev_u(anchors.size()), prev_u2;
  std::vector<bool> prev_touched(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    prev_u[k] = bank.value(anchors[k]);
    prev_touched[k] = bank.touched(anchors[k]);
  }
  bank.update(anchors, fresh);
  auto est = detail::anchor_estimates(bank, anchors, prev_u, prev_u2, prev_touched,
                                      theory_order);

  out.p = Matrix(anchors.size(), 1);
  std::size_t k = 0;
  for (std::size_t pi = 0; pi < batch.per_query.size(); ++pi) {
    auto& ps = parts[pi];
    const auto& part = batch.per_query[pi];
    Matrix upstream(ps.items.size(), 1);
    for (std::size_t i = 0; i < part.pos.size(); ++i, ++k) {
      double u = bank.floored(est.u[k]);
      double prob = ds.targets[part.pos[i]] / ps.grade_sum;
      out.loss += ps.scale / n_queries * prob * std::log(u);
      double p = prob / u;
      out.p.at(k, 0) = p;
      out.linearized_loss += ps.scale / n_queries * p * fresh[k];
      double pair_c = ps.scale / n_queries * p / static_cast<double>(ps.items.size());
      for (std::size_t j = 0; j < ps.items.size(); ++j) {
        double c = pair_c * ps.expm.at(i, j);
        upstream.at(j, 0) += c;
        upstream.at(i, 0) -= c;
      }
    }
    ParamVector g = model.vjp(w, ps.x, upstream);
    for (std::size_t d = 0; d < grads.size(); ++d) grads[d] += g[d];
  }
  out.grad_w = std::move(grads);
  out.clamp_events = bank.clamp_count() - clamps_before;
  return out;
}

// Unimodal global contrastive loss on a batch of B anchors with paired views.
// Rows 2k, 2k+1 are the views of the k-th sampled anchor; every row is an
// anchor whose positive is its partner view and whose negatives are the other
// 2(B-1) rows. The bank tracks the mean of exp(sim/tau) over negatives, keyed
// by dataset view row (2*index + view).
inline DynamicLossOutput gcl_dynamic_loss(const ScoringModel& model,
                                          const ParamVector& w,
                                          const IndexedDataset& ds,
                                          const MiniBatch& batch, double tau,
                                          InnerEstimatorBank& bank,
                                          bool theory_order = false) {
  require(ds.kind == DatasetKind::contrastive, ErrorKind::configuration,
          "gcl needs a contrastive dataset");
  require(tau > 0.0, ErrorKind::configuration, "tau must be > 0");
  const std::size_t b = batch.pos_indices.size();
  require(b >= 2, ErrorKind::batch_composition, "gcl batch needs at least 2 anchors");
  const std::size_t n_rows = 2 * b;
  const double neg_count = static_cast<double>(n_rows - 2);  // 2(B-1)

  std::vector<std::size_t> rows(n_rows);
  for (std::size_t k = 0; k < b; ++k) {
    rows[2 * k] = ds.view_row(batch.pos_indices[k], 0);
    rows[2 * k + 1] = ds.view_row(batch.pos_indices[k], 1);
  }
  Matrix x = rows_subset(ds.features, rows);
  Matrix e = model.forward(w, x);

  DynamicLossOutput out;
  std::size_t clamps_before = bank.clamp_count();

  std::vector<double> norms(n_rows);
  Matrix unit = e;
  for (std::size_t r = 0; r < n_rows; ++r) {
    double nrm = l2_norm(e.row(r));
    if (nrm < 1e-12) {
      ++out.clamp_events;
      nrm = 1e-12;
    }
    norms[r] = nrm;
    for (std::size_t c = 0; c < e.cols; ++c) unit.at(r, c) /= nrm;
  }
  Matrix sim(n_rows, n_rows);
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < n_rows; ++c) sim.at(r, c) = dot(unit.row(r), unit.row(c));

  Matrix expm(n_rows, n_rows);
  std::vector<double> fresh(n_rows, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t partner = r ^ 1;
    for (std::size_t c = 0; c < n_rows; ++c) {
      if (c == r || c == partner) continue;
      expm.at(r, c) = detail::clipped_exp(sim.at(r, c) / tau, out.clip_events);
      fresh[r] += expm.at(r, c);
    }
    fresh[r] /= neg_count;
  }

  std::vector<double> prev_u(n_rows), prev_u2;
  std::vector<bool> prev_touched(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    prev_u[r] = bank.value(rows[r]);
    prev_touched[r] = bank.touched(rows[r]);
  }
  bank.update(rows, fresh);
  auto est =
      detail::anchor_estimates(bank, rows, prev_u, prev_u2, prev_touched, theory_order);

  out.p = Matrix(n_rows, n_rows);
  Matrix sim_grad(n_rows, n_rows);  // dL/ds for ordered pairs
  const double outer = 1.0 / static_cast<double>(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t partner = r ^ 1;
    double denom = bank.floored(est.u[r]);
    out.loss += outer * (tau * std::log(denom) - sim.at(r, partner));
    double lin = -sim.at(r, partner);
    sim_grad.at(r, partner) -= outer;
    for (std::size_t c = 0; c < n_rows; ++c) {
      if (c == r || c == partner) continue;
      double p = expm.at(r, c) / denom;
      out.p.at(r, c) = p;
      lin += p * sim.at(r, c) / neg_count;
      sim_grad.at(r, c) += outer * p / neg_count;
    }
    out.linearized_loss += outer * lin;
  }

  // back through cosine normalization
  Matrix upstream(n_rows, e.cols);
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < n_rows; ++c) {
      if (c == r) continue;
      double gcoef = sim_grad.at(r, c) + sim_grad.at(c, r);
      if (gcoef == 0.0) continue;
      // d s_rc / d e_r = (unit_c - s_rc * unit_r) / norm_r
      for (std::size_t d = 0; d < e.cols; ++d)
        upstream.at(r, d) +=
            gcoef * (unit.at(c, d) - sim.at(r, c) * unit.at(r, d)) / norms[r];
    }
  out.grad_w = model.vjp(w, x, upstream);
  out.clamp_events += bank.clamp_count() - clamps_before;
  return out;
}

// Plain binary cross-entropy with logits; the ERM baseline.
inline DynamicLossOutput ce_loss(const ScoringModel& model, const ParamVector& w,
                                 const IndexedDataset& ds, const MiniBatch& batch) {
  std::vector<std::size_t> rows(batch.pos_indices);
  rows.insert(rows.end(), batch.neg_indices.begin(), batch.neg_indices.end());
  require(!rows.empty(), ErrorKind::batch_composition, "empty batch");
  Matrix x = rows_subset(ds.features, rows);
  Matrix h = detail::forward_scores_1d(model, w, x);

  DynamicLossOutput out;
  Matrix upstream(rows.size(), 1);
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double y = ds.targets[rows[r]] > 0 ? 1.0 : -1.0;
    double z = y * h.at(r, 0);
    out.loss += inv * (z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)));
    upstream.at(r, 0) = inv * (-y / (1.0 + std::exp(z)));
  }
  out.linearized_loss = out.loss;
  out.grad_w = model.vjp(w, x, upstream);
  return out;
}

// Focal loss with the knobs named as in the benchmark protocol
// (alpha_hat weighting, gamma_hat focusing exponent).
inline DynamicLossOutput focal_loss(const ScoringModel& model, const ParamVector& w,
                                    const IndexedDataset& ds, const MiniBatch& batch,
                                    double alpha_hat, double gamma_hat) {
  std::vector<std::size_t> rows(batch.pos_indices);
  rows.insert(rows.end(), batch.neg_indices.begin(), batch.neg_indices.end());
  require(!rows.empty(), ErrorKind::batch_composition, "empty batch");
  Matrix x = rows_subset(ds.features, rows);
  Matrix h = detail::forward_scores_1d(model, w, x);

  DynamicLossOutput out;
  Matrix upstream(rows.size(), 1);
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double y = ds.targets[rows[r]] > 0 ? 1.0 : -1.0;
    double z = y * h.at(r, 0);
    double pt = 1.0 / (1.0 + std::exp(-z));
    double log_pt = z > 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
    double one_minus = 1.0 - pt;
    out.loss += inv * (-alpha_hat * std::pow(one_minus, gamma_hat) * log_pt);
    double dds = alpha_hat * std::pow(one_minus, gamma_hat) *
                 (gamma_hat * pt * log_pt - one_minus);
    upstream.at(r, 0) = inv * y * dds;
  }
  out.linearized_loss = out.loss;
  out.grad_w = model.vjp(w, x, upstream);
  return out;
}

}  // namespace xrisk
