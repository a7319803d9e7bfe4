#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "xrisk/csv.hpp"
#include "xrisk/error.hpp"
#include "xrisk/matrix.hpp"
#include "xrisk/rng.hpp"

namespace xrisk {

enum class DatasetKind { binary, ltr, contrastive };

// Indexed dataset: every item is addressed by a stable index that estimator
// banks key on for the lifetime of the dataset.
//   binary:      features row per item, targets in {+1,-1}
//   ltr:         features row per item, targets are relevance grades >= 0,
//                query_of gives each item's query id
//   contrastive: n anchor items, two fixed views per anchor; features has
//                2n rows (rows 2i, 2i+1 are the views of anchor i) and
//                targets[row] = anchor id
struct IndexedDataset {
  DatasetKind kind = DatasetKind::binary;
  Matrix features;
  std::vector<double> targets;
  std::vector<std::size_t> query_of;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;

  std::size_t n_items() const {
    return kind == DatasetKind::contrastive ? features.rows / 2 : features.rows;
  }

  std::size_t dim() const { return features.cols; }

  std::size_t view_row(std::size_t anchor, std::size_t view) const {
    return 2 * anchor + view;
  }

  std::vector<std::size_t> positive_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (targets[i] > 0) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> negative_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (targets[i] <= 0) out.push_back(i);
    return out;
  }

  std::size_t n_queries() const {
    if (query_of.empty()) return 0;
    return 1 + *std::max_element(query_of.begin(), query_of.end());
  }

  std::vector<std::vector<std::size_t>> items_by_query() const {
    std::vector<std::vector<std::size_t>> out(n_queries());
    for (std::size_t i = 0; i < query_of.size(); ++i) out[query_of[i]].push_back(i);
    return out;
  }

  void refresh_counts() {
    n_pos = n_neg = 0;
    for (double t : targets) (t > 0 ? n_pos : n_neg)++;
  }
};

struct Item {
  std::span<const double> features;
  double target;
  std::size_t index;
};

// The dataset triplet convention: (data, target, index).
inline Item get_item(const IndexedDataset& ds, std::size_t index) {
  require(index < ds.n_items(), ErrorKind::out_of_range,
          "item index " + std::to_string(index) + " out of range");
  std::size_t row = ds.kind == DatasetKind::contrastive ? ds.view_row(index, 0) : index;
  return {ds.features.row(row), ds.targets[row], index};
}

struct SynthSpec {
  enum class Kind { gaussian_binary, ltr, contrastive } kind = Kind::gaussian_binary;
  std::size_t n = 1000;        // items (binary/contrastive anchors)
  std::size_t dim = 8;
  double imratio = 0.1;        // binary
  double separation = 2.0;     // distance between class means
  std::size_t queries = 10;    // ltr
  std::size_t items_per_query = 20;
  double noise = 0.1;          // ltr label noise / contrastive view noise
  std::uint64_t seed = 0;
};

// Positives at +mu, negatives at -mu with ||2 mu|| = separation; exactly
// round(imratio*n) positives, placed first.
inline IndexedDataset gen_gaussian_binary(const SynthSpec& spec) {
  require(spec.n >= 2 && spec.dim >= 1, ErrorKind::configuration,
          "gaussian_binary needs n >= 2, dim >= 1");
  require(spec.imratio > 0.0 && spec.imratio < 1.0, ErrorKind::configuration,
          "imratio must be in (0,1)");
  auto n_pos = static_cast<std::size_t>(std::llround(spec.imratio * static_cast<double>(spec.n)));
  require(n_pos >= 1, ErrorKind::configuration, "imratio*n rounds to zero positives");
  require(n_pos < spec.n, ErrorKind::configuration, "imratio*n leaves no negatives");

  Rng rng(mix_seed(spec.seed, 0xb1a5));
  double mu = 0.5 * spec.separation / std::sqrt(static_cast<double>(spec.dim));
  IndexedDataset ds;
  ds.kind = DatasetKind::binary;
  ds.features = Matrix(spec.n, spec.dim);
  ds.targets.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double sign = i < n_pos ? 1.0 : -1.0;
    ds.targets[i] = sign;
    for (std::size_t j = 0; j < spec.dim; ++j)
      ds.features.at(i, j) = sign * mu + rng.normal();
  }
  ds.refresh_counts();
  return ds;
}

// Graded relevance from a latent linear scorer: per query, items are ranked
// by v.x + noise*eps and the top ranks receive grades 3/2/1, the rest 0.
inline IndexedDataset gen_synthetic_ltr(const SynthSpec& spec) {
  require(spec.queries >= 1 && spec.items_per_query >= 2, ErrorKind::configuration,
          "ltr needs >= 1 query and >= 2 items per query");
  Rng rng(mix_seed(spec.seed, 0x17c0));
  std::vector<double> latent(spec.dim);
  for (double& v : latent) v = rng.normal();
  double norm = l2_norm(latent);
  for (double& v : latent) v /= norm;

  const std::size_t m = spec.items_per_query;
  const std::size_t n = spec.queries * m;
  IndexedDataset ds;
  ds.kind = DatasetKind::ltr;
  ds.features = Matrix(n, spec.dim);
  ds.targets.resize(n);
  ds.query_of.resize(n);

  std::size_t n3 = std::max<std::size_t>(1, (m + 9) / 10);
  std::size_t n2 = std::min(m - n3, (m + 4) / 5);
  std::size_t n1 = std::min(m - n3 - n2, (m + 2) / 3);

  std::vector<double> latent_score(m);
  std::vector<std::size_t> order(m);
  for (std::size_t q = 0; q < spec.queries; ++q) {
    for (std::size_t r = 0; r < m; ++r) {
      std::size_t row = q * m + r;
      ds.query_of[row] = q;
      for (std::size_t j = 0; j < spec.dim; ++j) ds.features.at(row, j) = rng.normal();
      latent_score[r] = dot(std::span<const double>(latent), ds.features.row(row)) +
                        spec.noise * rng.normal();
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (latent_score[a] != latent_score[b]) return latent_score[a] > latent_score[b];
      return a < b;
    });
    for (std::size_t r = 0; r < m; ++r) {
      double grade = r < n3 ? 3.0 : (r < n3 + n2 ? 2.0 : (r < n3 + n2 + n1 ? 1.0 : 0.0));
      ds.targets[q * m + order[r]] = grade;
    }
  }
  ds.refresh_counts();
  for (const auto& items : ds.items_by_query()) {
    bool any = false;
    for (std::size_t i : items) any |= ds.targets[i] > 0;
    require(any, ErrorKind::degenerate_labels, "query without relevant items");
  }
  return ds;
}

// n anchors with two additive-noise views each, fixed at generation time.
inline IndexedDataset gen_contrastive(const SynthSpec& spec) {
  require(spec.n >= 2 && spec.dim >= 1, ErrorKind::configuration,
          "contrastive needs n >= 2, dim >= 1");
  Rng rng(mix_seed(spec.seed, 0xc0de));
  IndexedDataset ds;
  ds.kind = DatasetKind::contrastive;
  ds.features = Matrix(2 * spec.n, spec.dim);
  ds.targets.resize(2 * spec.n);
  std::vector<double> anchor(spec.dim);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (double& v : anchor) v = rng.normal();
    for (std::size_t view = 0; view < 2; ++view) {
      std::size_t row = ds.view_row(i, view);
      ds.targets[row] = static_cast<double>(i);
      for (std::size_t j = 0; j < spec.dim; ++j)
        ds.features.at(row, j) = anchor[j] + spec.noise * rng.normal();
    }
  }
  return ds;
}

inline IndexedDataset generate(const SynthSpec& spec) {
  switch (spec.kind) {
    case SynthSpec::Kind::gaussian_binary: return gen_gaussian_binary(spec);
    case SynthSpec::Kind::ltr:             return gen_synthetic_ltr(spec);
    case SynthSpec::Kind::contrastive:     return gen_contrastive(spec);
  }
  fail(ErrorKind::configuration, "unknown dataset kind");
}

// CSV formats. Row order defines the stable item index.
//   binary: label,f0,...,f{d-1}   with label in {1,-1}
//   ltr:    query_id,relevance,f0,...,f{d-1}
inline IndexedDataset load_csv_dataset(const std::string& path, DatasetKind format) {
  require(format == DatasetKind::binary || format == DatasetKind::ltr,
          ErrorKind::configuration, "csv loading supports binary and ltr formats");
  auto lines = read_lines(path);
  require(lines.size() >= 2, ErrorKind::parse, path + ": no data rows");

  auto header = split(lines[0]);
  std::size_t meta = format == DatasetKind::binary ? 1 : 2;
  require(header.size() > meta, ErrorKind::parse, path + ": no feature columns");
  if (format == DatasetKind::binary)
    require(header[0] == "label", ErrorKind::parse, path + ": expected 'label' header");
  else
    require(header[0] == "query_id" && header[1] == "relevance", ErrorKind::parse,
            path + ": expected 'query_id,relevance' header");
  for (std::size_t j = meta; j < header.size(); ++j)
    require(header[j] == "f" + std::to_string(j - meta), ErrorKind::parse,
            path + ": bad feature header '" + header[j] + "'");

  std::size_t d = header.size() - meta;
  std::size_t n = lines.size() - 1;
  IndexedDataset ds;
  ds.kind = format;
  ds.features = Matrix(n, d);
  ds.targets.resize(n);
  if (format == DatasetKind::ltr) ds.query_of.resize(n);

  for (std::size_t r = 0; r < n; ++r) {
    const std::string ctx = path + " row " + std::to_string(r + 2);
    auto cells = split(lines[r + 1]);
    require(cells.size() == header.size(), ErrorKind::parse, ctx + ": wrong column count");
    if (format == DatasetKind::binary) {
      double label = parse_double(cells[0], ctx);
      require(label == 1.0 || label == -1.0, ErrorKind::parse,
              ctx + ": label must be 1 or -1, got '" + cells[0] + "'");
      ds.targets[r] = label;
    } else {
      long long q = parse_int(cells[0], ctx);
      require(q >= 0, ErrorKind::parse, ctx + ": negative query id");
      ds.query_of[r] = static_cast<std::size_t>(q);
      double rel = parse_double(cells[1], ctx);
      require(rel >= 0.0 && std::isfinite(rel), ErrorKind::parse,
              ctx + ": relevance must be finite and >= 0");
      ds.targets[r] = rel;
    }
    for (std::size_t j = 0; j < d; ++j)
      ds.features.at(r, j) = parse_double(cells[meta + j], ctx);
  }
  ds.refresh_counts();
  return ds;
}

inline void save_csv_dataset(const std::string& path, const IndexedDataset& ds) {
  require(ds.kind == DatasetKind::binary || ds.kind == DatasetKind::ltr,
          ErrorKind::configuration, "csv saving supports binary and ltr formats");
  std::string out;
  std::size_t d = ds.dim();
  if (ds.kind == DatasetKind::binary)
    out = "label";
  else
    out = "query_id,relevance";
  for (std::size_t j = 0; j < d; ++j) out += ",f" + std::to_string(j);
  out += "\n";
  for (std::size_t r = 0; r < ds.features.rows; ++r) {
    if (ds.kind == DatasetKind::binary) {
      out += ds.targets[r] > 0 ? "1" : "-1";
    } else {
      out += std::to_string(ds.query_of[r]) + ',' + format_double(ds.targets[r]);
    }
    for (std::size_t j = 0; j < d; ++j) out += ',' + format_double(ds.features.at(r, j));
    out += "\n";
  }
  write_text(path, out);
}

}  // namespace xrisk
