#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xrisk/csv.hpp"
#include "xrisk/dataset.hpp"
#include "xrisk/error.hpp"
#include "xrisk/rng.hpp"

namespace xrisk {

// Index-level batch description. Dual batches fill pos/neg; random batches
// carry their indices in pos_indices; tri batches add query ids and the
// per-query composition.
struct MiniBatch {
  std::vector<std::size_t> pos_indices;
  std::vector<std::size_t> neg_indices;
  std::vector<std::size_t> query_ids;
  struct QueryPart {
    std::size_t query;
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
  };
  std::vector<QueryPart> per_query;
};

namespace detail {

inline std::size_t positives_per_batch(std::size_t batch_size, double rate) {
  require(batch_size >= 2, ErrorKind::configuration, "batch_size must be >= 2");
  require(rate > 0.0 && rate < 1.0, ErrorKind::configuration,
          "sampling_rate must be in (0,1)");
  auto p = static_cast<std::size_t>(
      std::llround(static_cast<double>(batch_size) * rate));
  require(p >= 1 && p <= batch_size - 1, ErrorKind::configuration,
          "round(batch_size*sampling_rate) = " + std::to_string(p) +
              " must be in [1, batch_size-1]");
  return p;
}

// One class's shuffled index stream: a permuted order plus a cursor.
struct IndexStream {
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  Rng rng;

  IndexStream(std::vector<std::size_t> indices, std::uint64_t seed)
      : order(std::move(indices)), rng(seed) {
    shuffle();
  }

  std::size_t remaining() const { return order.size() - cursor; }

  void shuffle() {
    rng.shuffle(order);
    cursor = 0;
  }

  // take() may reshuffle mid-stream when the list runs out (positive-list
  // semantics); the negative stream never calls it past its remaining count.
  void take(std::size_t count, std::vector<std::size_t>& out) {
    for (std::size_t k = 0; k < count; ++k) {
      if (cursor == order.size()) shuffle();
      out.push_back(order[cursor++]);
    }
  }

  std::string save() const {
    std::vector<std::string> cells;
    cells.reserve(order.size() + 1);
    cells.push_back(std::to_string(cursor));
    for (auto i : order) cells.push_back(std::to_string(i));
    return join(cells) + "\n" + rng.save() + "\n";
  }

  void load(const std::string& order_line, const std::string& rng_line) {
    auto cells = split(order_line);
    require(cells.size() == order.size() + 1, ErrorKind::parse,
            "sampler stream size mismatch");
    cursor = static_cast<std::size_t>(parse_int(cells[0], "sampler cursor"));
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<std::size_t>(parse_int(cells[i + 1], "sampler order"));
    rng.load(rng_line);
  }
};

}  // namespace detail

// DualSampler: every batch holds exactly round(batch_size*sampling_rate)
// positives. The negative list defines the epoch; when positives run out only
// the positive list reshuffles, when negatives run out both lists reshuffle
// and the epoch counter advances.
class DualSampler {
 public:
  DualSampler(const IndexedDataset& ds, std::size_t batch_size, double sampling_rate,
              std::uint64_t seed, bool drop_remainder = true)
      : batch_size_(batch_size),
        pos_per_batch_(detail::positives_per_batch(batch_size, sampling_rate)),
        drop_remainder_(drop_remainder),
        pos_(ds.positive_indices(), mix_seed(seed, 1)),
        neg_(ds.negative_indices(), mix_seed(seed, 2)) {
    require(!pos_.order.empty() && !neg_.order.empty(), ErrorKind::degenerate_labels,
            "DualSampler needs at least one positive and one negative");
    require(!drop_remainder_ || neg_.order.size() >= neg_per_batch(),
            ErrorKind::configuration,
            "negative class smaller than per-batch need with drop_remainder");
  }

  std::size_t neg_per_batch() const { return batch_size_ - pos_per_batch_; }
  std::size_t pos_per_batch() const { return pos_per_batch_; }

  // Batches emitted per negative-list pass.
  std::size_t batches_per_epoch() const {
    std::size_t n = neg_.order.size(), b = neg_per_batch();
    return drop_remainder_ ? n / b : (n + b - 1) / b;
  }

  MiniBatch next_batch() {
    if (neg_.remaining() < neg_per_batch()) {
      if (drop_remainder_ || neg_.remaining() == 0) start_epoch();
    }
    MiniBatch batch;
    std::size_t take_neg = std::min(neg_per_batch(), neg_.remaining());
    for (std::size_t k = 0; k < take_neg; ++k)
      batch.neg_indices.push_back(neg_.order[neg_.cursor++]);
    pos_.take(pos_per_batch_, batch.pos_indices);
    return batch;
  }

  std::size_t epoch() const { return epoch_; }
  const std::vector<std::size_t>& pos_order() const { return pos_.order; }
  const std::vector<std::size_t>& neg_order() const { return neg_.order; }
  std::size_t pos_cursor() const { return pos_.cursor; }
  std::size_t neg_cursor() const { return neg_.cursor; }

  std::string save() const {
    return std::to_string(epoch_) + "\n" + pos_.save() + neg_.save();
  }

  void load(const std::vector<std::string>& lines) {
    require(lines.size() >= 5, ErrorKind::parse, "sampler state too short");
    epoch_ = static_cast<std::size_t>(parse_int(lines[0], "sampler epoch"));
    pos_.load(lines[1], lines[2]);
    neg_.load(lines[3], lines[4]);
  }

 private:
  void start_epoch() {
    pos_.shuffle();
    neg_.shuffle();
    ++epoch_;
  }

  std::size_t batch_size_;
  std::size_t pos_per_batch_;
  bool drop_remainder_;
  detail::IndexStream pos_;
  detail::IndexStream neg_;
  std::size_t epoch_ = 0;
};

// TriSampler: per batch, first draw sampled_tasks distinct queries uniformly,
// then apply the dual rule inside each query (relevant items are the
// positives). Per-query streams persist across batches.
class TriSampler {
 public:
  TriSampler(const IndexedDataset& ds, std::size_t sampled_tasks,
             std::size_t batch_size_per_task, double sampling_rate_per_task,
             std::uint64_t seed)
      : sampled_tasks_(sampled_tasks),
        pos_per_task_(detail::positives_per_batch(batch_size_per_task,
                                                  sampling_rate_per_task)),
        batch_per_task_(batch_size_per_task),
        query_rng_(mix_seed(seed, 3)) {
    auto items = ds.items_by_query();
    require(items.size() >= sampled_tasks && sampled_tasks >= 1,
            ErrorKind::configuration, "fewer queries than sampled_tasks");
    for (std::size_t q = 0; q < items.size(); ++q) {
      std::vector<std::size_t> pos, neg;
      for (std::size_t i : items[q]) (ds.targets[i] > 0 ? pos : neg).push_back(i);
      require(!pos.empty() && !neg.empty(), ErrorKind::configuration,
              "query " + std::to_string(q) + " lacks a class");
      pos_.emplace_back(std::move(pos), mix_seed(seed, 100 + 2 * q));
      neg_.emplace_back(std::move(neg), mix_seed(seed, 101 + 2 * q));
    }
  }

  std::size_t n_queries() const { return pos_.size(); }
  std::size_t neg_per_task() const { return batch_per_task_ - pos_per_task_; }

  MiniBatch next_batch() {
    MiniBatch batch;
    batch.query_ids = query_rng_.sample_without_replacement(pos_.size(), sampled_tasks_);
    for (std::size_t q : batch.query_ids) {
      MiniBatch::QueryPart part;
      part.query = q;
      pos_[q].take(pos_per_task_, part.pos);
      neg_[q].take(neg_per_task(), part.neg);
      batch.pos_indices.insert(batch.pos_indices.end(), part.pos.begin(), part.pos.end());
      batch.neg_indices.insert(batch.neg_indices.end(), part.neg.begin(), part.neg.end());
      batch.per_query.push_back(std::move(part));
    }
    return batch;
  }

  std::string save() const {
    std::string out = query_rng_.save() + "\n";
    for (std::size_t q = 0; q < pos_.size(); ++q) out += pos_[q].save() + neg_[q].save();
    return out;
  }

  void load(const std::vector<std::string>& lines) {
    require(lines.size() >= 1 + 4 * pos_.size(), ErrorKind::parse,
            "tri sampler state too short");
    query_rng_.load(lines[0]);
    std::size_t at = 1;
    for (std::size_t q = 0; q < pos_.size(); ++q) {
      pos_[q].load(lines[at], lines[at + 1]);
      neg_[q].load(lines[at + 2], lines[at + 3]);
      at += 4;
    }
  }

 private:
  std::size_t sampled_tasks_;
  std::size_t pos_per_task_;
  std::size_t batch_per_task_;
  Rng query_rng_;
  std::vector<detail::IndexStream> pos_;
  std::vector<detail::IndexStream> neg_;
};

// RandomSampler: plain shuffled traversal without replacement per epoch.
// Batch indices are carried in pos_indices.
class RandomSampler {
 public:
  RandomSampler(std::size_t n_items, std::size_t batch_size, std::uint64_t seed,
                bool drop_remainder = false)
      : batch_size_(batch_size), drop_remainder_(drop_remainder),
        stream_(make_identity(n_items), mix_seed(seed, 4)) {
    require(n_items >= 1, ErrorKind::configuration, "empty dataset");
    require(batch_size >= 1, ErrorKind::configuration, "batch_size must be >= 1");
    require(!drop_remainder_ || n_items >= batch_size, ErrorKind::configuration,
            "dataset smaller than batch with drop_remainder");
  }

  std::size_t batches_per_epoch() const {
    std::size_t n = stream_.order.size();
    return drop_remainder_ ? n / batch_size_ : (n + batch_size_ - 1) / batch_size_;
  }

  MiniBatch next_batch() {
    if (stream_.remaining() < batch_size_) {
      if (drop_remainder_ || stream_.remaining() == 0) {
        stream_.shuffle();
        ++epoch_;
      }
    }
    MiniBatch batch;
    std::size_t take = std::min(batch_size_, stream_.remaining());
    for (std::size_t k = 0; k < take; ++k)
      batch.pos_indices.push_back(stream_.order[stream_.cursor++]);
    return batch;
  }

  std::size_t epoch() const { return epoch_; }

  std::string save() const { return std::to_string(epoch_) + "\n" + stream_.save(); }

  void load(const std::vector<std::string>& lines) {
    require(lines.size() >= 3, ErrorKind::parse, "sampler state too short");
    epoch_ = static_cast<std::size_t>(parse_int(lines[0], "sampler epoch"));
    stream_.load(lines[1], lines[2]);
  }

 private:
  static std::vector<std::size_t> make_identity(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
  }

  std::size_t batch_size_;
  bool drop_remainder_;
  detail::IndexStream stream_;
  std::size_t epoch_ = 0;
};

}  // namespace xrisk
