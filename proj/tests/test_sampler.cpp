#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "xrisk/dataset.hpp"
#include "xrisk/sampler.hpp"

using namespace xrisk;

namespace {

// 4 positives (indices 0..3) and 9 negatives (4..12), the Figure-3 setup.
IndexedDataset tiny_binary(std::size_t n_pos, std::size_t n_neg) {
  IndexedDataset ds;
  ds.kind = DatasetKind::binary;
  ds.features = Matrix(n_pos + n_neg, 1);
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    ds.features.at(i, 0) = static_cast<double>(i);
    ds.targets.push_back(i < n_pos ? 1.0 : -1.0);
  }
  ds.refresh_counts();
  return ds;
}

}  // namespace

TEST(DualSampler, FigureThreeProtocol) {
  auto ds = tiny_binary(4, 9);
  DualSampler sampler(ds, 8, 0.5, 123, /*drop_remainder=*/true);
  ASSERT_EQ(sampler.pos_per_batch(), 4u);
  ASSERT_EQ(sampler.batches_per_epoch(), 2u);

  auto neg_order_epoch0 = sampler.neg_order();

  // batch 1: all four positives, first four negatives of the shuffled list
  MiniBatch b1 = sampler.next_batch();
  EXPECT_EQ(std::set<std::size_t>(b1.pos_indices.begin(), b1.pos_indices.end()),
            (std::set<std::size_t>{0, 1, 2, 3}));
  EXPECT_TRUE(std::equal(b1.neg_indices.begin(), b1.neg_indices.end(),
                         neg_order_epoch0.begin()));
  EXPECT_EQ(sampler.epoch(), 0u);

  // batch 2: positive list reshuffled alone, negatives continue in order
  auto pos_order_before = sampler.pos_order();
  MiniBatch b2 = sampler.next_batch();
  EXPECT_EQ(std::set<std::size_t>(b2.pos_indices.begin(), b2.pos_indices.end()),
            (std::set<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(sampler.neg_order(), neg_order_epoch0) << "negative order must not move";
  EXPECT_TRUE(std::equal(b2.neg_indices.begin(), b2.neg_indices.end(),
                         neg_order_epoch0.begin() + 4));
  EXPECT_EQ(sampler.epoch(), 0u);

  // ninth negative is dropped; the next call rolls the epoch and reshuffles both
  MiniBatch b3 = sampler.next_batch();
  EXPECT_EQ(sampler.epoch(), 1u);
  for (std::size_t i : b3.neg_indices) EXPECT_GE(i, 4u);
  (void)pos_order_before;
}

TEST(DualSampler, ExactPositiveCountPerBatch) {
  auto ds = tiny_binary(7, 200);
  DualSampler sampler(ds, 16, 0.25, 9);
  for (int t = 0; t < 1000; ++t) {
    MiniBatch b = sampler.next_batch();
    ASSERT_EQ(b.pos_indices.size(), 4u);
    ASSERT_EQ(b.neg_indices.size(), 12u);
    for (std::size_t i : b.pos_indices) EXPECT_LT(i, 7u);
    for (std::size_t j : b.neg_indices) EXPECT_GE(j, 7u);
  }
}

TEST(DualSampler, NegativeFullCoveragePerEpochKeepMode) {
  auto ds = tiny_binary(3, 17);
  DualSampler sampler(ds, 8, 0.25, 5, /*drop_remainder=*/false);  // 6 negs per batch
  std::multiset<std::size_t> seen;
  std::size_t batches = sampler.batches_per_epoch();
  ASSERT_EQ(batches, 3u);
  for (std::size_t t = 0; t < batches; ++t) {
    MiniBatch b = sampler.next_batch();
    seen.insert(b.neg_indices.begin(), b.neg_indices.end());
  }
  EXPECT_EQ(seen.size(), 17u);
  for (std::size_t j = 3; j < 20; ++j) EXPECT_EQ(seen.count(j), 1u) << "negative " << j;
}

TEST(DualSampler, PositiveOnlyReshuffleMidEpoch) {
  auto ds = tiny_binary(2, 64);
  DualSampler sampler(ds, 6, 1.0 / 3.0, 31);  // 2 pos + 4 neg per batch
  auto neg_order = sampler.neg_order();
  std::size_t neg_cursor = sampler.neg_cursor();
  for (int t = 0; t < 8; ++t) {  // stays inside epoch 0 (16 batches per epoch)
    sampler.next_batch();
    EXPECT_EQ(sampler.neg_order(), neg_order);
    EXPECT_EQ(sampler.neg_cursor(), neg_cursor + 4 * (t + 1));
  }
  EXPECT_EQ(sampler.epoch(), 0u);
}

TEST(DualSampler, SeedDeterminismBitwise) {
  auto ds = tiny_binary(5, 40);
  DualSampler a(ds, 10, 0.4, 77);
  DualSampler b(ds, 10, 0.4, 77);
  for (int t = 0; t < 200; ++t) {
    MiniBatch ba = a.next_batch(), bb = b.next_batch();
    ASSERT_EQ(ba.pos_indices, bb.pos_indices);
    ASSERT_EQ(ba.neg_indices, bb.neg_indices);
  }
  DualSampler c(ds, 10, 0.4, 78);
  bool differs = false;
  DualSampler a2(ds, 10, 0.4, 77);
  for (int t = 0; t < 20 && !differs; ++t)
    differs = a2.next_batch().neg_indices != c.next_batch().neg_indices;
  EXPECT_TRUE(differs);
}

TEST(DualSampler, RateYieldingFullBatchIsError) {
  auto ds = tiny_binary(4, 9);
  try {
    DualSampler sampler(ds, 8, 0.97, 1);  // round(7.76) = 8 = batch_size
    FAIL() << "expected configuration error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::configuration);
  }
  EXPECT_THROW(DualSampler(ds, 8, 0.01, 1), Error);  // rounds to zero positives
}

TEST(DualSampler, EmptyClassIsError) {
  IndexedDataset ds;
  ds.kind = DatasetKind::binary;
  ds.features = Matrix(3, 1);
  ds.targets = {1.0, 1.0, 1.0};
  ds.refresh_counts();
  try {
    DualSampler sampler(ds, 2, 0.5, 0);
    FAIL() << "expected degenerate-dataset error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_labels);
  }
}

TEST(DualSampler, StateRoundTripContinuesBitwise) {
  auto ds = tiny_binary(5, 23);
  DualSampler a(ds, 8, 0.5, 99);
  for (int t = 0; t < 7; ++t) a.next_batch();
  auto state = a.save();
  DualSampler b(ds, 8, 0.5, 0);  // different seed; state overrides everything
  b.load(split(state, '\n'));
  for (int t = 0; t < 50; ++t) {
    MiniBatch ba = a.next_batch(), bb = b.next_batch();
    ASSERT_EQ(ba.pos_indices, bb.pos_indices);
    ASSERT_EQ(ba.neg_indices, bb.neg_indices);
  }
}

namespace {

IndexedDataset tiny_ltr(std::size_t queries, std::size_t pos_per_q, std::size_t neg_per_q) {
  IndexedDataset ds;
  ds.kind = DatasetKind::ltr;
  std::size_t m = pos_per_q + neg_per_q;
  ds.features = Matrix(queries * m, 1);
  for (std::size_t q = 0; q < queries; ++q)
    for (std::size_t r = 0; r < m; ++r) {
      ds.targets.push_back(r < pos_per_q ? 2.0 : 0.0);
      ds.query_of.push_back(q);
    }
  ds.refresh_counts();
  return ds;
}

}  // namespace

TEST(TriSampler, ExactQueryCount) {
  auto ds = tiny_ltr(10, 4, 12);
  TriSampler sampler(ds, 3, 6, 1.0 / 3.0, 2024);
  for (int t = 0; t < 200; ++t) {
    MiniBatch b = sampler.next_batch();
    ASSERT_EQ(b.query_ids.size(), 3u);
    std::set<std::size_t> distinct(b.query_ids.begin(), b.query_ids.end());
    EXPECT_EQ(distinct.size(), 3u) << "queries must be distinct within a batch";
  }
}

TEST(TriSampler, PerQueryComposition) {
  auto ds = tiny_ltr(5, 4, 12);
  TriSampler sampler(ds, 2, 6, 1.0 / 3.0, 11);  // 2 pos + 4 neg per query
  for (int t = 0; t < 100; ++t) {
    MiniBatch b = sampler.next_batch();
    ASSERT_EQ(b.per_query.size(), 2u);
    for (const auto& part : b.per_query) {
      EXPECT_EQ(part.pos.size(), 2u);
      EXPECT_EQ(part.neg.size(), 4u);
      for (std::size_t i : part.pos) {
        EXPECT_EQ(ds.query_of[i], part.query);
        EXPECT_GT(ds.targets[i], 0.0);
      }
      for (std::size_t i : part.neg) {
        EXPECT_EQ(ds.query_of[i], part.query);
        EXPECT_EQ(ds.targets[i], 0.0);
      }
    }
  }
}

TEST(TriSampler, SeedDeterminism) {
  auto ds = tiny_ltr(8, 3, 9);
  TriSampler a(ds, 4, 4, 0.25, 5);
  TriSampler b(ds, 4, 4, 0.25, 5);
  for (int t = 0; t < 100; ++t) {
    MiniBatch ba = a.next_batch(), bb = b.next_batch();
    ASSERT_EQ(ba.query_ids, bb.query_ids);
    ASSERT_EQ(ba.pos_indices, bb.pos_indices);
    ASSERT_EQ(ba.neg_indices, bb.neg_indices);
  }
}

TEST(TriSampler, TooFewQueriesIsError) {
  auto ds = tiny_ltr(2, 2, 4);
  EXPECT_THROW(TriSampler(ds, 3, 4, 0.5, 0), Error);
}

TEST(RandomSampler, EpochPartition) {
  RandomSampler sampler(10, 4, 3, /*drop_remainder=*/false);
  EXPECT_EQ(sampler.batches_per_epoch(), 3u);
  std::multiset<std::size_t> seen;
  std::vector<std::size_t> sizes;
  for (int t = 0; t < 3; ++t) {
    MiniBatch b = sampler.next_batch();
    sizes.push_back(b.pos_indices.size());
    seen.insert(b.pos_indices.begin(), b.pos_indices.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 2}));
  EXPECT_EQ(seen.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(seen.count(i), 1u);

  RandomSampler dropper(10, 4, 3, /*drop_remainder=*/true);
  EXPECT_EQ(dropper.batches_per_epoch(), 2u);
}

TEST(RandomSampler, SeedDeterminism) {
  RandomSampler a(50, 7, 21), b(50, 7, 21);
  for (int t = 0; t < 60; ++t) ASSERT_EQ(a.next_batch().pos_indices, b.next_batch().pos_indices);
}
