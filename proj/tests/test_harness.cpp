#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "xrisk/harness.hpp"

using namespace xrisk;

namespace {

RunConfig tiny_binary_cfg(LossKind loss) {
  RunConfig cfg;
  cfg.data.kind = SynthSpec::Kind::gaussian_binary;
  cfg.data.n = 120;
  cfg.data.dim = 4;
  cfg.data.imratio = 0.2;
  cfg.data.separation = 1.5;
  cfg.test_n = 80;
  cfg.loss = loss;
  cfg.sampler = default_sampler_for(loss);
  cfg.batch_size = 16;
  cfg.sampling_rate = 0.25;
  cfg.gamma = 0.5;
  cfg.epochs = 3;
  cfg.optim.lr = 0.05;
  cfg.metrics = "auroc,ap";
  cfg.seed = 7;
  return cfg;
}

bool rows_equal(const std::vector<EvalRow>& a, const std::vector<EvalRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch || a[i].split != b[i].split ||
        a[i].metric != b[i].metric)
      return false;
    if (std::memcmp(&a[i].value, &b[i].value, sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST(Harness, ZeroEpochsYieldsInitialEvaluationOnly) {
  RunConfig cfg = tiny_binary_cfg(LossKind::aucm);
  cfg.epochs = 0;
  RunRecord rec = run_training(cfg);
  ASSERT_EQ(rec.rows.size(), 4u);  // 2 splits x 2 metrics at epoch 0
  for (const auto& r : rec.rows) EXPECT_EQ(r.epoch, 0u);
}

TEST(Harness, IdenticalConfigAndSeedReproducesBitwise) {
  for (LossKind loss : {LossKind::aucm, LossKind::pauc, LossKind::ap, LossKind::ce}) {
    RunConfig cfg = tiny_binary_cfg(loss);
    RunRecord a = run_training(cfg);
    RunRecord b = run_training(cfg);
    EXPECT_TRUE(rows_equal(a.rows, b.rows)) << loss_kind_name(loss);
    EXPECT_EQ(a.clamp_events, b.clamp_events);
    EXPECT_EQ(a.skipped_steps, b.skipped_steps);
  }
}

TEST(Harness, SeedChangesTrajectory) {
  RunConfig cfg = tiny_binary_cfg(LossKind::pauc);
  RunRecord a = run_training(cfg);
  cfg.seed = 8;
  RunRecord b = run_training(cfg);
  EXPECT_FALSE(rows_equal(a.rows, b.rows));
}

TEST(Harness, LtrAndGclRunEndToEnd) {
  RunConfig ltr;
  ltr.data.kind = SynthSpec::Kind::ltr;
  ltr.data.queries = 6;
  ltr.data.items_per_query = 12;
  ltr.data.dim = 4;
  ltr.data.noise = 0.2;
  ltr.loss = LossKind::ndcg;
  ltr.sampler = SamplerKind::tri;
  ltr.sampled_tasks = 2;
  ltr.batch_size_per_task = 6;
  ltr.sampling_rate_per_task = 1.0 / 3.0;
  ltr.gamma = 0.5;
  ltr.epochs = 4;
  ltr.optim.lr = 0.05;
  ltr.metrics = "ndcg:5";
  ltr.seed = 3;
  RunRecord lrec = run_training(ltr);
  double v = lrec.final_value("test", "ndcg:5");
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1.0);

  RunConfig gcl;
  gcl.data.kind = SynthSpec::Kind::contrastive;
  gcl.data.n = 24;
  gcl.data.dim = 4;
  gcl.data.noise = 0.2;
  gcl.test_n = 16;
  gcl.loss = LossKind::gcl;
  gcl.sampler = SamplerKind::random;
  gcl.model.output_dim = 3;
  gcl.batch_size = 8;
  gcl.drop_remainder = true;
  gcl.gamma = 0.7;
  gcl.tau = 0.5;
  gcl.epochs = 3;
  gcl.optim.lr = 0.1;
  gcl.metrics = "gcl_objective,align_gap";
  gcl.seed = 4;
  RunRecord grec = run_training(gcl);
  // training should not blow up; objective finite, alignment in [-2, 2]
  double obj = grec.final_value("test", "gcl_objective");
  EXPECT_TRUE(std::isfinite(obj));
  double gap = grec.final_value("test", "align_gap");
  EXPECT_GE(gap, -2.0);
  EXPECT_LE(gap, 2.0);
}

TEST(Harness, WarmStartResetsBankAndMoments) {
  RunConfig cfg = tiny_binary_cfg(LossKind::pauc);
  cfg.warm_start_epochs = 2;
  cfg.epochs = 1;
  Trainer trainer(cfg);
  bool probed = false;
  trainer.after_warm_hook = [&](const Trainer& t) {
    probed = true;
    ASSERT_NE(t.bank(), nullptr);
    for (std::size_t i = 0; i < t.bank()->size(); ++i)
      EXPECT_FALSE(t.bank()->touched(i)) << "bank must be fresh after the switch";
    EXPECT_EQ(t.optimizer().step_count(), 0u) << "moments must be fresh";
  };
  trainer.run();
  EXPECT_TRUE(probed);
}

TEST(Harness, WarmStartChangesOutcomeDeterministically) {
  RunConfig cfg = tiny_binary_cfg(LossKind::aucm);
  cfg.warm_start_epochs = 2;
  RunRecord a = run_training(cfg);
  RunRecord b = run_training(cfg);
  EXPECT_TRUE(rows_equal(a.rows, b.rows));
}

TEST(Harness, EmitCurvesDeterministicBytes) {
  RunConfig cfg = tiny_binary_cfg(LossKind::pauc);
  cfg.metrics = "auroc,pauc:0.3";
  RunRecord rec = run_training(cfg);

  auto dir = std::filesystem::temp_directory_path() / "xrisk_curves_test";
  std::filesystem::remove_all(dir);
  emit_curves(rec, cfg.metrics, dir.string());
  auto train_csv = read_lines((dir / "curves_train.csv").string());
  ASSERT_GE(train_csv.size(), 2u);
  EXPECT_EQ(train_csv[0], "epoch,auroc,pauc:0.3");  // columns follow config order
  // initial eval + one per epoch at cadence 1
  EXPECT_EQ(train_csv.size(), 1u + 1u + cfg.epochs);

  auto before = read_lines((dir / "summary.csv").string());
  emit_curves(rec, cfg.metrics, dir.string());
  EXPECT_EQ(read_lines((dir / "summary.csv").string()), before);
  EXPECT_EQ(read_lines((dir / "curves_train.csv").string()), train_csv);
  std::filesystem::remove_all(dir);
}

TEST(Harness, CheckpointResumeReproducesTailBitwise) {
  for (LossKind loss : {LossKind::pauc, LossKind::aucm, LossKind::ap}) {
    auto dir = std::filesystem::temp_directory_path() /
               ("xrisk_ckpt_" + std::string(loss_kind_name(loss)));
    std::filesystem::remove_all(dir);

    RunConfig cfg = tiny_binary_cfg(loss);
    cfg.epochs = 6;
    cfg.out_dir = dir.string();
    cfg.checkpoint_at = 2;  // write after epoch 2 completes
    RunRecord full = run_training(cfg);

    RunConfig resume_cfg = cfg;
    resume_cfg.resume_from = Trainer(cfg).checkpoint_dir();
    resume_cfg.checkpoint_at = -1;
    RunRecord resumed = run_training(resume_cfg);

    std::vector<EvalRow> tail;
    for (const auto& r : full.rows)
      if (r.epoch >= 4) tail.push_back(r);  // rows after the resume point
    EXPECT_TRUE(rows_equal(tail, resumed.rows)) << loss_kind_name(loss);

    ASSERT_EQ(full.final_summary.size(), resumed.final_summary.size());
    for (std::size_t i = 0; i < full.final_summary.size(); ++i) {
      EXPECT_EQ(full.final_summary[i].metric, resumed.final_summary[i].metric);
      EXPECT_EQ(std::memcmp(&full.final_summary[i].value, &resumed.final_summary[i].value,
                            sizeof(double)),
                0);
    }
    std::filesystem::remove_all(dir);
  }
}

TEST(Sweep, GammaBookkeeping) {
  RunConfig cfg = tiny_binary_cfg(LossKind::pauc);
  cfg.epochs = 2;
  cfg.metrics = "pauc:0.3";
  auto result = run_sweep(cfg, "gamma", {"0.2", "0.6", "1.0"});
  ASSERT_EQ(result.runs.size(), 3u);
  auto lines = split(result.summary_csv, '\n');
  EXPECT_EQ(lines[0], "axis,value,final_pauc:0.3,best");
  ASSERT_GE(lines.size(), 4u);
  int best_count = 0;
  for (std::size_t i = 1; i <= 3; ++i) best_count += split(lines[i]).back() == "1";
  EXPECT_EQ(best_count, 1);
}

TEST(Sweep, SamplingRateIncludesOriginal) {
  RunConfig cfg = tiny_binary_cfg(LossKind::aucm);
  cfg.epochs = 2;
  cfg.metrics = "auroc";
  auto result = run_sweep(cfg, "sampling_rate", {"original", "0.25", "0.5"});
  ASSERT_EQ(result.runs.size(), 3u);
  EXPECT_EQ(result.runs[0].axis_value, "original");
  EXPECT_NE(result.summary_csv.find("sampling_rate,original,"), std::string::npos);
}

TEST(Sweep, BatchSizeRunsTunedAndStaticVariants) {
  RunConfig cfg = tiny_binary_cfg(LossKind::pauc);
  cfg.epochs = 2;
  cfg.metrics = "pauc:0.3";
  auto result = run_sweep(cfg, "batch_size", {"16", "8"});
  // per size: 5 tuned-gamma runs + 1 static run
  EXPECT_EQ(result.runs.size(), 2u * (gamma_grid().size() + 1));
  auto lines = split(result.summary_csv, '\n');
  EXPECT_EQ(lines[0], "axis,value,tuned_gamma,tuned_pauc:0.3,static_pauc:0.3,best");
  ASSERT_GE(lines.size(), 3u);
}

TEST(Sweep, UnknownAxisIsError) {
  RunConfig cfg = tiny_binary_cfg(LossKind::pauc);
  EXPECT_THROW(run_sweep(cfg, "margin", {"0.5"}), Error);
}
