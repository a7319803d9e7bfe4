#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xrisk/config.hpp"
#include "xrisk/csv.hpp"
#include "xrisk/dataset.hpp"
#include "xrisk/error.hpp"
#include "xrisk/estimator.hpp"
#include "xrisk/losses.hpp"
#include "xrisk/metrics.hpp"
#include "xrisk/model.hpp"
#include "xrisk/optim.hpp"
#include "xrisk/oracle.hpp"
#include "xrisk/sampler.hpp"

namespace xrisk {

struct EvalRow {
  std::size_t epoch;
  std::string split;
  std::string metric;
  double value;
  double wall_seconds;  // in-memory only; never emitted
};

struct SummaryRow {
  std::string split;
  std::string metric;
  double value;
};

struct RunRecord {
  std::vector<EvalRow> rows;
  std::vector<SummaryRow> final_summary;
  std::size_t clamp_events = 0;
  std::size_t clip_events = 0;
  std::size_t skipped_steps = 0;

  double value_at(std::size_t epoch, const std::string& split,
                  const std::string& metric) const {
    for (const auto& r : rows)
      if (r.epoch == epoch && r.split == split && r.metric == metric) return r.value;
    fail(ErrorKind::out_of_range, "no eval row for " + split + "/" + metric +
                                      " at epoch " + std::to_string(epoch));
  }

  double final_value(const std::string& split, const std::string& metric) const {
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
      if (it->split == split && it->metric == metric) return it->value;
    fail(ErrorKind::out_of_range, "no eval rows for " + split + "/" + metric);
  }
};

// Metrics the harness can evaluate: the exact metrics module plus the two
// contrastive diagnostics.
struct HarnessMetric {
  enum class Kind { standard, gcl_objective, align_gap } kind;
  MetricRequest request;  // standard only
  std::string name;
};

inline std::vector<HarnessMetric> parse_harness_metrics(const std::string& list) {
  std::vector<HarnessMetric> out;
  for (const auto& raw : split(list)) {
    auto tok = trim(raw);
    if (tok.empty()) continue;
    HarnessMetric m;
    m.name = tok;
    if (tok == "gcl_objective")
      m.kind = HarnessMetric::Kind::gcl_objective;
    else if (tok == "align_gap")
      m.kind = HarnessMetric::Kind::align_gap;
    else {
      m.kind = HarnessMetric::Kind::standard;
      m.request = parse_metric(tok);
    }
    out.push_back(std::move(m));
  }
  require(!out.empty(), ErrorKind::configuration, "empty metric list");
  return out;
}

namespace harness_detail {

inline std::vector<double> column0(const Matrix& m) {
  std::vector<double> out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) out[r] = m.at(r, 0);
  return out;
}

// Mean per-query ndcg@k over the split.
inline double mean_query_ndcg(const IndexedDataset& ds, const std::vector<double>& scores,
                              std::size_t k) {
  auto items = ds.items_by_query();
  double acc = 0.0;
  for (const auto& q_items : items) {
    std::vector<double> rel, sc;
    rel.reserve(q_items.size());
    for (std::size_t i : q_items) {
      rel.push_back(ds.targets[i]);
      sc.push_back(scores[i]);
    }
    acc += ndcg_at_k(rel, sc, k);
  }
  return acc / static_cast<double>(items.size());
}

struct GclEval {
  double objective = 0.0;
  double align_gap = 0.0;
};

// Exact global contrastive diagnostics over all views: plug-in objective
// mean[tau log g - s_pos] and the positive/negative mean-similarity gap.
inline GclEval gcl_eval(const ScoringModel& model, const ParamVector& w,
                        const IndexedDataset& ds, double tau) {
  Matrix e = model.forward(w, ds.features);
  const std::size_t rows = e.rows;
  Matrix unit = e;
  for (std::size_t r = 0; r < rows; ++r) {
    double nrm = std::max(l2_norm(e.row(r)), 1e-12);
    for (std::size_t c = 0; c < e.cols; ++c) unit.at(r, c) /= nrm;
  }
  GclEval out;
  double pos_sim = 0.0, neg_sim = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t partner = r ^ 1;
    double sp = dot(unit.row(r), unit.row(partner));
    pos_sim += sp;
    double acc = 0.0;
    for (std::size_t c = 0; c < rows; ++c) {
      if (c == r || c == partner) continue;
      double s = dot(unit.row(r), unit.row(c));
      neg_sim += s;
      acc += std::exp(s / tau);
    }
    out.objective += tau * std::log(acc / static_cast<double>(rows - 2)) - sp;
  }
  out.objective /= static_cast<double>(rows);
  out.align_gap = pos_sim / static_cast<double>(rows) -
                  neg_sim / static_cast<double>(rows * (rows - 2));
  return out;
}

}  // namespace harness_detail

// One training run: dataset -> controlled sampler -> model -> dynamic
// mini-batch loss -> optimizer, with exact metric evaluation on the full
// train/test splits at the configured cadence.
class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    metrics_ = parse_harness_metrics(cfg_.metrics);
    build_datasets();
    build_model();
    build_states();
  }

  // test instrumentation: invoked right after a warm-start switch
  std::function<void(const Trainer&)> after_warm_hook;

  RunRecord run() {
    auto t0 = std::chrono::steady_clock::now();
    wall_start_ = t0;
    if (!cfg_.resume_from.empty()) {
      load_checkpoint(cfg_.resume_from);
    } else {
      if (cfg_.warm_start_epochs > 0) run_warm_phase();
      evaluate_to_record(start_epoch_);
    }
    for (std::size_t e = start_epoch_; e < cfg_.epochs; ++e) {
      current_epoch_ = e;
      double mult = schedule_.multiplier(e);
      const std::size_t steps = steps_per_epoch();
      for (std::size_t s = 0; s < steps; ++s) train_step(cfg_.loss, mult, *opt_);
      if ((e + 1) % cfg_.eval_every == 0 || e + 1 == cfg_.epochs)
        evaluate_to_record(e + 1);
      if (cfg_.checkpoint_at >= 0 &&
          static_cast<std::size_t>(cfg_.checkpoint_at) == e && !cfg_.out_dir.empty())
        save_checkpoint(checkpoint_dir());
    }
    finalize_summary();
    return record_;
  }

  std::string checkpoint_dir() const {
    return (std::filesystem::path(cfg_.out_dir) / "checkpoint").string();
  }

  const InnerEstimatorBank* bank() const { return bank_ ? &*bank_ : nullptr; }
  const Optimizer& optimizer() const { return *opt_; }
  const ParamVector& params() const { return w_; }
  const MinMaxState& minmax() const { return mm_; }
  const IndexedDataset& train_data() const { return train_; }
  const IndexedDataset& test_data() const { return test_; }

  void save_checkpoint(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    auto p = [&](const char* f) { return (std::filesystem::path(dir) / f).string(); };
    save_params(p("params.csv"), model_, w_);
    write_text(p("optimizer.txt"), opt_->save());
    if (bank_) write_text(p("bank.csv"), bank_->to_csv());
    write_text(p("minmax.txt"), format_double(mm_.a) + "," + format_double(mm_.b) + "," +
                                    format_double(mm_.alpha) + "\n");
    write_text(p("sampler.txt"), save_sampler());
    write_text(p("meta.txt"),
               "next_epoch=" + std::to_string(current_epoch_ + 1) + "\n" +
                   "clamp_events=" + std::to_string(record_.clamp_events) + "\n" +
                   "clip_events=" + std::to_string(record_.clip_events) + "\n" +
                   "skipped_steps=" + std::to_string(record_.skipped_steps) + "\n");
  }

 private:
  void build_datasets() {
    if (cfg_.data_from_csv) {
      require(!cfg_.dataset_path.empty(), ErrorKind::configuration,
              "csv dataset needs dataset_path");
      train_ = load_csv_dataset(cfg_.dataset_path, cfg_.csv_format);
      test_ = cfg_.test_path.empty() ? train_
                                     : load_csv_dataset(cfg_.test_path, cfg_.csv_format);
    } else {
      SynthSpec train_spec = cfg_.data;
      train_spec.seed = mix_seed(cfg_.seed, 10);
      train_ = generate(train_spec);
      SynthSpec test_spec = cfg_.data;
      test_spec.seed = mix_seed(cfg_.seed, 11);
      if (cfg_.test_n > 0) {
        if (test_spec.kind == SynthSpec::Kind::ltr)
          test_spec.queries = std::max<std::size_t>(1, cfg_.test_n / test_spec.items_per_query);
        else
          test_spec.n = cfg_.test_n;
      }
      test_ = generate(test_spec);
    }
  }

  void build_model() {
    model_ = cfg_.model;
    model_.input_dim = train_.dim();
    if (cfg_.loss != LossKind::gcl)
      require(model_.output_dim == 1, ErrorKind::configuration,
              "scoring losses need output_dim = 1");
    w_ = model_.init_params(mix_seed(cfg_.seed, 20));
  }

  void build_states() {
    mm_ = MinMaxState{0.0, 0.0, 0.0, cfg_.aucm_margin_c};
    opt_ = std::make_unique<Optimizer>(cfg_.optim, w_.size());
    schedule_ = StepDecaySchedule{cfg_.epochs};
    bank_ = make_bank(cfg_.loss);
    std::uint64_t sseed = mix_seed(cfg_.seed, 30);
    switch (cfg_.sampler) {
      case SamplerKind::dual:
        dual_.emplace(train_, cfg_.batch_size, cfg_.sampling_rate, sseed,
                      cfg_.drop_remainder);
        break;
      case SamplerKind::tri:
        tri_.emplace(train_, cfg_.sampled_tasks, cfg_.batch_size_per_task,
                     cfg_.sampling_rate_per_task, sseed);
        break;
      case SamplerKind::random:
        random_.emplace(train_.n_items(), cfg_.batch_size, sseed, cfg_.drop_remainder);
        break;
    }
  }

  std::optional<InnerEstimatorBank> make_bank(LossKind loss) const {
    const std::size_t n = train_.n_items();
    switch (loss) {
      case LossKind::pauc:
        return InnerEstimatorBank(n, cfg_.gamma, false, true);
      case LossKind::ap:
        return InnerEstimatorBank(n, cfg_.gamma, true, false);
      case LossKind::ndcg:
        return InnerEstimatorBank(n, cfg_.gamma, false, false);
      case LossKind::listwise_ce:
        return InnerEstimatorBank(n, cfg_.gamma, false, true);
      case LossKind::gcl:
        return InnerEstimatorBank(2 * n, cfg_.gamma, false, true);
      default:
        return std::nullopt;
    }
  }

  std::size_t steps_per_epoch() const {
    switch (cfg_.sampler) {
      case SamplerKind::dual:   return dual_->batches_per_epoch();
      case SamplerKind::random: return random_->batches_per_epoch();
      case SamplerKind::tri: {
        std::size_t nq = tri_->n_queries();
        return (nq + cfg_.sampled_tasks - 1) / cfg_.sampled_tasks;
      }
    }
    return 0;
  }

  MiniBatch next_batch() {
    switch (cfg_.sampler) {
      case SamplerKind::dual:   return dual_->next_batch();
      case SamplerKind::tri:    return tri_->next_batch();
      case SamplerKind::random: return random_->next_batch();
    }
    return {};
  }

  // Random batches carry all indices in pos_indices; class-pair losses need
  // the split (and skip single-class draws).
  bool split_for_cid(MiniBatch& batch) {
    if (cfg_.sampler != SamplerKind::random) return true;
    std::vector<std::size_t> pos, neg;
    for (std::size_t i : batch.pos_indices)
      (train_.targets[i] > 0 ? pos : neg).push_back(i);
    batch.pos_indices = std::move(pos);
    batch.neg_indices = std::move(neg);
    return !batch.pos_indices.empty() && !batch.neg_indices.empty();
  }

  void train_step(LossKind loss, double lr_multiplier, Optimizer& opt) {
    MiniBatch batch = next_batch();
    DynamicLossOutput out;
    switch (loss) {
      case LossKind::aucm: {
        if (!split_for_cid(batch)) {
          ++record_.skipped_steps;
          return;
        }
        AucmOutput ag = aucm_loss_and_grads(model_, w_, train_, batch, mm_);
        pesg_step(opt, w_, mm_, ag, lr_multiplier);
        return;
      }
      case LossKind::pauc:
        if (!split_for_cid(batch)) {
          ++record_.skipped_steps;
          return;
        }
        out = pauc_dynamic_loss(model_, w_, train_, batch, cfg_.surrogate, cfg_.lambda,
                                *bank_, cfg_.theory_order);
        break;
      case LossKind::ap:
        if (!split_for_cid(batch)) {
          ++record_.skipped_steps;
          return;
        }
        out = ap_dynamic_loss(model_, w_, train_, batch, cfg_.surrogate, *bank_,
                              cfg_.theory_order);
        break;
      case LossKind::ndcg:
        out = ndcg_dynamic_loss(model_, w_, train_, batch, cfg_.surrogate, *bank_,
                                cfg_.theory_order);
        break;
      case LossKind::listwise_ce:
        out = listwise_ce_dynamic_loss(model_, w_, train_, batch, *bank_,
                                       cfg_.theory_order);
        break;
      case LossKind::gcl:
        out = gcl_dynamic_loss(model_, w_, train_, batch, cfg_.tau, *bank_,
                               cfg_.theory_order);
        break;
      case LossKind::ce:
        out = ce_loss(model_, w_, train_, batch);
        break;
      case LossKind::focal:
        out = focal_loss(model_, w_, train_, batch, cfg_.focal_alpha_hat,
                         cfg_.focal_gamma_hat);
        break;
    }
    record_.clamp_events += out.clamp_events;
    record_.clip_events += out.clip_events;
    opt.step(w_, out.grad_w, lr_multiplier);
  }

  void run_warm_phase() {
    LossKind warm = cfg_.warm_loss_kind();
    OptimizerConfig warm_cfg = cfg_.optim;
    if (cfg_.warm_start_lr > 0) warm_cfg.lr = cfg_.warm_start_lr;
    Optimizer warm_opt(warm_cfg, w_.size());
    // flat learning rate during pretraining
    for (std::size_t e = 0; e < cfg_.warm_start_epochs; ++e) {
      const std::size_t steps = steps_per_epoch();
      for (std::size_t s = 0; s < steps; ++s) train_step(warm, 1.0, warm_opt);
    }
    if (cfg_.warm_start_reinit_head) reinit_head();
    // the loss switch: fresh estimator bank and fresh optimizer moments
    bank_ = make_bank(cfg_.loss);
    opt_ = std::make_unique<Optimizer>(cfg_.optim, w_.size());
    if (after_warm_hook) after_warm_hook(*this);
  }

  void reinit_head() {
    std::uint64_t seed = mix_seed(cfg_.seed, 21);
    if (model_.kind == ModelKind::linear) {
      w_ = model_.init_params(seed);
      return;
    }
    Rng rng(mix_seed(seed, 0x70a7));
    double bound = 1.0 / std::sqrt(static_cast<double>(model_.hidden_dim));
    std::size_t l1 = model_.input_dim * model_.hidden_dim + model_.hidden_dim;
    for (std::size_t i = l1; i < w_.size(); ++i) w_[i] = rng.uniform(-bound, bound);
  }

  void evaluate_to_record(std::size_t epoch) {
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                wall_start_)
                      .count();
    evaluate_split(epoch, "train", train_, wall);
    evaluate_split(epoch, "test", test_, wall);
  }

  void evaluate_split(std::size_t epoch, const std::string& split,
                      const IndexedDataset& ds, double wall) {
    if (ds.kind == DatasetKind::contrastive) {
      auto ge = harness_detail::gcl_eval(model_, w_, ds, cfg_.tau);
      for (const auto& m : metrics_) {
        require(m.kind != HarnessMetric::Kind::standard, ErrorKind::configuration,
                "metric '" + m.name + "' is not defined for contrastive data");
        double v = m.kind == HarnessMetric::Kind::gcl_objective ? ge.objective
                                                                : ge.align_gap;
        record_.rows.push_back({epoch, split, m.name, v, wall});
      }
      return;
    }
    Matrix h = model_.forward(w_, ds.features);
    auto scores = harness_detail::column0(h);
    for (const auto& m : metrics_) {
      require(m.kind == HarnessMetric::Kind::standard, ErrorKind::configuration,
              "metric '" + m.name + "' needs contrastive data");
      double v = 0.0;
      if (m.request.kind == MetricRequest::Kind::ndcg && ds.kind == DatasetKind::ltr) {
        v = harness_detail::mean_query_ndcg(ds, scores, m.request.k);
      } else {
        LabeledScores ls{scores, ds.targets};
        v = evaluate_all(ls, {m.request})[0].second;
      }
      record_.rows.push_back({epoch, split, m.name, v, wall});
    }
  }

  void finalize_summary() {
    if (record_.rows.empty()) return;
    std::size_t last_epoch = record_.rows.back().epoch;
    for (const auto& split : {std::string("train"), std::string("test")})
      for (const auto& m : metrics_)
        record_.final_summary.push_back(
            {split, m.name, record_.value_at(last_epoch, split, m.name)});
  }

  std::string save_sampler() const {
    switch (cfg_.sampler) {
      case SamplerKind::dual:   return dual_->save();
      case SamplerKind::tri:    return tri_->save();
      case SamplerKind::random: return random_->save();
    }
    return "";
  }

  void load_checkpoint(const std::string& dir) {
    auto p = [&](const char* f) { return (std::filesystem::path(dir) / f).string(); };
    w_ = load_params(p("params.csv"), model_);
    opt_->load(read_lines(p("optimizer.txt")));
    if (bank_) bank_->from_csv(read_lines(p("bank.csv")));
    auto mmline = split(read_lines(p("minmax.txt")).at(0));
    require(mmline.size() == 3, ErrorKind::parse, "minmax checkpoint");
    mm_.a = parse_double(mmline[0], "minmax a");
    mm_.b = parse_double(mmline[1], "minmax b");
    mm_.alpha = parse_double(mmline[2], "minmax alpha");
    auto slines = read_lines(p("sampler.txt"));
    switch (cfg_.sampler) {
      case SamplerKind::dual:   dual_->load(slines); break;
      case SamplerKind::tri:    tri_->load(slines); break;
      case SamplerKind::random: random_->load(slines); break;
    }
    for (const auto& line : read_lines(p("meta.txt"))) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      if (key == "next_epoch")
        start_epoch_ = static_cast<std::size_t>(parse_int(val, "meta next_epoch"));
      else if (key == "clamp_events")
        record_.clamp_events = static_cast<std::size_t>(parse_int(val, "meta"));
      else if (key == "clip_events")
        record_.clip_events = static_cast<std::size_t>(parse_int(val, "meta"));
      else if (key == "skipped_steps")
        record_.skipped_steps = static_cast<std::size_t>(parse_int(val, "meta"));
    }
  }

  RunConfig cfg_;
  std::vector<HarnessMetric> metrics_;
  IndexedDataset train_, test_;
  ScoringModel model_;
  ParamVector w_;
  MinMaxState mm_;
  std::unique_ptr<Optimizer> opt_;
  StepDecaySchedule schedule_;
  std::optional<InnerEstimatorBank> bank_;
  std::optional<DualSampler> dual_;
  std::optional<TriSampler> tri_;
  std::optional<RandomSampler> random_;
  RunRecord record_;
  std::size_t start_epoch_ = 0;
  std::size_t current_epoch_ = 0;
  std::chrono::steady_clock::time_point wall_start_;
};

inline RunRecord run_training(const RunConfig& cfg) { return Trainer(cfg).run(); }

// Curve CSVs (one per split: epoch + metric columns in config order) and the
// final summary CSV. Deterministic bytes; re-emission is identical.
inline void emit_curves(const RunRecord& record, const std::string& metrics_list,
                        const std::string& dir) {
  require(!record.rows.empty(), ErrorKind::configuration, "empty record");
  std::filesystem::create_directories(dir);
  auto metrics = parse_harness_metrics(metrics_list);
  for (const auto& split_name : {std::string("train"), std::string("test")}) {
    std::vector<std::size_t> epochs;
    for (const auto& r : record.rows)
      if (r.split == split_name && (epochs.empty() || epochs.back() != r.epoch))
        epochs.push_back(r.epoch);
    std::string out = "epoch";
    for (const auto& m : metrics) out += "," + m.name;
    out += "\n";
    for (std::size_t e : epochs) {
      out += std::to_string(e);
      for (const auto& m : metrics)
        out += "," + format_double(record.value_at(e, split_name, m.name));
      out += "\n";
    }
    write_text((std::filesystem::path(dir) / ("curves_" + split_name + ".csv")).string(),
               out);
  }
  std::string out = "split,metric,value\n";
  for (const auto& s : record.final_summary)
    out += s.split + "," + s.metric + "," + format_double(s.value) + "\n";
  out += "run,clamp_events," + std::to_string(record.clamp_events) + "\n";
  out += "run,clip_events," + std::to_string(record.clip_events) + "\n";
  out += "run,skipped_steps," + std::to_string(record.skipped_steps) + "\n";
  write_text((std::filesystem::path(dir) / "summary.csv").string(), out);
}

struct SweepRun {
  std::string axis_value;
  double gamma_used = 0.0;
  double final_metric = 0.0;
  RunRecord record;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::string summary_csv;
};

// The gamma grid used when an axis requires per-point tuning.
inline const std::vector<double>& gamma_grid() {
  static const std::vector<double> grid{0.1, 0.3, 0.5, 0.7, 0.9};
  return grid;
}

// Ablation sweeps along gamma, sampling_rate (including the uncontrolled
// `original` sampler), or batch_size (each size run gamma-tuned and at
// gamma = 1).
inline SweepResult run_sweep(const RunConfig& base, const std::string& axis,
                             const std::vector<std::string>& values) {
  require(!values.empty(), ErrorKind::configuration, "sweep needs values");
  SweepResult result;
  auto metric_name = parse_harness_metrics(base.metrics).front().name;

  auto run_one = [&](const RunConfig& cfg) {
    RunRecord rec = run_training(cfg);
    return std::make_pair(rec.final_value("test", metric_name), std::move(rec));
  };

  if (axis == "gamma" || axis == "sampling_rate") {
    for (const auto& v : values) {
      RunConfig cfg = base;
      if (axis == "gamma") {
        cfg.gamma = parse_double(v, "sweep gamma value");
      } else if (v == "original") {
        cfg.sampler = SamplerKind::random;  // uncontrolled baseline sampler
        cfg.drop_remainder = false;
      } else {
        cfg.sampling_rate = parse_double(v, "sweep sampling_rate value");
      }
      auto [metric, rec] = run_one(cfg);
      result.runs.push_back({v, cfg.gamma, metric, std::move(rec)});
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.runs.size(); ++i)
      if (result.runs[i].final_metric > result.runs[best].final_metric) best = i;
    std::string csv = "axis,value,final_" + metric_name + ",best\n";
    for (std::size_t i = 0; i < result.runs.size(); ++i)
      csv += axis + "," + result.runs[i].axis_value + "," +
             format_double(result.runs[i].final_metric) + (i == best ? ",1\n" : ",0\n");
    result.summary_csv = csv;
    return result;
  }

  if (axis == "batch_size") {
    struct Row {
      std::string value;
      double tuned_gamma, tuned_metric, static_metric;
    };
    std::vector<Row> rows;
    for (const auto& v : values) {
      RunConfig cfg = base;
      long long bs = parse_int(v, "sweep batch_size value");
      require(bs >= 2, ErrorKind::configuration, "batch_size must be >= 2");
      cfg.batch_size = static_cast<std::size_t>(bs);
      double best_gamma = gamma_grid().front(), best_metric = 0.0;
      bool first = true;
      for (double g : gamma_grid()) {
        RunConfig tuned = cfg;
        tuned.gamma = g;
        auto [metric, rec] = run_one(tuned);
        result.runs.push_back({v + ":gamma=" + format_double(g), g, metric, std::move(rec)});
        if (first || metric > best_metric) {
          best_metric = metric;
          best_gamma = g;
          first = false;
        }
      }
      RunConfig stat = cfg;
      stat.gamma = 1.0;
      auto [static_metric, rec] = run_one(stat);
      result.runs.push_back({v + ":gamma=1", 1.0, static_metric, std::move(rec)});
      rows.push_back({v, best_gamma, best_metric, static_metric});
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].tuned_metric > rows[best].tuned_metric) best = i;
    std::string csv = "axis,value,tuned_gamma,tuned_" + metric_name + ",static_" +
                      metric_name + ",best\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
      csv += "batch_size," + rows[i].value + "," + format_double(rows[i].tuned_gamma) +
             "," + format_double(rows[i].tuned_metric) + "," +
             format_double(rows[i].static_metric) + (i == best ? ",1\n" : ",0\n");
    result.summary_csv = csv;
    return result;
  }

  fail(ErrorKind::configuration, "unknown sweep axis '" + axis + "'");
}

}  // namespace xrisk
