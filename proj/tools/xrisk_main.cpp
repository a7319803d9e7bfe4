#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xrisk/xrisk.hpp"

namespace {

// eval reads a two-column csv: header "label,score"; labels are +1/-1 or
// nonnegative relevance grades.
xrisk::LabeledScores load_scores_csv(const std::string& path) {
  auto lines = xrisk::read_lines(path);
  xrisk::require(lines.size() >= 2, xrisk::ErrorKind::parse, path + ": no data rows");
  auto header = xrisk::split(lines[0]);
  xrisk::require(header.size() == 2 && header[0] == "label" && header[1] == "score",
                 xrisk::ErrorKind::parse, path + ": expected header 'label,score'");
  xrisk::LabeledScores ls;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto cells = xrisk::split(lines[r]);
    const std::string ctx = path + " row " + std::to_string(r + 1);
    xrisk::require(cells.size() == 2, xrisk::ErrorKind::parse, ctx + ": want 2 columns");
    ls.labels.push_back(xrisk::parse_double(cells[0], ctx));
    ls.scores.push_back(xrisk::parse_double(cells[1], ctx));
  }
  return ls;
}

void print_summary(const xrisk::RunRecord& record) {
  for (const auto& s : record.final_summary)
    std::printf("%s,%s,%s\n", s.split.c_str(), s.metric.c_str(),
                xrisk::format_double(s.value).c_str());
  std::printf("run,clamp_events,%zu\n", record.clamp_events);
  std::printf("run,clip_events,%zu\n", record.clip_events);
  std::printf("run,skipped_steps,%zu\n", record.skipped_steps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale X-risk optimization harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values_csv, scores_path, metrics_csv,
      spec_path, gen_out;
  long long seed_override = -1;

  auto* train = app.add_subcommand("train", "run one training configuration");
  train->add_option("--config", config_path, "run config file")->required();
  train->add_option("--seed", seed_override, "override the config seed");
  train->add_option("--out", out_dir, "output directory for curve CSVs");

  auto* sweep = app.add_subcommand("sweep", "ablation sweep along one axis");
  sweep->add_option("--config", config_path, "run config file")->required();
  sweep->add_option("--axis", axis, "gamma | sampling_rate | batch_size")->required();
  sweep->add_option("--values", values_csv, "comma-separated axis values")->required();
  sweep->add_option("--seed", seed_override, "override the config seed");
  sweep->add_option("--out", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "exact metrics for a scores csv");
  eval->add_option("--scores", scores_path, "csv with header label,score")->required();
  eval->add_option("--metrics", metrics_csv, "e.g. auroc,ap,pauc:0.3,ndcg:5")->required();

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset csv");
  gen->add_option("--spec", spec_path, "config file with dataset keys")->required();
  gen->add_option("--out", gen_out, "output csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      xrisk::RunConfig cfg = xrisk::parse_config(config_path);
      if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      xrisk::RunRecord record = xrisk::run_training(cfg);
      if (!cfg.out_dir.empty()) xrisk::emit_curves(record, cfg.metrics, cfg.out_dir);
      print_summary(record);
    } else if (sweep->parsed()) {
      xrisk::RunConfig cfg = xrisk::parse_config(config_path);
      if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
      std::vector<std::string> values;
      for (auto& v : xrisk::split(values_csv)) {
        auto t = xrisk::trim(v);
        if (!t.empty()) values.push_back(t);
      }
      xrisk::SweepResult result = xrisk::run_sweep(cfg, axis, values);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        xrisk::write_text(
            (std::filesystem::path(out_dir) / ("sweep_" + axis + ".csv")).string(),
            result.summary_csv);
      }
      std::fputs(result.summary_csv.c_str(), stdout);
    } else if (eval->parsed()) {
      auto ls = load_scores_csv(scores_path);
      auto requests = xrisk::parse_metric_list(metrics_csv);
      for (const auto& [name, value] : xrisk::evaluate_all(ls, requests))
        std::printf("%s,%s\n", name.c_str(), xrisk::format_double(value).c_str());
    } else if (gen->parsed()) {
      xrisk::RunConfig cfg = xrisk::parse_config(spec_path);
      xrisk::require(!cfg.data_from_csv, xrisk::ErrorKind::configuration,
                     "gen needs a synthetic dataset spec");
      xrisk::require(cfg.data.kind != xrisk::SynthSpec::Kind::contrastive,
                     xrisk::ErrorKind::configuration,
                     "contrastive datasets are generated in memory, not as csv");
      xrisk::SynthSpec spec = cfg.data;
      spec.seed = xrisk::mix_seed(cfg.seed, 10);
      xrisk::save_csv_dataset(gen_out, xrisk::generate(spec));
      std::printf("wrote %s\n", gen_out.c_str());
    }
  } catch (const xrisk::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 2;
  }
  return 0;
}
