#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xrisk/csv.hpp"
#include "xrisk/dataset.hpp"
#include "xrisk/error.hpp"
#include "xrisk/metrics.hpp"
#include "xrisk/model.hpp"
#include "xrisk/optim.hpp"
#include "xrisk/oracle.hpp"
#include "xrisk/surrogate.hpp"

namespace xrisk {

enum class SamplerKind { dual, tri, random };

inline SamplerKind parse_sampler_kind(const std::string& s) {
  if (s == "dual") return SamplerKind::dual;
  if (s == "tri") return SamplerKind::tri;
  if (s == "random") return SamplerKind::random;
  fail(ErrorKind::configuration, "unknown sampler '" + s + "'");
}

inline const char* sampler_kind_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::dual:   return "dual";
    case SamplerKind::tri:    return "tri";
    case SamplerKind::random: return "random";
  }
  return "?";
}

// The loss <-> sampler <-> optimizer-wrapper pairing table. Optimizer mode
// (sgd momentum / adam) is free; the wrapper name is determined by the loss.
inline const char* optimizer_wrapper_name(LossKind loss) {
  switch (loss) {
    case LossKind::aucm:        return "pesg";
    case LossKind::ap:          return "soap";
    case LossKind::pauc:        return "sopas";
    case LossKind::ndcg:        return "song";
    case LossKind::listwise_ce: return "song";
    case LossKind::gcl:         return "sogclr";
    case LossKind::ce:
    case LossKind::focal:       return "plain";
  }
  return "?";
}

inline SamplerKind default_sampler_for(LossKind loss) {
  switch (loss) {
    case LossKind::aucm:
    case LossKind::ap:
    case LossKind::pauc:        return SamplerKind::dual;
    case LossKind::ndcg:
    case LossKind::listwise_ce: return SamplerKind::tri;
    case LossKind::gcl:
    case LossKind::ce:
    case LossKind::focal:       return SamplerKind::random;
  }
  return SamplerKind::random;
}

inline bool compatible(LossKind loss, SamplerKind sampler) {
  switch (loss) {
    case LossKind::aucm:
    case LossKind::ap:
    case LossKind::pauc:        return sampler == SamplerKind::dual;
    case LossKind::ndcg:
    case LossKind::listwise_ce: return sampler == SamplerKind::tri;
    case LossKind::gcl:         return sampler == SamplerKind::random;
    case LossKind::ce:
    case LossKind::focal:
      return sampler == SamplerKind::random || sampler == SamplerKind::dual;
  }
  return false;
}

// Full experiment description. Parsed from a line-oriented `key = value`
// file; unknown keys are errors, missing keys take the defaults below.
struct RunConfig {
  // dataset
  SynthSpec data;
  bool data_from_csv = false;
  std::string dataset_path;
  std::string test_path;
  DatasetKind csv_format = DatasetKind::binary;
  std::size_t test_n = 0;  // 0: same as train n

  // model
  ScoringModel model{ModelKind::linear, 0, 8, 1};

  // loss
  LossKind loss = LossKind::aucm;
  Surrogate surrogate;
  double gamma = 0.9;
  double lambda = 1.0;
  double tau = 0.5;
  double aucm_margin_c = 1.0;
  double focal_alpha_hat = 1.0;
  double focal_gamma_hat = 0.5;
  bool theory_order = false;

  // sampler
  SamplerKind sampler = SamplerKind::dual;
  bool sampler_explicit = false;
  std::size_t batch_size = 64;
  double sampling_rate = 0.5;
  std::size_t sampled_tasks = 2;
  std::size_t batch_size_per_task = 10;
  double sampling_rate_per_task = 0.3;
  bool drop_remainder = true;

  // optimizer
  OptimizerConfig optim;

  // run
  std::size_t epochs = 10;
  std::size_t eval_every = 1;
  std::string metrics = "auroc";
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t warm_start_epochs = 0;
  std::string warm_start_loss;  // default: ce for binary, listwise_ce for ltr
  double warm_start_lr = 0.0;   // 0: reuse optimizer lr
  bool warm_start_reinit_head = true;
  long long checkpoint_at = -1;  // epoch after which a checkpoint is written
  std::string resume_from;

  LossKind warm_loss_kind() const {
    if (!warm_start_loss.empty()) return parse_loss_kind(warm_start_loss);
    return data.kind == SynthSpec::Kind::ltr ? LossKind::listwise_ce : LossKind::ce;
  }

  void validate() const {
    require(gamma > 0.0 && gamma <= 1.0, ErrorKind::configuration,
            "gamma must be in (0,1]");
    require(lambda > 0.0, ErrorKind::configuration, "lambda must be > 0");
    require(tau > 0.0, ErrorKind::configuration, "tau must be > 0");
    require(surrogate.margin > 0.0, ErrorKind::configuration, "margin must be > 0");
    require(aucm_margin_c > 0.0, ErrorKind::configuration, "c must be > 0");
    require(eval_every >= 1, ErrorKind::configuration, "eval_every must be >= 1");
    optim.validate();
    require(compatible(loss, sampler), ErrorKind::configuration,
            std::string("loss '") + loss_kind_name(loss) + "' is not paired with sampler '" +
                sampler_kind_name(sampler) + "'");
    DatasetKind dk = data_from_csv ? csv_format
                     : data.kind == SynthSpec::Kind::ltr ? DatasetKind::ltr
                     : data.kind == SynthSpec::Kind::contrastive ? DatasetKind::contrastive
                                                                 : DatasetKind::binary;
    switch (loss) {
      case LossKind::aucm:
      case LossKind::ap:
      case LossKind::pauc:
      case LossKind::ce:
      case LossKind::focal:
        require(dk == DatasetKind::binary, ErrorKind::configuration,
                std::string(loss_kind_name(loss)) + " needs a binary dataset");
        break;
      case LossKind::ndcg:
      case LossKind::listwise_ce:
        require(dk == DatasetKind::ltr, ErrorKind::configuration,
                std::string(loss_kind_name(loss)) + " needs an ltr dataset");
        break;
      case LossKind::gcl:
        require(dk == DatasetKind::contrastive, ErrorKind::configuration,
                "gcl needs a contrastive dataset");
        require(model.output_dim >= 1, ErrorKind::configuration,
                "gcl needs an embedding model");
        break;
    }
    if (warm_start_epochs > 0) {
      require(loss != LossKind::gcl, ErrorKind::configuration,
              "warm start is defined for binary and ltr tasks only");
      LossKind wk = warm_loss_kind();
      require(wk == LossKind::ce || wk == LossKind::listwise_ce, ErrorKind::configuration,
              "warm_start_loss must be ce or listwise_ce");
    }
  }
};

namespace config_detail {

struct KeyValue {
  std::string value;
  std::size_t line;
};

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::parse, "key '" + key + "': expected boolean, got '" + v + "'");
}

}  // namespace config_detail

inline RunConfig parse_config_lines(const std::vector<std::string>& lines,
                                    const std::string& origin) {
  std::map<std::string, config_detail::KeyValue> kv;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::parse,
            origin + " line " + std::to_string(i + 1) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    require(!key.empty() && !value.empty(), ErrorKind::parse,
            origin + " line " + std::to_string(i + 1) + ": empty key or value");
    require(!kv.count(key), ErrorKind::parse,
            origin + " line " + std::to_string(i + 1) + ": duplicate key '" + key + "'");
    kv[key] = {value, i + 1};
  }

  RunConfig cfg;
  cfg.data.dim = 8;
  std::set<std::string> seen;
  auto take = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    seen.insert(key);
    return &it->second.value;
  };
  auto ctx = [&](const std::string& key) {
    return origin + " key '" + key + "' (line " + std::to_string(kv[key].line) + ")";
  };
  auto take_double = [&](const std::string& key, double& dst) {
    if (auto* v = take(key)) dst = parse_double(*v, ctx(key));
  };
  auto take_size = [&](const std::string& key, std::size_t& dst) {
    if (auto* v = take(key)) {
      long long x = parse_int(*v, ctx(key));
      require(x >= 0, ErrorKind::configuration, ctx(key) + ": must be >= 0");
      dst = static_cast<std::size_t>(x);
    }
  };
  auto take_bool = [&](const std::string& key, bool& dst) {
    if (auto* v = take(key)) dst = config_detail::parse_bool(*v, key);
  };
  auto take_string = [&](const std::string& key, std::string& dst) {
    if (auto* v = take(key)) dst = *v;
  };

  if (auto* v = take("dataset")) {
    if (*v == "gaussian") cfg.data.kind = SynthSpec::Kind::gaussian_binary;
    else if (*v == "ltr") cfg.data.kind = SynthSpec::Kind::ltr;
    else if (*v == "contrastive") cfg.data.kind = SynthSpec::Kind::contrastive;
    else if (*v == "csv") cfg.data_from_csv = true;
    else fail(ErrorKind::configuration, ctx("dataset") + ": unknown dataset '" + *v + "'");
  }
  take_string("dataset_path", cfg.dataset_path);
  take_string("test_path", cfg.test_path);
  if (auto* v = take("dataset_format")) {
    if (*v == "binary") cfg.csv_format = DatasetKind::binary;
    else if (*v == "ltr") cfg.csv_format = DatasetKind::ltr;
    else fail(ErrorKind::configuration, ctx("dataset_format") + ": binary or ltr");
  }
  take_size("n", cfg.data.n);
  take_size("dim", cfg.data.dim);
  take_double("imratio", cfg.data.imratio);
  take_double("separation", cfg.data.separation);
  take_size("queries", cfg.data.queries);
  take_size("items_per_query", cfg.data.items_per_query);
  take_double("noise", cfg.data.noise);
  take_size("test_n", cfg.test_n);

  if (auto* v = take("model")) {
    if (*v == "linear") cfg.model.kind = ModelKind::linear;
    else if (*v == "mlp1") cfg.model.kind = ModelKind::mlp1;
    else fail(ErrorKind::configuration, ctx("model") + ": unknown model '" + *v + "'");
  }
  take_size("hidden_dim", cfg.model.hidden_dim);
  take_size("output_dim", cfg.model.output_dim);

  if (auto* v = take("loss")) cfg.loss = parse_loss_kind(*v);
  if (auto* v = take("surrogate")) cfg.surrogate.kind = parse_surrogate_kind(*v);
  take_double("margin", cfg.surrogate.margin);
  take_double("gamma", cfg.gamma);
  take_double("lambda", cfg.lambda);
  take_double("tau", cfg.tau);
  take_double("c", cfg.aucm_margin_c);
  take_double("focal_alpha_hat", cfg.focal_alpha_hat);
  take_double("focal_gamma_hat", cfg.focal_gamma_hat);
  take_bool("theory_order", cfg.theory_order);

  if (auto* v = take("sampler")) {
    cfg.sampler = parse_sampler_kind(*v);
    cfg.sampler_explicit = true;
  } else {
    cfg.sampler = default_sampler_for(cfg.loss);
  }
  take_size("batch_size", cfg.batch_size);
  take_double("sampling_rate", cfg.sampling_rate);
  take_size("sampled_tasks", cfg.sampled_tasks);
  take_size("batch_size_per_task", cfg.batch_size_per_task);
  take_double("sampling_rate_per_task", cfg.sampling_rate_per_task);
  take_bool("drop_remainder", cfg.drop_remainder);

  if (auto* v = take("optimizer")) cfg.optim.mode = parse_optim_mode(*v);
  take_double("lr", cfg.optim.lr);
  take_double("momentum", cfg.optim.momentum);
  take_double("beta1", cfg.optim.beta1);
  take_double("beta2", cfg.optim.beta2);
  take_double("eps", cfg.optim.eps);
  take_double("weight_decay", cfg.optim.weight_decay);

  take_size("epochs", cfg.epochs);
  take_size("eval_every", cfg.eval_every);
  take_string("metrics", cfg.metrics);
  if (auto* v = take("seed"))
    cfg.seed = static_cast<std::uint64_t>(parse_int(*v, ctx("seed")));
  take_string("out_dir", cfg.out_dir);
  take_size("warm_start_epochs", cfg.warm_start_epochs);
  take_string("warm_start_loss", cfg.warm_start_loss);
  take_double("warm_start_lr", cfg.warm_start_lr);
  take_bool("warm_start_reinit_head", cfg.warm_start_reinit_head);
  if (auto* v = take("checkpoint_at"))
    cfg.checkpoint_at = parse_int(*v, ctx("checkpoint_at"));
  take_string("resume_from", cfg.resume_from);

  for (const auto& [key, val] : kv)
    require(seen.count(key), ErrorKind::parse,
            origin + " line " + std::to_string(val.line) + ": unknown key '" + key + "'");

  // sensible metric default per task
  if (!kv.count("metrics")) {
    if (cfg.data.kind == SynthSpec::Kind::ltr || cfg.csv_format == DatasetKind::ltr)
      cfg.metrics = "ndcg:5";
    else if (cfg.data.kind == SynthSpec::Kind::contrastive)
      cfg.metrics = "gcl_objective";
  }
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  return parse_config_lines(read_lines(path), path);
}

}  // namespace xrisk
