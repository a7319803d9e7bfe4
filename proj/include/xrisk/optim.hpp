#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xrisk/csv.hpp"
#include "xrisk/error.hpp"
#include "xrisk/losses.hpp"
#include "xrisk/model.hpp"

namespace xrisk {

enum class OptimMode { sgd_momentum, adam };

inline OptimMode parse_optim_mode(const std::string& s) {
  if (s == "sgd" || s == "sgd_momentum") return OptimMode::sgd_momentum;
  if (s == "adam") return OptimMode::adam;
  fail(ErrorKind::configuration, "unknown optimizer '" + s + "'");
}

struct OptimizerConfig {
  OptimMode mode = OptimMode::sgd_momentum;
  double lr = 0.1;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  void validate() const {
    require(lr > 0.0, ErrorKind::configuration, "lr must be > 0");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::configuration,
            "momentum must be in [0,1)");
    require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0,
            ErrorKind::configuration, "betas must be in (0,1)");
    require(eps > 0.0, ErrorKind::configuration, "eps must be > 0");
    require(weight_decay >= 0.0, ErrorKind::configuration, "weight_decay must be >= 0");
  }
};

// Momentum SGD (v <- mu*v + g + wd*w; w <- w - lr*v) or bias-corrected Adam
// with eps added after the bias-corrected square root. Weight decay is
// coupled (added to the gradient) in both modes.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, std::size_t dim) : cfg_(cfg), m_(dim, 0.0) {
    cfg_.validate();
    if (cfg_.mode == OptimMode::adam) v_.assign(dim, 0.0);
  }

  const OptimizerConfig& config() const { return cfg_; }
  std::size_t step_count() const { return step_count_; }

  void step(ParamVector& w, const ParamVector& grad, double lr_multiplier = 1.0) {
    require(w.size() == m_.size() && grad.size() == m_.size(), ErrorKind::shape,
            "optimizer/parameter size mismatch");
    const double lr = cfg_.lr * lr_multiplier;
    ++step_count_;
    if (cfg_.mode == OptimMode::sgd_momentum) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        double g = grad[i] + cfg_.weight_decay * w[i];
        m_[i] = cfg_.momentum * m_[i] + g;
        w[i] -= lr * m_[i];
      }
    } else {
      const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
      const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
      for (std::size_t i = 0; i < w.size(); ++i) {
        double g = grad[i] + cfg_.weight_decay * w[i];
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
        double mhat = m_[i] / bc1;
        double vhat = v_[i] / bc2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  void reset_moments() {
    std::fill(m_.begin(), m_.end(), 0.0);
    std::fill(v_.begin(), v_.end(), 0.0);
    step_count_ = 0;
  }

  std::string save() const {
    std::string out = std::to_string(step_count_) + "\n";
    std::vector<std::string> cells;
    for (double x : m_) cells.push_back(format_double(x));
    out += join(cells) + "\n";
    if (cfg_.mode == OptimMode::adam) {
      cells.clear();
      for (double x : v_) cells.push_back(format_double(x));
      out += join(cells) + "\n";
    }
    return out;
  }

  void load(const std::vector<std::string>& lines) {
    std::size_t expect = cfg_.mode == OptimMode::adam ? 3 : 2;
    require(lines.size() >= expect, ErrorKind::parse, "optimizer state too short");
    step_count_ = static_cast<std::size_t>(parse_int(lines[0], "optimizer step"));
    auto load_vec = [&](const std::string& line, std::vector<double>& dst) {
      auto cells = split(line);
      require(cells.size() == dst.size(), ErrorKind::parse, "optimizer vector size");
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = parse_double(cells[i], "optimizer moment");
    };
    load_vec(lines[1], m_);
    if (cfg_.mode == OptimMode::adam) load_vec(lines[2], v_);
  }

 private:
  OptimizerConfig cfg_;
  std::vector<double> m_;  // velocity (sgd) or first moment (adam)
  std::vector<double> v_;  // second moment (adam)
  std::size_t step_count_ = 0;
};

// Primal-dual step for the AUCM objective: descend on w (through the
// configured mode), descend on a and b, ascend on alpha, then project
// alpha onto R+.
inline void pesg_step(Optimizer& opt, ParamVector& w, MinMaxState& mm,
                      const AucmOutput& grads, double lr_multiplier = 1.0) {
  opt.step(w, grads.grad_w, lr_multiplier);
  const double lr = opt.config().lr * lr_multiplier;
  mm.a -= lr * grads.grad_a;
  mm.b -= lr * grads.grad_b;
  mm.alpha = std::max(0.0, mm.alpha + lr * grads.grad_alpha);
}

// Step decay: x1 until 50% of total epochs, x0.1 until 75%, x0.01 after.
struct StepDecaySchedule {
  std::size_t total_epochs = 0;

  double multiplier(std::size_t epoch) const {
    if (total_epochs == 0) return 1.0;
    if (4 * epoch >= 3 * total_epochs) return 0.01;
    if (2 * epoch >= total_epochs) return 0.1;
    return 1.0;
  }
};

}  // namespace xrisk
