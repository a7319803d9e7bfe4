#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xrisk/csv.hpp"
#include "xrisk/error.hpp"

namespace xrisk {

// Floor applied to every inner-estimate divisor.
inline constexpr double kEstimatorFloor = 1e-8;

// Per-anchor moving-average estimates u_i of the inner function g_i, keyed by
// dataset index. Update rule: u <- (1-gamma)*u + gamma*fresh, except that an
// untouched entry takes the first fresh value directly. Paired mode carries
// (u1, u2) for ratio-form objectives.
class InnerEstimatorBank {
 public:
  InnerEstimatorBank(std::size_t n, double gamma, bool paired = false,
                     bool positive_inner = false)
      : gamma_(gamma),
        paired_(paired),
        positive_inner_(positive_inner),
        u_(n, 0.0),
        u2_(paired ? n : 0, 0.0),
        touched_(n, false) {
    require(gamma > 0.0 && gamma <= 1.0, ErrorKind::configuration,
            "gamma must be in (0,1]");
  }

  std::size_t size() const { return u_.size(); }
  double gamma() const { return gamma_; }
  bool paired() const { return paired_; }
  bool touched(std::size_t i) const { return touched_.at(i); }

  double value(std::size_t i) const { return u_.at(i); }
  double value1(std::size_t i) const { return value(i); }
  double value2(std::size_t i) const {
    require(paired_, ErrorKind::configuration, "bank is not in paired mode");
    return u2_.at(i);
  }

  void update(std::span<const std::size_t> anchors, std::span<const double> fresh) {
    require(!paired_, ErrorKind::configuration, "paired bank needs update_paired");
    require(anchors.size() == fresh.size(), ErrorKind::shape,
            "anchors/fresh length mismatch");
    for (std::size_t k = 0; k < anchors.size(); ++k)
      update_one(u_, anchors[k], fresh[k], /*mark=*/true);
  }

  void update_paired(std::span<const std::size_t> anchors,
                     std::span<const double> fresh1, std::span<const double> fresh2) {
    require(paired_, ErrorKind::configuration, "bank is not in paired mode");
    require(anchors.size() == fresh1.size() && anchors.size() == fresh2.size(),
            ErrorKind::shape, "anchors/fresh length mismatch");
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      update_one(u_, anchors[k], fresh1[k], /*mark=*/false);
      update_one(u2_, anchors[k], fresh2[k], /*mark=*/true);
    }
  }

  // Divisor with the epsilon floor; clamps are counted, not silent.
  double floored(double v) {
    if (v < kEstimatorFloor) {
      ++clamp_count_;
      return kEstimatorFloor;
    }
    return v;
  }
  std::size_t clamp_count() const { return clamp_count_; }

  // Direct writes, for restore and for tests that seed u.
  void set(std::size_t i, double v) {
    u_.at(i) = v;
    touched_.at(i) = true;
  }
  void set_paired(std::size_t i, double v1, double v2) {
    require(paired_, ErrorKind::configuration, "bank is not in paired mode");
    u_.at(i) = v1;
    u2_.at(i) = v2;
    touched_.at(i) = true;
  }

  void reset() {
    std::fill(u_.begin(), u_.end(), 0.0);
    std::fill(u2_.begin(), u2_.end(), 0.0);
    std::fill(touched_.begin(), touched_.end(), false);
    clamp_count_ = 0;
  }

  // CSV: header then one row per index (index,u[,u2],touched).
  std::string to_csv() const {
    std::string out = paired_ ? "index,u1,u2,touched\n" : "index,u,touched\n";
    for (std::size_t i = 0; i < u_.size(); ++i) {
      out += std::to_string(i) + ',' + format_double(u_[i]);
      if (paired_) out += ',' + format_double(u2_[i]);
      out += touched_[i] ? ",1\n" : ",0\n";
    }
    return out;
  }

  void from_csv(const std::vector<std::string>& lines) {
    require(lines.size() >= u_.size() + 1, ErrorKind::parse, "bank csv too short");
    for (std::size_t i = 0; i < u_.size(); ++i) {
      auto cells = split(lines[i + 1]);
      require(cells.size() == (paired_ ? 4u : 3u), ErrorKind::parse,
              "bank csv row " + std::to_string(i + 1));
      u_[i] = parse_double(cells[1], "bank u");
      if (paired_) u2_[i] = parse_double(cells[2], "bank u2");
      touched_[i] = cells.back() == "1";
    }
  }

 private:
  void update_one(std::vector<double>& store, std::size_t i, double fresh, bool mark) {
    require(i < store.size(), ErrorKind::out_of_range, "anchor index out of range");
    require(std::isfinite(fresh), ErrorKind::numeric_domain, "non-finite fresh estimate");
    if (positive_inner_)
      require(fresh > 0.0, ErrorKind::numeric_domain,
              "exponential inner estimate must be positive");
    if (!touched_[i])
      store[i] = fresh;
    else
      store[i] = (1.0 - gamma_) * store[i] + gamma_ * fresh;
    if (mark) touched_[i] = true;
  }

  double gamma_;
  bool paired_;
  bool positive_inner_;
  std::vector<double> u_;
  std::vector<double> u2_;
  std::vector<bool> touched_;
  std::size_t clamp_count_ = 0;
};

}  // namespace xrisk
