#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "xrisk/error.hpp"

namespace xrisk {

enum class SurrogateKind { squared_hinge, logistic, hinge };

// Pairwise surrogate on the score gap d = h(x_j) - h(x_i); larger gap means a
// worse-ordered pair. Supplies value and derivative in d.
//   squared_hinge: max(0, m + d)^2
//   hinge:         max(0, m + d)
//   logistic:      log(1 + e^d)   (margin unused)
struct Surrogate {
  SurrogateKind kind = SurrogateKind::squared_hinge;
  double margin = 1.0;

  double value(double gap) const {
    switch (kind) {
      case SurrogateKind::squared_hinge: {
        double t = std::max(0.0, margin + gap);
        return t * t;
      }
      case SurrogateKind::hinge:
        return std::max(0.0, margin + gap);
      case SurrogateKind::logistic:
        // stable softplus
        return gap > 0 ? gap + std::log1p(std::exp(-gap)) : std::log1p(std::exp(gap));
    }
    return 0.0;
  }

  double derivative(double gap) const {
    switch (kind) {
      case SurrogateKind::squared_hinge:
        return 2.0 * std::max(0.0, margin + gap);
      case SurrogateKind::hinge:
        return margin + gap > 0 ? 1.0 : 0.0;
      case SurrogateKind::logistic:
        return 1.0 / (1.0 + std::exp(-gap));
    }
    return 0.0;
  }

  std::pair<double, double> eval(double gap) const {
    return {value(gap), derivative(gap)};
  }
};

inline SurrogateKind parse_surrogate_kind(const std::string& s) {
  if (s == "squared_hinge") return SurrogateKind::squared_hinge;
  if (s == "logistic") return SurrogateKind::logistic;
  if (s == "hinge") return SurrogateKind::hinge;
  fail(ErrorKind::configuration, "unknown surrogate '" + s + "'");
}

inline const char* surrogate_kind_name(SurrogateKind k) {
  switch (k) {
    case SurrogateKind::squared_hinge: return "squared_hinge";
    case SurrogateKind::logistic:      return "logistic";
    case SurrogateKind::hinge:         return "hinge";
  }
  return "?";
}

}  // namespace xrisk
