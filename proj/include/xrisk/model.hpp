#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xrisk/csv.hpp"
#include "xrisk/error.hpp"
#include "xrisk/matrix.hpp"
#include "xrisk/rng.hpp"

namespace xrisk {

using ParamVector = std::vector<double>;

enum class ModelKind { linear, mlp1 };

inline const char* model_kind_name(ModelKind k) {
  return k == ModelKind::linear ? "linear" : "mlp1";
}

// Small differentiable scoring model: linear, or one hidden tanh layer.
// Parameter layout (flat vector):
//   linear: W (input_dim x output_dim, row-major), then bias (output_dim)
//   mlp1:   W1 (input_dim x hidden_dim), b1 (hidden_dim),
//           W2 (hidden_dim x output_dim), b2 (output_dim)
struct ScoringModel {
  ModelKind kind = ModelKind::linear;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;  // mlp1 only
  std::size_t output_dim = 1;  // 1 for scoring, d_o for embeddings

  std::size_t param_count() const {
    if (kind == ModelKind::linear) return (input_dim + 1) * output_dim;
    return input_dim * hidden_dim + hidden_dim + hidden_dim * output_dim + output_dim;
  }

  void check_dims() const {
    require(input_dim >= 1 && output_dim >= 1, ErrorKind::configuration,
            "model dimensions must be positive");
    if (kind == ModelKind::mlp1)
      require(hidden_dim >= 1, ErrorKind::configuration, "mlp1 needs hidden_dim >= 1");
  }

  // Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer, biases included.
  ParamVector init_params(std::uint64_t seed) const {
    check_dims();
    Rng rng(mix_seed(seed, 0x70a7));
    ParamVector w(param_count());
    auto fill = [&](std::size_t begin, std::size_t count, double fan_in) {
      double bound = 1.0 / std::sqrt(fan_in);
      for (std::size_t i = 0; i < count; ++i)
        w[begin + i] = rng.uniform(-bound, bound);
    };
    if (kind == ModelKind::linear) {
      fill(0, (input_dim + 1) * output_dim, static_cast<double>(input_dim));
    } else {
      std::size_t l1 = input_dim * hidden_dim + hidden_dim;
      fill(0, l1, static_cast<double>(input_dim));
      fill(l1, hidden_dim * output_dim + output_dim, static_cast<double>(hidden_dim));
    }
    return w;
  }

  Matrix forward(const ParamVector& w, const Matrix& x) const {
    check_shapes(w, x);
    if (kind == ModelKind::linear) return linear_forward(w, x, 0, input_dim, output_dim);
    Matrix z = linear_forward(w, x, 0, input_dim, hidden_dim);
    for (double& v : z.data) v = std::tanh(v);
    std::size_t l1 = input_dim * hidden_dim + hidden_dim;
    return linear_forward(w, z, l1, hidden_dim, output_dim);
  }

  // Sum over rows of upstream^T * d(score)/dw; exactly linear in upstream.
  ParamVector vjp(const ParamVector& w, const Matrix& x, const Matrix& upstream) const {
    check_shapes(w, x);
    require(upstream.rows == x.rows && upstream.cols == output_dim, ErrorKind::shape,
            "upstream shape must match forward output");
    ParamVector grad(param_count(), 0.0);
    if (kind == ModelKind::linear) {
      accumulate_linear_grad(grad, 0, x, upstream, input_dim, output_dim);
      return grad;
    }
    Matrix pre = linear_forward(w, x, 0, input_dim, hidden_dim);
    Matrix z = pre;
    for (double& v : z.data) v = std::tanh(v);
    std::size_t l1 = input_dim * hidden_dim + hidden_dim;
    accumulate_linear_grad(grad, l1, z, upstream, hidden_dim, output_dim);
    // back through W2 and tanh
    Matrix dz(x.rows, hidden_dim);
    const double* w2 = w.data() + l1;
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t h = 0; h < hidden_dim; ++h) {
        double acc = 0.0;
        for (std::size_t o = 0; o < output_dim; ++o)
          acc += upstream.at(r, o) * w2[h * output_dim + o];
        double t = z.at(r, h);
        dz.at(r, h) = acc * (1.0 - t * t);
      }
    accumulate_linear_grad(grad, 0, x, dz, input_dim, hidden_dim);
    return grad;
  }

 private:
  void check_shapes(const ParamVector& w, const Matrix& x) const {
    check_dims();
    require(w.size() == param_count(), ErrorKind::shape, "parameter length mismatch");
    require(x.cols == input_dim, ErrorKind::shape, "input column count mismatch");
  }

  Matrix linear_forward(const ParamVector& w, const Matrix& x, std::size_t offset,
                        std::size_t in_dim, std::size_t out_dim) const {
    const double* wm = w.data() + offset;
    const double* bias = wm + in_dim * out_dim;
    Matrix y(x.rows, out_dim);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t o = 0; o < out_dim; ++o) {
        double acc = bias[o];
        for (std::size_t i = 0; i < in_dim; ++i) acc += x.at(r, i) * wm[i * out_dim + o];
        y.at(r, o) = acc;
      }
    return y;
  }

  static void accumulate_linear_grad(ParamVector& grad, std::size_t offset,
                                     const Matrix& input, const Matrix& upstream,
                                     std::size_t in_dim, std::size_t out_dim) {
    double* gm = grad.data() + offset;
    double* gb = gm + in_dim * out_dim;
    for (std::size_t r = 0; r < input.rows; ++r)
      for (std::size_t o = 0; o < out_dim; ++o) {
        double u = upstream.at(r, o);
        if (u == 0.0) continue;
        for (std::size_t i = 0; i < in_dim; ++i) gm[i * out_dim + o] += input.at(r, i) * u;
        gb[o] += u;
      }
  }
};

// Checkpoint format: one header line naming kind and dims, one CSV row of
// parameter values.
inline void save_params(const std::string& path, const ScoringModel& m,
                        const ParamVector& w) {
  require(w.size() == m.param_count(), ErrorKind::shape, "parameter length mismatch");
  std::string out = "kind=" + std::string(model_kind_name(m.kind)) +
                    ",input_dim=" + std::to_string(m.input_dim) +
                    ",hidden_dim=" + std::to_string(m.hidden_dim) +
                    ",output_dim=" + std::to_string(m.output_dim) + "\n";
  std::vector<std::string> vals;
  vals.reserve(w.size());
  for (double v : w) vals.push_back(format_double(v));
  out += join(vals) + "\n";
  write_text(path, out);
}

inline ParamVector load_params(const std::string& path, const ScoringModel& m) {
  auto lines = read_lines(path);
  require(lines.size() >= 2, ErrorKind::parse, path + ": expected header + value row");
  std::string expect = "kind=" + std::string(model_kind_name(m.kind)) +
                       ",input_dim=" + std::to_string(m.input_dim) +
                       ",hidden_dim=" + std::to_string(m.hidden_dim) +
                       ",output_dim=" + std::to_string(m.output_dim);
  require(lines[0] == expect, ErrorKind::parse,
          path + ": checkpoint header does not match model (" + lines[0] + ")");
  auto cells = split(lines[1]);
  require(cells.size() == m.param_count(), ErrorKind::parse,
          path + ": wrong parameter count");
  ParamVector w(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    w[i] = parse_double(cells[i], path);
  return w;
}

}  // namespace xrisk
