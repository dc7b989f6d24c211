// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Reverse-mode gradient tape over the small operator set the trainer needs.
//
// Nodes are appended in evaluation order; backward() replays their adjoint
// rules in reverse. Each op saves whatever it needs for its adjoint inside
// the closure it registers. Values are 64-bit throughout.

#ifndef MWRF_TAPE_HPP
#define MWRF_TAPE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mwrf/field.hpp"
#include "mwrf/matrix.hpp"
#include "mwrf/wavelet.hpp"

namespace mwrf {

// Row-major 2D array; vectors use cols == 1, scalars are 1 x 1.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Tensor(std::size_t r, std::size_t c, std::vector<double> d);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor from(const Matrix& m) { return Tensor(m.rows(), m.cols(), m.values()); }
  static Tensor vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(n, 1, std::move(v));
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  Matrix to_matrix() const { return Matrix(rows, cols, data); }
};

struct Var {
  std::size_t id = 0;
};

// How the straight-through mask evaluates its forward value. kHard is the
// real operator H(M) * W. kSoft evaluates the differentiable surrogate
// sigmoid(M) * W with the same backward rule; it exists so the backward pass
// can be checked against finite differences.
enum class MaskForward { kHard, kSoft };

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Var leaf(Tensor value);      // trainable input
  Var constant(Tensor value);  // no gradient

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  // Gradient of the last backward() target with respect to v (zeros if v did
  // not influence it).
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d loss / d loss = 1 and accumulates gradients into every node that
  // requires one. Throws NonScalarLoss unless loss is 1 x 1.
  void backward(Var loss);

  // Op authoring interface.
  Var push(Tensor value, std::span<const Var> parents, Backward backward);
  void accumulate(Var v, std::span<const double> g);
  std::vector<double>& grad_buffer(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Elementwise and reduction primitives.
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var mul_scalar(Tape& t, Var a, double c);
Var mul_const(Tape& t, Var a, const Tensor& c);  // elementwise by a constant
Var square(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var relu(Tape& t, Var a);
Var sum(Tape& t, Var a);
// Mean squared error against a constant target. A target smaller than `a`
// is compared with the top-left block of `a` only.
Var mse(Tape& t, Var a, const Tensor& target);

// Straight-through mask: forward H(logits) * w (or the soft surrogate);
// d/dw = sigmoid(logits) * g, d/dlogits = sigmoid'(logits) * w * g.
Var masked(Tape& t, Var w, Var logits, MaskForward mode = MaskForward::kHard);
// sum(sigmoid(logits)).
Var sigmoid_sum(Tape& t, Var logits);

// Multi-level inverse DWT of a packed coefficient matrix (levels = 1 is
// idwt2); backward uses the exact adjoint.
Var waverec(Tape& t, Var packed, const WaveletSpec& spec, int levels);
Var idct(Tape& t, Var coeffs);
// Dispatches on the field domain (wavelet / dct / identity).
Var to_spatial(Tape& t, Var coeffs, const FieldConfig& config, const WaveletSpec& spec);

// out[i, j] = a[i] * b[j] over the flattened inputs.
Var outer(Tape& t, Var a, Var b);

// Samples a vector-matrix field given its spatial planes and lines (in the
// TensorField ordering). Returns points.size() x channels.
Var vm_sample(Tape& t, const FieldConfig& config, std::span<const Var> planes,
              std::span<const Var> lines, std::span<const Point3> points);

// Emission-absorption compositing of R rays with S samples each.
// deltas: R x S segment lengths; sigma_raw: R * S values in ray-major order
// (relu applied); rgb_raw: (R*S) x 3 (sigmoid applied). Returns R x 3.
Var composite(Tape& t, Var sigma_raw, Var rgb_raw, const Tensor& deltas,
              const std::array<double, 3>& background);

}  // namespace mwrf

#endif  // MWRF_TAPE_HPP
