// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/tape.hpp"

#include <algorithm>
#include <cmath>

namespace mwrf {

Tensor::Tensor(std::size_t r, std::size_t c, std::vector<double> d)
    : rows(r), cols(c), data(std::move(d)) {
  if (data.size() != rows * cols) fail(ErrorCode::kShapeMismatch, "tensor data vs shape");
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::push(Tensor value, std::span<const Var> parents, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = std::any_of(parents.begin(), parents.end(),
                                [&](Var p) { return nodes_.at(p.id).requires_grad; });
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.size() != n.value.size()) {
    static thread_local Tensor zeros;
    zeros = Tensor(n.value.rows, n.value.cols);
    return zeros;
  }
  return n.grad;
}

std::vector<double>& Tape::grad_buffer(Var v) { return nodes_.at(v.id).grad.data; }

void Tape::accumulate(Var v, std::span<const double> g) {
  Node& n = nodes_.at(v.id);
  if (!n.requires_grad) return;
  if (g.size() != n.grad.size()) fail(ErrorCode::kShapeMismatch, "gradient shape");
  for (std::size_t i = 0; i < g.size(); ++i) n.grad.data[i] += g[i];
}

void Tape::backward(Var loss) {
  const Node& l = nodes_.at(loss.id);
  if (l.value.rows != 1 || l.value.cols != 1) {
    fail(ErrorCode::kNonScalarLoss, "loss must be a 1x1 tensor");
  }
  for (Node& n : nodes_) {
    n.grad = n.requires_grad ? Tensor(n.value.rows, n.value.cols) : Tensor();
  }
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad.data[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this, n.grad);
  }
}

namespace {

void check_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) fail(ErrorCode::kShapeMismatch, std::string(op) + ": shape mismatch");
}

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = f(a.data[i]);
  return out;
}

}  // namespace

Var add(Tape& t, Var a, Var b) {
  const Tensor& x = t.value(a);
  const Tensor& y = t.value(b);
  check_same(x, y, "add");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += y.data[i];
  const Var parents[] = {a, b};
  return t.push(std::move(out), parents, [a, b](Tape& tp, const Tensor& g) {
    tp.accumulate(a, g.data);
    tp.accumulate(b, g.data);
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor& x = t.value(a);
  const Tensor& y = t.value(b);
  check_same(x, y, "sub");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= y.data[i];
  const Var parents[] = {a, b};
  return t.push(std::move(out), parents, [a, b](Tape& tp, const Tensor& g) {
    tp.accumulate(a, g.data);
    Tensor neg = map(g, [](double v) { return -v; });
    tp.accumulate(b, neg.data);
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& x = t.value(a);
  const Tensor& y = t.value(b);
  check_same(x, y, "mul");
  Tensor out(x.rows, x.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = x.data[i] * y.data[i];
  const Var parents[] = {a, b};
  return t.push(std::move(out), parents, [a, b](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(a);
    const Tensor& y = tp.value(b);
    Tensor ga(g.rows, g.cols), gb(g.rows, g.cols);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] = g.data[i] * y.data[i];
      gb.data[i] = g.data[i] * x.data[i];
    }
    tp.accumulate(a, ga.data);
    tp.accumulate(b, gb.data);
  });
}

Var mul_scalar(Tape& t, Var a, double c) {
  Tensor out = map(t.value(a), [c](double v) { return v * c; });
  const Var parents[] = {a};
  return t.push(std::move(out), parents, [a, c](Tape& tp, const Tensor& g) {
    Tensor ga = map(g, [c](double v) { return v * c; });
    tp.accumulate(a, ga.data);
  });
}

Var mul_const(Tape& t, Var a, const Tensor& c) {
  const Tensor& x = t.value(a);
  check_same(x, c, "mul_const");
  Tensor out(x.rows, x.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = x.data[i] * c.data[i];
  const Var parents[] = {a};
  return t.push(std::move(out), parents, [a, c](Tape& tp, const Tensor& g) {
    Tensor ga(g.rows, g.cols);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] = g.data[i] * c.data[i];
    tp.accumulate(a, ga.data);
  });
}

Var square(Tape& t, Var a) {
  Tensor out = map(t.value(a), [](double v) { return v * v; });
  const Var parents[] = {a};
  return t.push(std::move(out), parents, [a](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(a);
    Tensor ga(g.rows, g.cols);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] = 2.0 * x.data[i] * g.data[i];
    tp.accumulate(a, ga.data);
  });
}

Var sigmoid(Tape& t, Var a) {
  Tensor out = map(t.value(a), [](double v) { return sigmoid(v); });
  const Var parents[] = {a};
  return t.push(std::move(out), parents, [a](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(a);
    Tensor ga(g.rows, g.cols);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = sigmoid(x.data[i]);
      ga.data[i] = s * (1.0 - s) * g.data[i];
    }
    tp.accumulate(a, ga.data);
  });
}

Var relu(Tape& t, Var a) {
  Tensor out = map(t.value(a), [](double v) { return v > 0.0 ? v : 0.0; });
  const Var parents[] = {a};
  return t.push(std::move(out), parents, [a](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(a);
    Tensor ga(g.rows, g.cols);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] = x.data[i] > 0.0 ? g.data[i] : 0.0;
    tp.accumulate(a, ga.data);
  });
}

Var sum(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  double s = 0.0;
  for (double v : x.data) s += v;
  const Var parents[] = {a};
  return t.push(Tensor::scalar(s), parents, [a](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(a);
    std::vector<double> ga(x.size(), g.data[0]);
    tp.accumulate(a, ga);
  });
}

Var mse(Tape& t, Var a, const Tensor& target) {
  const Tensor& x = t.value(a);
  if (target.rows > x.rows || target.cols > x.cols || target.size() == 0) {
    fail(ErrorCode::kShapeMismatch, "mse: target larger than prediction");
  }
  double s = 0.0;
  for (std::size_t r = 0; r < target.rows; ++r) {
    for (std::size_t c = 0; c < target.cols; ++c) {
      const double d = x.data[r * x.cols + c] - target.data[r * target.cols + c];
      s += d * d;
    }
  }
  const double n = static_cast<double>(target.size());
  const Var parents[] = {a};
  return t.push(Tensor::scalar(s / n), parents, [a, target, n](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(a);
    std::vector<double>& ga = tp.grad_buffer(a);
    const double k = 2.0 * g.data[0] / n;
    for (std::size_t r = 0; r < target.rows; ++r) {
      for (std::size_t c = 0; c < target.cols; ++c) {
        const std::size_t i = r * x.cols + c;
        ga[i] += k * (x.data[i] - target.data[r * target.cols + c]);
      }
    }
  });
}

Var masked(Tape& t, Var w, Var logits, MaskForward mode) {
  const Tensor& x = t.value(w);
  const Tensor& z = t.value(logits);
  check_same(x, z, "masked");
  Tensor out(x.rows, x.cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = mode == MaskForward::kHard ? heaviside(z.data[i]) : sigmoid(z.data[i]);
    out.data[i] = m * x.data[i];
  }
  const Var parents[] = {w, logits};
  return t.push(std::move(out), parents, [w, logits](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(w);
    const Tensor& z = tp.value(logits);
    const bool need_w = tp.requires_grad(w), need_z = tp.requires_grad(logits);
    std::vector<double>* gw = need_w ? &tp.grad_buffer(w) : nullptr;
    std::vector<double>* gz = need_z ? &tp.grad_buffer(logits) : nullptr;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = sigmoid(z.data[i]);
      if (gw) (*gw)[i] += s * g.data[i];
      if (gz) (*gz)[i] += s * (1.0 - s) * x.data[i] * g.data[i];
    }
  });
}

Var sigmoid_sum(Tape& t, Var logits) {
  const Tensor& z = t.value(logits);
  double s = 0.0;
  for (double v : z.data) s += sigmoid(v);
  const Var parents[] = {logits};
  return t.push(Tensor::scalar(s), parents, [logits](Tape& tp, const Tensor& g) {
    const Tensor& z = tp.value(logits);
    std::vector<double>& gz = tp.grad_buffer(logits);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = sigmoid(z.data[i]);
      gz[i] += s * (1.0 - s) * g.data[0];
    }
  });
}

Var waverec(Tape& t, Var packed, const WaveletSpec& spec, int levels) {
  Matrix m = t.value(packed).to_matrix();
  waverec2_inplace(m, spec, levels);
  const Var parents[] = {packed};
  return t.push(Tensor::from(m), parents, [packed, spec, levels](Tape& tp, const Tensor& g) {
    Matrix gm = g.to_matrix();
    waverec2_adjoint_inplace(gm, spec, levels);
    tp.accumulate(packed, gm.values());
  });
}

Var idct(Tape& t, Var coeffs) {
  Matrix m = idct2(t.value(coeffs).to_matrix());
  const Var parents[] = {coeffs};
  return t.push(Tensor::from(m), parents, [coeffs](Tape& tp, const Tensor& g) {
    // The orthonormal inverse DCT is orthogonal; its adjoint is the forward DCT.
    Matrix gm = dct2(g.to_matrix());
    tp.accumulate(coeffs, gm.values());
  });
}

Var to_spatial(Tape& t, Var coeffs, const FieldConfig& config, const WaveletSpec& spec) {
  switch (config.domain) {
    case DomainMode::kWavelet: return waverec(t, coeffs, spec, config.levels);
    case DomainMode::kDct: return idct(t, coeffs);
    case DomainMode::kSpatial: return coeffs;
  }
  return coeffs;
}

Var outer(Tape& t, Var a, Var b) {
  const Tensor& x = t.value(a);
  const Tensor& y = t.value(b);
  Tensor out(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) out.data[i * y.size() + j] = x.data[i] * y.data[j];
  }
  const Var parents[] = {a, b};
  return t.push(std::move(out), parents, [a, b](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(a);
    const Tensor& y = tp.value(b);
    std::vector<double> ga(x.size(), 0.0), gb(y.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double gij = g.data[i * y.size() + j];
        ga[i] += gij * y.data[j];
        gb[j] += gij * x.data[i];
      }
    }
    tp.accumulate(a, ga);
    tp.accumulate(b, gb);
  });
}

// ---------------------------------------------------------------------------
// Factorized sampling.

namespace {

struct Corner2 {
  std::size_t idx[4];
  double w[4];
};

inline Corner2 corners(const Lerp1& a, const Lerp1& b, std::size_t cols) {
  return {{a.i0 * cols + b.i0, a.i0 * cols + b.i1, a.i1 * cols + b.i0, a.i1 * cols + b.i1},
          {(1 - a.t) * (1 - b.t), (1 - a.t) * b.t, a.t * (1 - b.t), a.t * b.t}};
}

inline double eval2(const Tensor& m, const Corner2& c) {
  return c.w[0] * m.data[c.idx[0]] + c.w[1] * m.data[c.idx[1]] + c.w[2] * m.data[c.idx[2]] +
         c.w[3] * m.data[c.idx[3]];
}

inline double eval1(const Tensor& v, const Lerp1& a) {
  return (1 - a.t) * v.data[a.i0] + a.t * v.data[a.i1];
}

struct PointCoords {
  Lerp1 i, j, k;
};

std::vector<PointCoords> point_coords(const FieldConfig& config,
                                      std::span<const Point3> points) {
  std::vector<PointCoords> pc(points.size());
  for (std::size_t n = 0; n < points.size(); ++n) {
    for (double c : points[n]) {
      if (!(c >= 0.0 && c <= 1.0)) fail(ErrorCode::kOutOfDomain, "sample outside [0,1]^3");
    }
    pc[n].i = lerp_coords(points[n][0], config.resolution[0]);
    pc[n].j = lerp_coords(points[n][1], config.resolution[1]);
    pc[n].k = lerp_coords(points[n][2], config.resolution[2]);
  }
  return pc;
}

}  // namespace

Var vm_sample(Tape& t, const FieldConfig& config, std::span<const Var> planes,
              std::span<const Var> lines, std::span<const Point3> points) {
  const auto C = static_cast<std::size_t>(config.channels);
  const auto R = static_cast<std::size_t>(config.n_rank);
  const bool image = config.kind == FieldKind::kImage;
  if (image ? planes.size() != C : (planes.size() != 3 * R * C || lines.size() != 3 * R * C)) {
    fail(ErrorCode::kShapeMismatch, "vm_sample: wrong number of planes/lines");
  }
  auto coords = point_coords(config, points);
  Tensor out(points.size(), C);

  for (std::size_t n = 0; n < points.size(); ++n) {
    const PointCoords& pc = coords[n];
    for (std::size_t c = 0; c < C; ++c) {
      if (image) {
        const Tensor& p = t.value(planes[c]);
        out.data[n * C + c] = eval2(p, corners(pc.i, pc.j, p.cols));
        continue;
      }
      double acc = 0.0;
      const std::size_t base = c * 3 * R;
      for (std::size_t q = 0; q < R; ++q) {
        const Tensor& px = t.value(planes[base + q]);
        const Tensor& py = t.value(planes[base + R + q]);
        const Tensor& pz = t.value(planes[base + 2 * R + q]);
        acc += eval2(px, corners(pc.i, pc.j, px.cols)) * eval1(t.value(lines[base + q]), pc.k);
        acc += eval2(py, corners(pc.j, pc.k, py.cols)) * eval1(t.value(lines[base + R + q]), pc.i);
        acc += eval2(pz, corners(pc.i, pc.k, pz.cols)) *
               eval1(t.value(lines[base + 2 * R + q]), pc.j);
      }
      out.data[n * C + c] = acc;
    }
  }

  std::vector<Var> parents(planes.begin(), planes.end());
  parents.insert(parents.end(), lines.begin(), lines.end());
  std::vector<Var> pv(planes.begin(), planes.end()), lv(lines.begin(), lines.end());
  return t.push(std::move(out), parents,
                [pv, lv, coords = std::move(coords), C, R, image](Tape& tp, const Tensor& g) {
                  auto scatter2 = [&](Var v, const Corner2& cr, double s) {
                    if (!tp.requires_grad(v)) return;
                    auto& gb = tp.grad_buffer(v);
                    for (int k = 0; k < 4; ++k) gb[cr.idx[k]] += cr.w[k] * s;
                  };
                  auto scatter1 = [&](Var v, const Lerp1& a, double s) {
                    if (!tp.requires_grad(v)) return;
                    auto& gb = tp.grad_buffer(v);
                    gb[a.i0] += (1 - a.t) * s;
                    gb[a.i1] += a.t * s;
                  };
                  for (std::size_t n = 0; n < coords.size(); ++n) {
                    const PointCoords& pc = coords[n];
                    for (std::size_t c = 0; c < C; ++c) {
                      const double go = g.data[n * C + c];
                      if (go == 0.0) continue;
                      if (image) {
                        scatter2(pv[c], corners(pc.i, pc.j, tp.value(pv[c]).cols), go);
                        continue;
                      }
                      const std::size_t base = c * 3 * R;
                      for (std::size_t q = 0; q < R; ++q) {
                        struct Term {
                          Var plane, line;
                          const Lerp1 *a, *b, *l;
                        };
                        const Term terms[3] = {
                            {pv[base + q], lv[base + q], &pc.i, &pc.j, &pc.k},
                            {pv[base + R + q], lv[base + R + q], &pc.j, &pc.k, &pc.i},
                            {pv[base + 2 * R + q], lv[base + 2 * R + q], &pc.i, &pc.k, &pc.j}};
                        for (const Term& tm : terms) {
                          const Tensor& p = tp.value(tm.plane);
                          const Corner2 cr = corners(*tm.a, *tm.b, p.cols);
                          const double pval = eval2(p, cr);
                          const double lval = eval1(tp.value(tm.line), *tm.l);
                          scatter2(tm.plane, cr, go * lval);
                          scatter1(tm.line, *tm.l, go * pval);
                        }
                      }
                    }
                  }
                });
}

// ---------------------------------------------------------------------------
// Volume compositing.

Var composite(Tape& t, Var sigma_raw, Var rgb_raw, const Tensor& deltas,
              const std::array<double, 3>& background) {
  const Tensor& sr = t.value(sigma_raw);
  const Tensor& cr = t.value(rgb_raw);
  const std::size_t R = deltas.rows, S = deltas.cols;
  if (sr.size() != R * S || cr.rows != R * S || cr.cols != 3) {
    fail(ErrorCode::kShapeMismatch, "composite: input shapes");
  }
  Tensor out(R, 3);
  for (std::size_t r = 0; r < R; ++r) {
    double T = 1.0;
    double acc[3] = {0, 0, 0};
    for (std::size_t s = 0; s < S; ++s) {
      const double sigma = std::max(sr.data[r * S + s], 0.0);
      const double alpha = 1.0 - std::exp(-sigma * deltas.data[r * S + s]);
      const double w = T * alpha;
      for (int ch = 0; ch < 3; ++ch) acc[ch] += w * sigmoid(cr.data[(r * S + s) * 3 + ch]);
      T *= 1.0 - alpha;
    }
    for (int ch = 0; ch < 3; ++ch) out.data[r * 3 + ch] = acc[ch] + T * background[ch];
  }
  const Var parents[] = {sigma_raw, rgb_raw};
  return t.push(std::move(out), parents,
                [sigma_raw, rgb_raw, deltas, background, R, S](Tape& tp, const Tensor& g) {
                  const Tensor& sr = tp.value(sigma_raw);
                  const Tensor& cr = tp.value(rgb_raw);
                  const bool need_s = tp.requires_grad(sigma_raw);
                  const bool need_c = tp.requires_grad(rgb_raw);
                  std::vector<double> Tn(S + 1), wv(S), col(S * 3);
                  for (std::size_t r = 0; r < R; ++r) {
                    Tn[0] = 1.0;
                    for (std::size_t s = 0; s < S; ++s) {
                      const double sigma = std::max(sr.data[r * S + s], 0.0);
                      const double trans = std::exp(-sigma * deltas.data[r * S + s]);
                      wv[s] = Tn[s] * (1.0 - trans);
                      Tn[s + 1] = Tn[s] * trans;
                      for (int ch = 0; ch < 3; ++ch) {
                        col[s * 3 + ch] = sigmoid(cr.data[(r * S + s) * 3 + ch]);
                      }
                    }
                    const double* go = &g.data[r * 3];
                    // suffix[ch] = sum_{i > s} w_i c_i + T_S * bg
                    double suffix[3];
                    for (int ch = 0; ch < 3; ++ch) suffix[ch] = Tn[S] * background[ch];
                    for (std::size_t s = S; s-- > 0;) {
                      if (need_c) {
                        auto& gc = tp.grad_buffer(rgb_raw);
                        for (int ch = 0; ch < 3; ++ch) {
                          const double c = col[s * 3 + ch];
                          gc[(r * S + s) * 3 + ch] += go[ch] * wv[s] * c * (1.0 - c);
                        }
                      }
                      if (need_s && sr.data[r * S + s] > 0.0) {
                        double acc = 0.0;
                        for (int ch = 0; ch < 3; ++ch) {
                          acc += go[ch] * (Tn[s + 1] * col[s * 3 + ch] - suffix[ch]);
                        }
                        tp.grad_buffer(sigma_raw)[r * S + s] += deltas.data[r * S + s] * acc;
                      }
                      for (int ch = 0; ch < 3; ++ch) suffix[ch] += wv[s] * col[s * 3 + ch];
                    }
                  }
                });
}

}  // namespace mwrf
