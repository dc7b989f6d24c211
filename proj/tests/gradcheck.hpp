// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Central finite-difference checks for the tape primitives, shared by the
// unit tests and the acceptance runner.

#ifndef MWRF_TESTS_GRADCHECK_HPP
#define MWRF_TESTS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mwrf/tape.hpp"

namespace mwrf::testing {

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCase {
  std::vector<Tensor> inputs;
  Builder build;
};

struct GradOp {
  std::string name;
  std::function<GradCase(std::mt19937_64&)> make;
};

inline Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (double& v : t.data) v = u(rng);
  return t;
}

// Values bounded away from zero so relu stays differentiable at +-h.
inline Tensor away_from_zero(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::bernoulli_distribution neg(0.4);
  Tensor t(r, c);
  for (double& v : t.data) v = neg(rng) ? -u(rng) : u(rng);
  return t;
}

// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||)
// over up to `probes` random entries of every input.
inline double check_gradient(const GradCase& gc, std::mt19937_64& rng, int probes = 12,
                             double h = 1e-6) {
  // Random output weights make the scalar loss sensitive to every output.
  Tensor weights;
  auto loss_of = [&](const std::vector<Tensor>& in, Tape& t, std::vector<Var>& vars) {
    vars.clear();
    for (const Tensor& x : in) vars.push_back(t.leaf(x));
    const Var out = gc.build(t, vars);
    if (weights.size() == 0) weights = random_tensor(rng, t.value(out).rows, t.value(out).cols);
    return sum(t, mul_const(t, out, weights));
  };

  Tape t;
  std::vector<Var> vars;
  const Var loss = loss_of(gc.inputs, t, vars);
  t.backward(loss);

  double num2 = 0.0, den_a = 0.0, den_n = 0.0;
  for (std::size_t k = 0; k < gc.inputs.size(); ++k) {
    const Tensor analytic = t.grad(vars[k]);
    const std::size_t n = gc.inputs[k].size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min<std::size_t>(n, static_cast<std::size_t>(probes)));
    for (std::size_t i : idx) {
      std::vector<Tensor> plus = gc.inputs, minus = gc.inputs;
      plus[k].data[i] += h;
      minus[k].data[i] -= h;
      Tape tp, tm;
      std::vector<Var> vp, vm;
      const double lp = tp.value(loss_of(plus, tp, vp)).data[0];
      const double lm = tm.value(loss_of(minus, tm, vm)).data[0];
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic.data[i];
      num2 += (a - numeric) * (a - numeric);
      den_a += a * a;
      den_n += numeric * numeric;
    }
  }
  const double den = std::sqrt(std::max(den_a, den_n));
  if (den < 1e-12) return std::sqrt(num2);
  return std::sqrt(num2) / den;
}

inline std::vector<GradOp> grad_ops() {
  std::vector<GradOp> ops;
  auto binary = [](std::string name, Var (*f)(Tape&, Var, Var)) {
    return GradOp{name, [f](std::mt19937_64& rng) {
                    std::uniform_int_distribution<std::size_t> d(1, 6);
                    const std::size_t r = d(rng), c = d(rng);
                    return GradCase{{random_tensor(rng, r, c), random_tensor(rng, r, c)},
                                    [f](Tape& t, const std::vector<Var>& v) { return f(t, v[0], v[1]); }};
                  }};
  };
  ops.push_back(binary("add", &add));
  ops.push_back(binary("sub", &sub));
  ops.push_back(binary("mul", &mul));
  ops.push_back({"mul_scalar", [](std::mt19937_64& rng) {
                   const double c = std::uniform_real_distribution<double>(-3, 3)(rng);
                   return GradCase{{random_tensor(rng, 4, 5)},
                                   [c](Tape& t, const std::vector<Var>& v) { return mul_scalar(t, v[0], c); }};
                 }});
  ops.push_back({"mul_const", [](std::mt19937_64& rng) {
                   Tensor c = random_tensor(rng, 3, 7);
                   return GradCase{{random_tensor(rng, 3, 7)},
                                   [c](Tape& t, const std::vector<Var>& v) { return mul_const(t, v[0], c); }};
                 }});
  ops.push_back({"square", [](std::mt19937_64& rng) {
                   return GradCase{{random_tensor(rng, 5, 3)},
                                   [](Tape& t, const std::vector<Var>& v) { return square(t, v[0]); }};
                 }});
  ops.push_back({"sigmoid", [](std::mt19937_64& rng) {
                   return GradCase{{random_tensor(rng, 5, 3, -4, 4)},
                                   [](Tape& t, const std::vector<Var>& v) { return sigmoid(t, v[0]); }};
                 }});
  ops.push_back({"relu", [](std::mt19937_64& rng) {
                   return GradCase{{away_from_zero(rng, 6, 4)},
                                   [](Tape& t, const std::vector<Var>& v) { return relu(t, v[0]); }};
                 }});
  ops.push_back({"sum", [](std::mt19937_64& rng) {
                   return GradCase{{random_tensor(rng, 6, 2)},
                                   [](Tape& t, const std::vector<Var>& v) { return sum(t, v[0]); }};
                 }});
  ops.push_back({"mse", [](std::mt19937_64& rng) {
                   // Target smaller than the prediction exercises the block compare.
                   Tensor target = random_tensor(rng, 3, 4);
                   return GradCase{{random_tensor(rng, 5, 6)},
                                   [target](Tape& t, const std::vector<Var>& v) { return mse(t, v[0], target); }};
                 }});
  ops.push_back({"masked", [](std::mt19937_64& rng) {
                   return GradCase{{random_tensor(rng, 4, 4), random_tensor(rng, 4, 4, -3, 3)},
                                   [](Tape& t, const std::vector<Var>& v) {
                                     return masked(t, v[0], v[1], MaskForward::kSoft);
                                   }};
                 }});
  ops.push_back({"sigmoid_sum", [](std::mt19937_64& rng) {
                   return GradCase{{random_tensor(rng, 7, 3, -3, 3)},
                                   [](Tape& t, const std::vector<Var>& v) { return sigmoid_sum(t, v[0]); }};
                 }});
  ops.push_back({"waverec", [](std::mt19937_64& rng) {
                   const WaveletName names[] = {WaveletName::kHaar, WaveletName::kDb4, WaveletName::kCoif1,
                                                WaveletName::kBior44, WaveletName::kRbior44};
                   const WaveletSpec spec = WaveletSpec::make(names[rng() % 5]);
                   const int levels = 1 + static_cast<int>(rng() % 2);
                   return GradCase{{random_tensor(rng, 8, 16)}, [spec, levels](Tape& t, const std::vector<Var>& v) {
                                     return waverec(t, v[0], spec, levels);
                                   }};
                 }});
  ops.push_back({"idct", [](std::mt19937_64& rng) {
                   return GradCase{{random_tensor(rng, 6, 8)},
                                   [](Tape& t, const std::vector<Var>& v) { return idct(t, v[0]); }};
                 }});
  ops.push_back({"to_spatial", [](std::mt19937_64& rng) {
                   FieldConfig c = FieldConfig::image(8, 8, 1, static_cast<DomainMode>(rng() % 3), 2);
                   const WaveletSpec spec = c.wavelet_spec();
                   return GradCase{{random_tensor(rng, 8, 8)}, [c, spec](Tape& t, const std::vector<Var>& v) {
                                     return to_spatial(t, v[0], c, spec);
                                   }};
                 }});
  ops.push_back({"outer", [](std::mt19937_64& rng) {
                   return GradCase{{random_tensor(rng, 5, 1), random_tensor(rng, 4, 1)},
                                   [](Tape& t, const std::vector<Var>& v) { return outer(t, v[0], v[1]); }};
                 }});
  ops.push_back({"vm_sample", [](std::mt19937_64& rng) {
                   const std::size_t h = 4 + rng() % 3, w = 3 + rng() % 3, d = 5 + rng() % 2;
                   FieldConfig c = FieldConfig::volume({h, w, d}, 1 + static_cast<int>(rng() % 2),
                                                       1 + static_cast<int>(rng() % 2), DomainMode::kSpatial);
                   std::vector<Tensor> in;
                   const std::size_t R = static_cast<std::size_t>(c.n_rank), C = static_cast<std::size_t>(c.channels);
                   const std::array<std::array<std::size_t, 2>, 3> shapes{{{h, w}, {w, d}, {h, d}}};
                   const std::array<std::size_t, 3> lines{d, h, w};
                   for (std::size_t ch = 0; ch < C; ++ch) {
                     for (int a = 0; a < 3; ++a) {
                       for (std::size_t r = 0; r < R; ++r) in.push_back(random_tensor(rng, shapes[a][0], shapes[a][1]));
                     }
                   }
                   for (std::size_t ch = 0; ch < C; ++ch) {
                     for (int a = 0; a < 3; ++a) {
                       for (std::size_t r = 0; r < R; ++r) in.push_back(random_tensor(rng, lines[a], 1));
                     }
                   }
                   std::uniform_real_distribution<double> u(0.0, 1.0);
                   std::vector<Point3> pts(9);
                   for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
                   const std::size_t np = 3 * R * C;
                   return GradCase{in, [c, pts, np](Tape& t, const std::vector<Var>& v) {
                                     std::vector<Var> planes(v.begin(), v.begin() + np), lines(v.begin() + np, v.end());
                                     return vm_sample(t, c, planes, lines, pts);
                                   }};
                 }});
  ops.push_back({"vm_sample_image", [](std::mt19937_64& rng) {
                   FieldConfig c = FieldConfig::image(5, 7, 2, DomainMode::kSpatial);
                   std::uniform_real_distribution<double> u(0.0, 1.0);
                   std::vector<Point3> pts(6);
                   for (auto& p : pts) p = {u(rng), u(rng), 0.0};
                   return GradCase{{random_tensor(rng, 5, 7), random_tensor(rng, 5, 7)},
                                   [c, pts](Tape& t, const std::vector<Var>& v) {
                                     return vm_sample(t, c, v, std::span<const Var>{}, pts);
                                   }};
                 }});
  ops.push_back({"composite", [](std::mt19937_64& rng) {
                   const std::size_t R = 1 + rng() % 3, S = 2 + rng() % 6;
                   Tensor deltas = random_tensor(rng, R, S, 0.05, 0.4);
                   const std::array<double, 3> bg{1.0, 0.5, 0.25};
                   return GradCase{{away_from_zero(rng, R * S, 1), random_tensor(rng, R * S, 3, -2, 2)},
                                   [deltas, bg](Tape& t, const std::vector<Var>& v) {
                                     return composite(t, v[0], v[1], deltas, bg);
                                   }};
                 }});
  return ops;
}

}  // namespace mwrf::testing

#endif  // MWRF_TESTS_GRADCHECK_HPP
