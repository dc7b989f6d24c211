// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/optim.hpp"

#include <cmath>

#include "mwrf/error.hpp"

namespace mwrf {

double LrSchedule::at(std::size_t step) const {
  const double T = total_steps == 0 ? 1.0 : static_cast<double>(total_steps);
  return initial * std::pow(final_ratio, static_cast<double>(step) / T);
}

AdamState::AdamState(std::vector<std::size_t> sizes, AdamOptions options, LrSchedule schedule)
    : options_(options), schedule_(schedule) {
  for (std::size_t n : sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void AdamState::update(std::span<const std::span<double>> params,
                       std::span<const std::span<const double>> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    fail(ErrorCode::kShapeMismatch, "adam: parameter count differs from state");
  }
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (params[i].size() != m_[i].size() || grads[i].size() != m_[i].size()) {
      fail(ErrorCode::kShapeMismatch, "adam: parameter size differs from state");
    }
  }
  const double lr = schedule_.at(step_);
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    double* p = params[i].data();
    const double* g = grads[i].data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t k = 0; k < m_[i].size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + options_.eps);
    }
  }
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  const std::span<double> p[] = {params};
  const std::span<const double> g[] = {grads};
  state.update(p, g);
}

}  // namespace mwrf
