// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MWRF_OPTIM_HPP
#define MWRF_OPTIM_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace mwrf {

// lr(t) = initial * ratio^(t / total_steps).
struct LrSchedule {
  double initial = 0.02;
  double final_ratio = 0.1;
  std::size_t total_steps = 1;

  double at(std::size_t step) const;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

// Moments for a list of parameter arrays updated together.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::vector<std::size_t> sizes, AdamOptions options, LrSchedule schedule);

  std::size_t step() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const LrSchedule& schedule() const { return schedule_; }
  // Learning rate that the next call to adam_step will use.
  double current_lr() const { return schedule_.at(step_); }

  std::span<const double> first_moment(std::size_t i) const { return m_.at(i); }
  std::span<const double> second_moment(std::size_t i) const { return v_.at(i); }

  // One bias-corrected Adam update of every array. Throws ShapeMismatch
  // when the counts or sizes differ from construction.
  void update(std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads);

 private:
  AdamOptions options_;
  LrSchedule schedule_;
  std::size_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Single-array convenience wrapper around AdamState::update.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace mwrf

#endif  // MWRF_OPTIM_HPP
