#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qiml {

// Bias-corrected Adam. Moments live alongside the parameter vector;
// step_count advances by exactly one per update.
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(std::size_t n_params, double learning_rate);
};

// In-place update of params; throws std::invalid_argument on any
// length mismatch between params, grads and the moment arrays.
void adam_update(std::span<double> params, std::span<const double> grads,
                 AdamState& state);

}  // namespace qiml
