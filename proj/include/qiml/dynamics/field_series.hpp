#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qiml {

// Trajectories x frames x spatial grid of real field values.
// rows == 1 for 1D data; values are stored [traj][frame][row][col].
struct FieldSeries {
  std::size_t n_trajectories = 0;
  std::size_t n_frames = 0;
  std::size_t rows = 1;
  std::size_t cols = 0;
  double dt = 0.0;  // time between stored frames

  std::vector<double> values;

  std::size_t grid_size() const { return rows * cols; }
  bool is_2d() const { return rows > 1; }

  std::span<const double> frame(std::size_t traj, std::size_t f) const {
    const std::size_t g = grid_size();
    return {values.data() + (traj * n_frames + f) * g, g};
  }
  std::span<double> frame(std::size_t traj, std::size_t f) {
    const std::size_t g = grid_size();
    return {values.data() + (traj * n_frames + f) * g, g};
  }

  void validate() const;  // shape/finiteness invariants
};

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void validate() const;
};

struct DatasetSplits {
  FieldSeries train, val, test;
};

// Contiguous chronological partition over trajectories. Val/test get
// max(1, floor(fraction * n)); the remainder goes to train. Throws when
// any split would be empty.
DatasetSplits split_dataset(const FieldSeries& series, const SplitSpec& spec);

}  // namespace qiml
