#include "qiml/dynamics/field_series.hpp"

#include <cmath>
#include <stdexcept>

namespace qiml {

void FieldSeries::validate() const {
  if (values.size() != n_trajectories * n_frames * grid_size())
    throw std::invalid_argument("FieldSeries: value count does not match shape");
  for (double v : values)
    if (!std::isfinite(v))
      throw std::invalid_argument("FieldSeries: non-finite value");
}

void SplitSpec::validate() const {
  if (!(train > 0.0) || !(val > 0.0) || !(test > 0.0))
    throw std::invalid_argument("SplitSpec: fractions must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-12)
    throw std::invalid_argument("SplitSpec: fractions must sum to 1");
}

static FieldSeries take(const FieldSeries& s, std::size_t begin, std::size_t count) {
  FieldSeries out;
  out.n_trajectories = count;
  out.n_frames = s.n_frames;
  out.rows = s.rows;
  out.cols = s.cols;
  out.dt = s.dt;
  const std::size_t per_traj = s.n_frames * s.grid_size();
  out.values.assign(s.values.begin() + begin * per_traj,
                    s.values.begin() + (begin + count) * per_traj);
  return out;
}

DatasetSplits split_dataset(const FieldSeries& series, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = series.n_trajectories;
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(spec.val * static_cast<double>(n))));
  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(spec.test * static_cast<double>(n))));
  if (n_val + n_test >= n)
    throw std::invalid_argument("split_dataset: too few trajectories for nonempty splits");
  const std::size_t n_train = n - n_val - n_test;
  return {take(series, 0, n_train), take(series, n_train, n_val),
          take(series, n_train + n_val, n_test)};
}

}  // namespace qiml
