#include "qiml/qcbm/target.hpp"

#include <cmath>
#include <stdexcept>

#include "qiml/qsim/statevector.hpp"

namespace qiml {

void GridMapping::validate() const {
  if (cols == 0 || block == 0)
    throw std::invalid_argument("GridMapping: empty grid or zero block");
  if (rows % block != 0 || cols % block != 0) {
    if (rows == 1 && cols % block == 0) {
      // 1D field coarse-grained along the single axis
    } else {
      throw std::invalid_argument("GridMapping: block does not tile the grid");
    }
  }
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw std::invalid_argument("GridMapping: n_qubits out of range");
  if (active_states() == 0 || active_states() > total_states())
    throw std::invalid_argument("GridMapping: active cells exceed 2^n basis states");
}

std::vector<double> coarse_magnitude(std::span<const double> frame,
                                     const GridMapping& mapping) {
  if (frame.size() != mapping.rows * mapping.cols)
    throw std::invalid_argument("coarse_magnitude: frame/grid mismatch");
  const std::size_t crows = mapping.coarse_rows();
  const std::size_t ccols = mapping.coarse_cols();
  const std::size_t b = mapping.block;
  const std::size_t brows = (mapping.rows == 1) ? 1 : b;
  const double inv = 1.0 / static_cast<double>(brows * b);

  std::vector<double> out(crows * ccols, 0.0);
  for (std::size_t cr = 0; cr < crows; ++cr)
    for (std::size_t cc = 0; cc < ccols; ++cc) {
      double s = 0.0;
      for (std::size_t r = 0; r < brows; ++r)
        for (std::size_t c = 0; c < b; ++c)
          s += std::abs(frame[(cr * brows + r) * mapping.cols + cc * b + c]);
      out[cr * ccols + cc] = s * inv;
    }
  return out;
}

std::vector<double> empirical_target(const FieldSeries& snapshots,
                                     const GridMapping& mapping) {
  mapping.validate();
  if (snapshots.n_trajectories == 0 || snapshots.n_frames == 0)
    throw std::invalid_argument("empirical_target: no snapshots");
  if (snapshots.rows != mapping.rows || snapshots.cols != mapping.cols)
    throw std::invalid_argument("empirical_target: mapping grid mismatch");

  const std::size_t d = mapping.active_states();
  std::vector<double> mean(d, 0.0);
  for (std::size_t t = 0; t < snapshots.n_trajectories; ++t)
    for (std::size_t f = 0; f < snapshots.n_frames; ++f) {
      const auto cm = coarse_magnitude(snapshots.frame(t, f), mapping);
      for (std::size_t i = 0; i < d; ++i) mean[i] += cm[i];
    }

  double total = 0.0;
  for (double v : mean) total += v;
  if (!(total > 0.0))
    throw std::invalid_argument("empirical_target: degenerate all-zero field");

  std::vector<double> p(mapping.total_states(), 0.0);
  for (std::size_t i = 0; i < d; ++i) p[i] = mean[i] / total;
  return p;
}

}  // namespace qiml
