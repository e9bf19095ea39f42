#pragma once

#include <span>
#include <vector>

#include "qiml/dynamics/field_series.hpp"

namespace qiml {

// Bijection between coarse grid cells and the first D basis states of an
// n-qubit register (row-major flattening, little-endian basis order).
struct GridMapping {
  std::size_t rows = 1;       // 1 for 1D fields
  std::size_t cols = 0;
  std::size_t block = 1;      // coarse-grain block edge length
  int n_qubits = 0;

  std::size_t coarse_rows() const { return rows == 1 ? 1 : rows / block; }
  std::size_t coarse_cols() const { return cols / block; }
  std::size_t active_states() const { return coarse_rows() * coarse_cols(); }
  std::size_t total_states() const { return std::size_t{1} << n_qubits; }

  void validate() const;
};

// Block-mean of |u| over one frame, laid out row-major over coarse cells.
std::vector<double> coarse_magnitude(std::span<const double> frame,
                                     const GridMapping& mapping);

// Invariant-measure estimate: time-average of coarse-grained |u| over all
// frames of the slice, normalised to a distribution over 2^n basis states
// (zero beyond the active cells). Throws on an all-zero field.
std::vector<double> empirical_target(const FieldSeries& snapshots,
                                     const GridMapping& mapping);

}  // namespace qiml
