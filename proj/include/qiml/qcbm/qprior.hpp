#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qiml/qcbm/ansatz.hpp"
#include "qiml/qcbm/kernel.hpp"
#include "qiml/qcbm/target.hpp"

namespace qiml {

// The portable invariant-measure artifact: circuit topology, trained
// angles and the grid mapping, plus training provenance.
struct QPrior {
  Ansatz ansatz;
  std::vector<double> angles;
  GridMapping mapping;
  KernelSpec kernel;
  double final_loss = 0.0;

  std::string dataset_id;
  std::uint64_t seed = 0;
  std::uint64_t epochs = 0;
  std::uint64_t timestamp = 0;  // 0 = unset; see QIML_TIMESTAMP

  // Optional cached Born distribution (not written by default; checked
  // against the circuit on load when present).
  std::optional<std::vector<double>> cached_born;

  std::vector<double> born() const { return ansatz.born(angles); }
};

// Versioned UTF-8 JSON checkpoint. Angles round-trip bit-exactly
// (shortest round-trip decimal serialisation).
void save_qprior(const QPrior& prior, const std::string& path);
QPrior load_qprior(const std::string& path);

}  // namespace qiml
