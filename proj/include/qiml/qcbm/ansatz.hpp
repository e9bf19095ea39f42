#pragma once

#include <span>
#include <vector>

#include "qiml/qsim/statevector.hpp"

namespace qiml {

// Parameter budget from the hardware-efficiency constraint; exceeding it
// is a warning, not an error.
inline constexpr int kParamBudget = 300;

// Layered hardware-efficient ansatz: per layer, each qubit gets 1-3
// rotations (RX / RX-RZ / RX-RZ-RX), with a CZ ring between consecutive
// rotation layers. Every parameter enters through exactly one half-angle
// rotation, so the parameter-shift rule is exact.
struct Ansatz {
  int n_qubits = 0;
  int n_rotation_layers = 0;
  int rotations_per_layer = 1;  // 1, 2 or 3

  int parameter_count() const {
    return n_qubits * n_rotation_layers * rotations_per_layer;
  }

  // Deterministic gate sequence for a given angle vector.
  std::vector<GateOp> realize(std::span<const double> angles) const;

  std::vector<double> born(std::span<const double> angles) const;
};

// Validates ranges; emits a budget warning on stderr when
// parameter_count exceeds kParamBudget.
Ansatz build_ansatz(int n_qubits, int n_rotation_layers, int rotations_per_layer);

}  // namespace qiml
