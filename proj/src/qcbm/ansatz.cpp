#include "qiml/qcbm/ansatz.hpp"

#include <iostream>
#include <stdexcept>

namespace qiml {

Ansatz build_ansatz(int n_qubits, int n_rotation_layers, int rotations_per_layer) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw std::invalid_argument("build_ansatz: n_qubits out of range");
  if (n_rotation_layers < 1)
    throw std::invalid_argument("build_ansatz: need at least one layer");
  if (rotations_per_layer < 1 || rotations_per_layer > 3)
    throw std::invalid_argument("build_ansatz: rotations_per_layer must be 1-3");
  Ansatz a{n_qubits, n_rotation_layers, rotations_per_layer};
  if (a.parameter_count() > kParamBudget)
    std::cerr << "warning: ansatz has " << a.parameter_count()
              << " parameters, above the " << kParamBudget << " budget\n";
  return a;
}

std::vector<GateOp> Ansatz::realize(std::span<const double> angles) const {
  if (static_cast<int>(angles.size()) != parameter_count())
    throw std::invalid_argument("Ansatz::realize: angle count mismatch");
  std::vector<GateOp> gates;
  gates.reserve(angles.size() + static_cast<std::size_t>(n_qubits) *
                                    (n_rotation_layers - 1));
  std::size_t p = 0;
  for (int layer = 0; layer < n_rotation_layers; ++layer) {
    for (int q = 0; q < n_qubits; ++q) {
      // pattern: RX / RX-RZ / RX-RZ-RX
      gates.push_back(GateOp::rx(q, angles[p++]));
      if (rotations_per_layer >= 2) gates.push_back(GateOp::rz(q, angles[p++]));
      if (rotations_per_layer >= 3) gates.push_back(GateOp::rx(q, angles[p++]));
    }
    if (layer + 1 < n_rotation_layers && n_qubits >= 2) {
      const int n_edges = (n_qubits == 2) ? 1 : n_qubits;  // ring, no duplicate edge
      for (int q = 0; q < n_edges; ++q)
        gates.push_back(GateOp::cz(q, (q + 1) % n_qubits));
    }
  }
  return gates;
}

std::vector<double> Ansatz::born(std::span<const double> angles) const {
  return born_distribution(run_circuit(realize(angles), n_qubits));
}

}  // namespace qiml
