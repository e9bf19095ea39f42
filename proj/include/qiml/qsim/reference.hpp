#pragma once

#include "qiml/qsim/statevector.hpp"

namespace qiml::ref {

// Serial reference kernels. Kept deliberately simple and unparallelised;
// unit tests and the benchmark compare the OpenMP paths against these.
void apply_gate_inplace(Statevector& state, const GateOp& gate);
Statevector run_circuit(const std::vector<GateOp>& gates, int n_qubits);

}  // namespace qiml::ref
