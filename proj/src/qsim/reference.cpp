#include "qiml/qsim/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace qiml::ref {

void apply_gate_inplace(Statevector& state, const GateOp& gate) {
  if (gate.target < 0 || gate.target >= state.n_qubits)
    throw std::invalid_argument("ref::apply_gate: target out of range");
  auto& a = state.amplitudes;
  const std::size_t dim = state.dim();
  const std::size_t tbit = std::size_t{1} << gate.target;

  switch (gate.kind) {
    case GateKind::RX: {
      const double c = std::cos(0.5 * gate.angle);
      const cplx mis(0.0, -std::sin(0.5 * gate.angle));
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & tbit) continue;
        const cplx a0 = a[i], a1 = a[i | tbit];
        a[i] = c * a0 + mis * a1;
        a[i | tbit] = mis * a0 + c * a1;
      }
      break;
    }
    case GateKind::RZ: {
      const cplx ph0 = std::polar(1.0, -0.5 * gate.angle);
      const cplx ph1 = std::polar(1.0, 0.5 * gate.angle);
      for (std::size_t i = 0; i < dim; ++i) a[i] *= (i & tbit) ? ph1 : ph0;
      break;
    }
    case GateKind::CZ: {
      if (gate.control < 0 || gate.control >= state.n_qubits ||
          gate.control == gate.target)
        throw std::invalid_argument("ref::apply_gate: bad CZ qubits");
      const std::size_t cbit = std::size_t{1} << gate.control;
      for (std::size_t i = 0; i < dim; ++i)
        if ((i & tbit) && (i & cbit)) a[i] = -a[i];
      break;
    }
  }
}

Statevector run_circuit(const std::vector<GateOp>& gates, int n_qubits) {
  Statevector state = init_zero_state(n_qubits);
  for (const auto& g : gates) ref::apply_gate_inplace(state, g);
  return state;
}

}  // namespace qiml::ref
