#include "qiml/qsim/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qiml/util/parallel.hpp"

namespace qiml {

double Statevector::norm2() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

Statevector init_zero_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw std::invalid_argument("init_zero_state: n_qubits out of range [1," +
                                std::to_string(kMaxQubits) + "]");
  Statevector s;
  s.n_qubits = n_qubits;
  s.amplitudes.assign(std::size_t{1} << n_qubits, cplx(0.0, 0.0));
  s.amplitudes[0] = cplx(1.0, 0.0);
  return s;
}

static void check_gate(const Statevector& state, const GateOp& gate) {
  if (gate.target < 0 || gate.target >= state.n_qubits)
    throw std::invalid_argument("apply_gate: target qubit out of range");
  if (gate.kind == GateKind::CZ) {
    if (gate.control < 0 || gate.control >= state.n_qubits)
      throw std::invalid_argument("apply_gate: control qubit out of range");
    if (gate.control == gate.target)
      throw std::invalid_argument("apply_gate: CZ control equals target");
  }
}

// Index pairs differing on the target bit are disjoint, so the parallel
// loops write each amplitude exactly once (deterministic for any thread
// count).
void apply_gate_inplace(Statevector& state, const GateOp& gate) {
  check_gate(state, gate);
  auto* a = state.amplitudes.data();
  const std::int64_t dim = static_cast<std::int64_t>(state.dim());
  const std::size_t tbit = std::size_t{1} << gate.target;

  switch (gate.kind) {
    case GateKind::RX: {
      const double c = std::cos(0.5 * gate.angle);
      const double s = std::sin(0.5 * gate.angle);
      const cplx mis(0.0, -s);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < dim; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (idx & tbit) continue;
        const cplx a0 = a[idx];
        const cplx a1 = a[idx | tbit];
        a[idx] = c * a0 + mis * a1;
        a[idx | tbit] = mis * a0 + c * a1;
      }
      break;
    }
    case GateKind::RZ: {
      const cplx ph0 = std::polar(1.0, -0.5 * gate.angle);
      const cplx ph1 = std::polar(1.0, 0.5 * gate.angle);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < dim; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        a[idx] *= (idx & tbit) ? ph1 : ph0;
      }
      break;
    }
    case GateKind::CZ: {
      const std::size_t cbit = std::size_t{1} << gate.control;
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < dim; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if ((idx & tbit) && (idx & cbit)) a[idx] = -a[idx];
      }
      break;
    }
  }
}

Statevector apply_gate(const Statevector& state, const GateOp& gate) {
  Statevector out = state;
  apply_gate_inplace(out, gate);
  return out;
}

Statevector run_circuit(const std::vector<GateOp>& gates, int n_qubits) {
  Statevector state = init_zero_state(n_qubits);
  for (const auto& g : gates) apply_gate_inplace(state, g);
  return state;
}

std::vector<double> born_distribution(const Statevector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state.amplitudes[i]);
  return p;
}

std::map<std::size_t, std::uint64_t> sample_counts(const Statevector& state,
                                                   std::uint64_t shots,
                                                   RandomStream& rng) {
  if (shots < 1) throw std::invalid_argument("sample_counts: shots must be >= 1");
  const auto p = born_distribution(state);
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  cdf.back() = std::max(cdf.back(), 1.0);

  std::map<std::size_t, std::uint64_t> counts;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform01();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto idx = static_cast<std::size_t>(it - cdf.begin());
    counts[std::min(idx, p.size() - 1)] += 1;
  }
  return counts;
}

}  // namespace qiml
