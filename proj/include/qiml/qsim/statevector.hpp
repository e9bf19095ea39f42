#pragma once

#include <map>
#include <vector>

#include "qiml/numcore/fft.hpp"
#include "qiml/numcore/random.hpp"

namespace qiml {

inline constexpr int kMaxQubits = 15;

// Basis ordering is little-endian: qubit 0 is the least-significant bit
// of the basis index. Fixed so grid mappings reproduce across builds.
struct Statevector {
  int n_qubits = 0;
  ComplexBuffer amplitudes;

  std::size_t dim() const { return amplitudes.size(); }
  double norm2() const;
};

enum class GateKind { RX, RZ, CZ };

// RX(t) = exp(-i t X / 2), RZ(t) = exp(-i t Z / 2); CZ is diagonal.
struct GateOp {
  GateKind kind;
  int target = 0;
  int control = -1;   // CZ only
  double angle = 0.0; // RX/RZ only

  static GateOp rx(int target, double angle) { return {GateKind::RX, target, -1, angle}; }
  static GateOp rz(int target, double angle) { return {GateKind::RZ, target, -1, angle}; }
  static GateOp cz(int control, int target) { return {GateKind::CZ, target, control, 0.0}; }
};

Statevector init_zero_state(int n_qubits);

// Value-in/value-out contract; the in-place kernel below is the hot path.
Statevector apply_gate(const Statevector& state, const GateOp& gate);
void apply_gate_inplace(Statevector& state, const GateOp& gate);

Statevector run_circuit(const std::vector<GateOp>& gates, int n_qubits);

std::vector<double> born_distribution(const Statevector& state);

// Finite-shot measurement; counts sum to shots. Throws on shots < 1.
std::map<std::size_t, std::uint64_t> sample_counts(const Statevector& state,
                                                   std::uint64_t shots,
                                                   RandomStream& rng);

}  // namespace qiml
