#pragma once

#include <vector>

#include "nuosc/gate_op.hpp"
#include "nuosc/linalg.hpp"
#include "nuosc/rng.hpp"

namespace nuosc {

// Pure state of an n-qubit register, n in 1..3. Basis index convention:
// qubit k contributes bit 2^k, so the bit string reads "q_{n-1} ... q_0" and
// for two qubits |AB> has A = qubit 1 (high bit), B = qubit 0.
struct StateVector {
    int n_qubits = 0;
    std::vector<cxd> amp;

    int dim() const { return 1 << n_qubits; }
};

StateVector make_basis_state(int n_qubits, int basis_index);

double norm_sq(const StateVector& s);

// |amplitude|^2 of one basis state.
double probability(const StateVector& s, int basis_index);

// Applies a unitary op in place. Throws std::invalid_argument for
// measure/reset kinds (those need a sampling or channel context) and
// std::out_of_range for bad qubit indices.
void apply_gate_in_place(StateVector& s, const GateOp& op);

// Value-returning variant of the same operation.
StateVector apply_gate(StateVector s, const GateOp& op);

// Samples the qubit's measurement outcome from the Born rule, collapses and
// renormalizes the state, and returns the observed bit.
int measure_qubit(StateVector& s, int qubit, Rng& rng);

// Projective measurement followed by a conditional X, leaving the qubit in |0>.
void reset_qubit(StateVector& s, int qubit, Rng& rng);

}  // namespace nuosc
