#pragma once

#include <array>
#include <complex>
#include <string>

#include "nuosc/linalg.hpp"

namespace nuosc {

// One instruction in a circuit. Unitary kinds act on one or two qubits;
// Measure samples a qubit into a classical slot; Reset forces a qubit to |0>
// (projective measurement followed by a conditional X).
enum class GateKind {
    u3,                // general single-qubit rotation, three angles
    phase_s,           // diag(1, e^{i*phi})
    pauli_x,           // bit flip
    cnot,              // controlled X
    controlled_u3,     // controlled general rotation
    controlled_phase,  // diag(1,1,1,e^{i*phi}) on (control, target)
    measure,
    reset,
};

struct GateOp {
    GateKind kind;
    int target = -1;   // qubit acted on (the target for controlled kinds)
    int control = -1;  // controlled kinds only, -1 otherwise
    double theta = 0.0;
    double phi = 0.0;
    double lambda = 0.0;
    int slot = -1;     // measure only: classical slot written
};

inline GateOp make_u3(int qubit, double theta, double phi, double lambda) {
    return {GateKind::u3, qubit, -1, theta, phi, lambda, -1};
}
inline GateOp make_phase_s(int qubit, double phi) {
    return {GateKind::phase_s, qubit, -1, 0.0, phi, 0.0, -1};
}
inline GateOp make_pauli_x(int qubit) { return {GateKind::pauli_x, qubit, -1, 0.0, 0.0, 0.0, -1}; }
inline GateOp make_cnot(int control, int target) {
    return {GateKind::cnot, target, control, 0.0, 0.0, 0.0, -1};
}
inline GateOp make_controlled_u3(int control, int target, double theta, double phi, double lambda) {
    return {GateKind::controlled_u3, target, control, theta, phi, lambda, -1};
}
inline GateOp make_controlled_phase(int control, int target, double phi) {
    return {GateKind::controlled_phase, target, control, 0.0, phi, 0.0, -1};
}
inline GateOp make_measure(int qubit, int slot) {
    return {GateKind::measure, qubit, -1, 0.0, 0.0, 0.0, slot};
}
inline GateOp make_reset(int qubit) { return {GateKind::reset, qubit, -1, 0.0, 0.0, 0.0, -1}; }

inline bool is_unitary_kind(GateKind k) {
    return k != GateKind::measure && k != GateKind::reset;
}
inline bool is_controlled_kind(GateKind k) {
    return k == GateKind::cnot || k == GateKind::controlled_u3 || k == GateKind::controlled_phase;
}

const char* gate_kind_name(GateKind k);

// 2x2 matrix of the single-qubit payload: the gate itself for u3/phase_s/
// pauli_x, the controlled block for cnot/controlled_u3/controlled_phase.
// Layout {m00, m01, m10, m11}. Throws for measure/reset.
std::array<cxd, 4> gate_payload_matrix(const GateOp& op);

// Full unitary of the op on its own qubit space (2x2, or 4x4 over
// (control, target) with the control as the more significant bit).
// Throws for measure/reset.
CMatrix gate_unitary(const GateOp& op);

}  // namespace nuosc
