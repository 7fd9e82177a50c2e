#include "nuosc/state_vector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nuosc {

namespace {

void check_qubit(const StateVector& s, int qubit) {
    if (qubit < 0 || qubit >= s.n_qubits)
        throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for " +
                                std::to_string(s.n_qubits) + " qubit(s)");
}

}  // namespace

StateVector make_basis_state(int n_qubits, int basis_index) {
    if (n_qubits < 1 || n_qubits > 3)
        throw std::invalid_argument("n_qubits must be 1..3, got " + std::to_string(n_qubits));
    StateVector s;
    s.n_qubits = n_qubits;
    s.amp.assign(static_cast<std::size_t>(1) << n_qubits, cxd(0.0, 0.0));
    if (basis_index < 0 || basis_index >= s.dim())
        throw std::out_of_range("basis index " + std::to_string(basis_index) + " out of range");
    s.amp[static_cast<std::size_t>(basis_index)] = 1.0;
    return s;
}

double norm_sq(const StateVector& s) {
    double n = 0.0;
    for (const cxd& a : s.amp) n += std::norm(a);
    return n;
}

double probability(const StateVector& s, int basis_index) {
    if (basis_index < 0 || basis_index >= s.dim())
        throw std::out_of_range("basis index " + std::to_string(basis_index) + " out of range");
    return std::norm(s.amp[static_cast<std::size_t>(basis_index)]);
}

void apply_gate_in_place(StateVector& s, const GateOp& op) {
    if (!is_unitary_kind(op.kind))
        throw std::invalid_argument(std::string(gate_kind_name(op.kind)) +
                                    " is not a unitary op; use run_shots or run_density");
    check_qubit(s, op.target);
    if (is_controlled_kind(op.kind)) {
        check_qubit(s, op.control);
        if (op.control == op.target)
            throw std::invalid_argument("control and target must differ");
    }

    const auto m = gate_payload_matrix(op);
    const int tbit = 1 << op.target;
    const int cbit = is_controlled_kind(op.kind) ? (1 << op.control) : 0;
    const int d = s.dim();
    for (int i0 = 0; i0 < d; ++i0) {
        if (i0 & tbit) continue;             // visit each target pair once
        if (cbit && !(i0 & cbit)) continue;  // controlled: act only when control bit is 1
        const int i1 = i0 | tbit;
        const cxd a0 = s.amp[static_cast<std::size_t>(i0)];
        const cxd a1 = s.amp[static_cast<std::size_t>(i1)];
        s.amp[static_cast<std::size_t>(i0)] = m[0] * a0 + m[1] * a1;
        s.amp[static_cast<std::size_t>(i1)] = m[2] * a0 + m[3] * a1;
    }
}

StateVector apply_gate(StateVector s, const GateOp& op) {
    apply_gate_in_place(s, op);
    return s;
}

int measure_qubit(StateVector& s, int qubit, Rng& rng) {
    check_qubit(s, qubit);
    const int bit = 1 << qubit;
    double p1 = 0.0;
    for (int i = 0; i < s.dim(); ++i)
        if (i & bit) p1 += std::norm(s.amp[static_cast<std::size_t>(i)]);

    // uniform() < p1 selects outcome 1 with probability p1 and never selects
    // an outcome of exactly zero probability.
    const int outcome = (rng.uniform() < p1) ? 1 : 0;
    const double p = outcome ? p1 : 1.0 - p1;
    const double scale = 1.0 / std::sqrt(p);
    for (int i = 0; i < s.dim(); ++i) {
        const bool keep = ((i & bit) != 0) == (outcome == 1);
        auto& a = s.amp[static_cast<std::size_t>(i)];
        a = keep ? a * scale : cxd(0.0, 0.0);
    }
    return outcome;
}

void reset_qubit(StateVector& s, int qubit, Rng& rng) {
    const int outcome = measure_qubit(s, qubit, rng);
    if (outcome == 1) apply_gate_in_place(s, make_pauli_x(qubit));
}

}  // namespace nuosc
