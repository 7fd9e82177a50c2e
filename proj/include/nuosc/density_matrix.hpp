#pragma once

#include <vector>

#include "nuosc/gate_op.hpp"
#include "nuosc/linalg.hpp"
#include "nuosc/state_vector.hpp"

namespace nuosc {

// Mixed state of an n-qubit register, stored dense row-major. Used for the
// exact (sampling-free) treatment of measurement and reset channels.
struct DensityMatrix {
    int n_qubits = 0;
    std::vector<cxd> m;  // dim x dim, row-major

    int dim() const { return 1 << n_qubits; }
    cxd& at(int r, int c) { return m[static_cast<std::size_t>(r) * dim() + c]; }
    const cxd& at(int r, int c) const { return m[static_cast<std::size_t>(r) * dim() + c]; }
};

DensityMatrix density_from_state(const StateVector& s);

DensityMatrix make_density_basis_state(int n_qubits, int basis_index);

cxd trace(const DensityMatrix& rho);

double hermiticity_defect(const DensityMatrix& rho);

// Applies one op as a channel, in place:
//   unitary kinds     rho -> G rho G^dagger
//   measure           rho -> sum_k P_k rho P_k   (non-selective, dephases the qubit)
//   reset             rho -> P_0 rho P_0 + X P_1 rho P_1 X   (qubit ends in |0>)
void apply_channel_in_place(DensityMatrix& rho, const GateOp& op);

// Reduced density matrix over the kept qubits. `keep` must be non-empty with
// valid, distinct indices; kept qubits are reindexed 0.. in ascending order
// of their original index.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

}  // namespace nuosc
