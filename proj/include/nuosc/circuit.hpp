#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nuosc/density_matrix.hpp"
#include "nuosc/gate_op.hpp"
#include "nuosc/rng.hpp"
#include "nuosc/state_vector.hpp"

namespace nuosc {

// Ordered gate list over up to three qubits plus a classical scratchpad for
// measurement results. Circuits are plain data; validate() enforces the
// structural rules before any of the runners accept one.
struct Circuit {
    int n_qubits = 0;
    int n_classical_slots = 0;
    std::vector<GateOp> ops;
};

// Tally of measured bit strings. Keys read slot (n_slots-1) ... slot 0 left to
// right, so slot 0 is the rightmost character, matching the basis-index
// convention where qubit 0 is the least significant bit.
struct CountsHistogram {
    int n_slots = 0;
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total_shots = 0;
};

// Throws std::invalid_argument when the circuit breaks a structural rule:
// qubit count outside 1..3, an op touching an out-of-range qubit or slot,
// control == target, a classical slot written twice, or a Reset that is not
// either the first op on its qubit or directly preceded (on that qubit) by a
// Measure.
void validate(const Circuit& circuit);

// Applies the unitary ops in order. Rejects circuits containing Measure or
// Reset, pointing the caller at run_shots instead.
StateVector run_statevector(const Circuit& circuit, const StateVector& initial);

// Samples the circuit n_shots times with Born-rule collapse at each Measure.
// Shot k uses the stream Rng(seed + k), so results are independent of any
// batching or ordering of shots. Every classical slot must be written by some
// Measure; n_shots must be at least 1.
CountsHistogram run_shots(const Circuit& circuit, const StateVector& initial, std::uint64_t n_shots,
                          std::uint64_t seed);

// Deterministic density-matrix evolution. Unitaries act as rho -> G rho G^dag,
// Measure as the non-selective dephasing channel, Reset as measure-then-flip.
DensityMatrix run_density(const Circuit& circuit, const DensityMatrix& initial);

// Histogram counts as probabilities, indexed by the numeric value of the bit
// string (slot 0 = bit 0). Length 2^n_slots.
std::vector<double> to_probabilities(const CountsHistogram& hist);

// Projects a histogram onto a subset of classical slots, summing counts that
// agree on the kept slots. keep lists old slot indices; kept slot keep[k]
// becomes slot k of the result, and keep must be strictly increasing.
CountsHistogram marginalize(const CountsHistogram& hist, const std::vector<int>& keep);

}  // namespace nuosc
