#pragma once

#include <array>
#include <vector>

#include "nuosc/circuit.hpp"
#include "nuosc/flavor.hpp"
#include "nuosc/pmns_fit.hpp"

// Circuit builders that turn oscillation parameters into runnable Circuits.
//
// Basis assignment, used consistently everywhere: the computational basis is
// the mass basis, qubit 1 is the high bit, and flavor states map to
// e -> |00>, mu -> |01>, tau -> |10>, x -> |11>. Flavor amplitudes follow
// |nu_alpha> = sum_i U_{alpha i} |nu_i> with real U, so state preparation
// applies the transpose (inverse) of the mixing gate and detection applies the
// forward gate.

namespace nuosc {

enum class GateDirection { forward, inverse };

// Measurement basis for the two-flavor circuit: flavor rotates back before
// measuring, mass leaves the state in the computational (mass) basis.
enum class TwoFlavorBasis { flavor, mass };

struct TwoFlavorParams {
    double theta = 0.0;  // vacuum mixing angle, radians
    double dm2 = 0.0;    // eV^2
    double e_gev = 0.0;
    double l_km = 0.0;
};

struct ThreeFlavorParams {
    GateTemplateParams pmns_gate_params;
    double dm2_21 = 0.0;  // eV^2
    double dm2_31 = 0.0;  // eV^2
    double e_gev = 0.0;
    double l_km = 0.0;
};

struct SterileParams {
    double dm2_21 = 0.0;  // eV^2
    double dm2_31 = 0.0;  // eV^2
    double dm2_41 = 0.0;  // eV^2
    double e_gev = 0.0;
    double l_km = 0.0;
    std::array<double, 16> mixing{};  // 4x4 real orthogonal, row-major
};

struct DecoherenceParams {
    double dm2_21 = 0.0;          // eV^2
    double dm2_31 = 0.0;          // eV^2
    double e_gev = 0.0;           // converts L/E back to a baseline for gamma
    double total_l_over_e = 0.0;  // km/GeV
    double gamma_per_km = 0.0;    // damping rate
    int n_steps = 1;
};

// Oscillation phase accumulated over the baseline:
// 2 * osc_coeff * dm2 * L / E, radians.
double phase_of(double dm2, double l_km, double e_gev);

// Single-qubit oscillation experiment: [X for mu] + U3(2 theta) + PhaseS(phi)
// + U3(-2 theta) + Measure, with the last rotation dropped in mass basis.
// Slot 0 reads 0 -> e, 1 -> mu (or nu1/nu2 in mass basis).
Circuit build_two_flavor_circuit(const TwoFlavorParams& p, FlavorLabel initial,
                                 TwoFlavorBasis basis = TwoFlavorBasis::flavor);

// Gate sequence realizing the six-angle template on qubits 1 (high) and 0
// (low): three rotation layers separated by the entangling block [X on qubit
// 1, CNOT 0 -> 1]. inverse emits the reversed sequence with negated angles.
std::vector<GateOp> pmns3_gate(const GateTemplateParams& params, GateDirection direction);

// Full mixing sandwich: prepare the flavor state with the inverse gate, apply
// the mass-basis phases for dm2_31 (qubit 1) and dm2_21 (qubit 0), rotate to
// the flavor basis with the forward gate, measure both qubits.
// initial = x is rejected; slot bits decode as the flavor table above.
Circuit build_three_flavor_circuit(const ThreeFlavorParams& p, FlavorLabel initial);

// Diagonal four-state evolution from single-qubit phases plus one
// CNOT-conjugated phase on the XOR-odd states. The three gate phases solve
// the linear system that puts phase_of(dm2_k1) on mass state k.
std::vector<GateOp> build_sterile_evolution(const SterileParams& p);

// Four-state analogue of the three-flavor sandwich. The mixing matrix is
// fitted to the six-angle template on the fly; a matrix outside the
// template's reach is rejected.
Circuit build_sterile_circuit(const SterileParams& p, FlavorLabel initial);

// n_steps repetitions of: per-step mass phases, ControlledU3 from qubit 0
// onto the ancilla (qubit 2) with cos(theta/2) = exp(-gamma dL), then measure
// and reset the ancilla. Standalone form over 3 qubits with one classical
// slot per step.
Circuit build_decoherence_block(const DecoherenceParams& p);

// Decoherence block wrapped in the mixing sandwich. Slots 0 and 1 hold the
// final flavor readout; slots 2 .. n_steps+1 hold the per-step ancilla bits.
Circuit build_decoherence_circuit(const DecoherenceParams& p, const GateTemplateParams& mixing,
                                  FlavorLabel initial);

}  // namespace nuosc
