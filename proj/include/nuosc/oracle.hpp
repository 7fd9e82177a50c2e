#pragma once

#include <vector>

#include "nuosc/flavor.hpp"
#include "nuosc/linalg.hpp"

// Closed-form and diagonalization-based oscillation probabilities, computed
// with plain matrix algebra and no circuit machinery. These are the answers
// the circuit simulations are checked against.
//
// Unit policy throughout: mass-squared splittings in eV^2, baselines in km,
// energies in GeV, electron densities in cm^-3. Hamiltonians carry eV^2/GeV
// entries; the conversion constants live in units.hpp.

namespace nuosc {

// Electron-density and NSI inputs for the matter potential. The potential
// enters the flavor-basis Hamiltonian as (1 + eps_ee) * V in the ee entry,
// with V = matter_potential_per_cm3 * n_e_cm3.
struct MatterParams {
    double n_e_cm3 = 0.0;
    double eps_ee = 0.0;
};

// Coefficient matrices of the energy polynomial added to the vacuum
// Hamiltonian: a3 + c4*E + a5*E^2 + c6*E^3. Each must be Hermitian and match
// the vacuum Hamiltonian's dimension.
struct LvParams {
    CMatrix a3;
    CMatrix c4;
    CMatrix a5;
    CMatrix c6;
};

// Effective two-flavor parameters in constant-density matter. lambda is the
// eigenvalue splitting in the same eV^2/GeV units as dm2/(2E); multiply by 2E
// to recover an equivalent splitting in eV^2.
struct EffectiveParams {
    double theta_m = 0.0;
    double lambda = 0.0;
};

// Result of diagonalize_hermitian: H = u_m^dag * diag(values) * u_m, with
// eigenvalues sorted ascending. Rows of u_m are the eigenstates expressed in
// the input basis.
struct EigenSystem {
    std::vector<double> values;
    CMatrix u_m;
};

// Survival (initial == final) or appearance probability from the standard
// two-flavor formula 1 - sin^2(2 theta) sin^2(osc_coeff dm2 L / E).
double two_flavor_probability(double theta, double dm2, double l_km, double e_gev,
                              FlavorLabel initial, FlavorLabel final);

// Full n-flavor vacuum transition matrix. dm2_list holds the n-1 splittings
// of mass states 2..n against state 1. Entry [a][b] is P(a -> b):
// |sum_i U_{b i} exp(-2i osc_coeff dm2_i L/E) conj(U_{a i})|^2.
std::vector<std::vector<double>> n_flavor_probability(const CMatrix& u,
                                                      const std::vector<double>& dm2_list,
                                                      double l_km, double e_gev);

// Same sum with the interference term between mass states i and j additionally
// scaled by exp(-gamma L) whenever bit 0 of i and j differ. That is exactly the
// coherence loss produced by an ancilla repeatedly entangled with the low
// qubit of the mass register, so this is the reference curve for the
// decoherence circuits.
std::vector<std::vector<double>> damped_n_flavor_probability(const CMatrix& u,
                                                             const std::vector<double>& dm2_list,
                                                             double l_km, double e_gev,
                                                             double gamma_per_km);

// Cyclic Jacobi diagonalization for Hermitian matrices up to dim 4. Rejects
// inputs whose hermiticity defect exceeds 1e-9.
EigenSystem diagonalize_hermitian(const CMatrix& h);

// U diag(0, dm2/2E, ...) U^dag in the flavor basis, eV^2/GeV.
CMatrix build_vacuum_hamiltonian(const CMatrix& u, const std::vector<double>& dm2_list,
                                 double e_gev);

// Vacuum Hamiltonian plus the charged-current matter term in the ee entry,
// scaled by (1 + eps_ee). eps_ee = -1 cancels the matter term exactly.
CMatrix build_matter_hamiltonian(const CMatrix& u, const std::vector<double>& dm2_list,
                                 double e_gev, const MatterParams& matter);

// H_vac + a3 + c4*E + a5*E^2 + c6*E^3.
CMatrix build_lv_hamiltonian(const CMatrix& h_vac, const LvParams& lv, double e_gev);

// Standard constant-density MSW reduction of a two-flavor system:
// theta_m = atan2(D sin 2theta0, D cos 2theta0 - V) / 2 and
// lambda = hypot(D cos 2theta0 - V, D sin 2theta0), with D = dm2/(2E).
// Defined to agree with diagonalize_hermitian on the corresponding 2x2
// Hamiltonian; the vacuum limit returns (theta0, D).
EffectiveParams matter_effective_params(double theta0, double dm2, double e_gev, double n_e_cm3);

// Diagonalize H (flavor basis, eV^2/GeV), advance each eigenstate by
// exp(-i lambda_k ham_phase_coeff L), rotate back; entry [a][b] = P(a -> b).
std::vector<std::vector<double>> probability_from_hamiltonian(const CMatrix& h, double l_km);

}  // namespace nuosc
