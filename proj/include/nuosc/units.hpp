#pragma once

// Unit policy: every public interface takes mass-squared splittings in eV^2,
// baselines in km, energies in GeV, and electron densities in cm^-3. The
// constants below are the only place unit conversion happens.

namespace nuosc {

// Quarter-phase coefficient: osc_coeff * dm2[eV^2] * L[km] / E[GeV] equals
// dm2*L/(4E) in radians. Value from CODATA hbar*c, fixed at 6 significant
// figures so printed phases are reproducible.
inline constexpr double osc_coeff = 1.26693;

// Converts a Hamiltonian eigenvalue in eV^2/GeV times a baseline in km to a
// phase in radians: exp(-i * lambda * ham_phase_coeff * L).
inline constexpr double ham_phase_coeff = 4.0 * osc_coeff;

// Charged-current matter potential sqrt(2)*G_F*N_e expressed in eV^2/GeV per
// electron per cm^3, from CODATA G_F = 1.1663787e-5 GeV^-2 and
// hbar*c = 0.1973269804 GeV fm. Stated to 5 significant figures; the vacuum
// limit and the resonance-location tests are the normative checks, not the
// raw constant.
inline constexpr double matter_potential_per_cm3 = 1.26742e-28;

}  // namespace nuosc
