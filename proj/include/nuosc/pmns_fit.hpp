#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "nuosc/linalg.hpp"

// Fitting machinery for the two-entangler gate template that realizes a real
// 4x4 mixing matrix on two qubits. The template is three layers of per-qubit
// real rotations separated by two fixed entangling blocks; six angles in
// total. fit() recovers angles for a given orthogonal target by multi-start
// gradient descent.

namespace nuosc {

// The six rotation angles (alpha, beta, gamma, delta, epsilon, zeta) in
// radians, one pair per layer: even indices rotate the high qubit, odd indices
// the low qubit. Half-angle rotations make the template 4pi-periodic per
// angle, so canonical form keeps angles in (-2pi, 2pi].
struct GateTemplateParams {
    std::array<double, 6> angles{};
};

// Real 4x4 target for the fit, row-major. Accepted when the orthogonality
// defect max|M^T M - I| stays below 1e-4, loose enough to admit matrices
// quoted to a few decimals.
struct TargetUnitary {
    std::array<double, 16> m{};
};

struct FitResult {
    GateTemplateParams params;
    double residual = 0.0;        // sum of squared elementwise differences
    double max_elem_error = 0.0;  // max |template - target| over entries
    int iterations = 0;           // gradient steps spent on the returned basin
    bool converged = false;       // max_elem_error < 1e-6
};

struct FitOptions {
    int n_restarts = 32;
    std::uint64_t seed = 0;
    int max_iterations = 2000;
    // When set, optimization starts from these angles only (no restarts);
    // used to refine a known solution in its own basin.
    std::optional<GateTemplateParams> seed_params;
};

// Wraps each angle into (-2pi, 2pi], the period of the half-angle rotations.
// Wrapping by 2pi instead would flip the sign of the whole matrix.
double canonicalize_angle(double angle);
GateTemplateParams canonicalize(const GateTemplateParams& params);

// Computational-basis matrix of the template, row-major. Always orthogonal.
std::array<double, 16> evaluate_template(const GateTemplateParams& params);

// Sum over entries of (template - target)^2.
double residual(const GateTemplateParams& params, const TargetUnitary& target);

// Angles whose template evaluates to the exact transpose (= inverse) of the
// original: reverse the layer order and negate every angle. The entangling
// block is symmetric, so no other change is needed.
GateTemplateParams invert_params(const GateTemplateParams& params);

// Multi-start gradient descent with backtracking line search and central
// difference gradients (step 1e-7). Restarts draw angles uniformly from
// (-pi, pi] using options.seed; the first restart that converges is refined
// to its floor and returned. A fit that never converges still returns the best
// basin found, with converged = false. Throws on a non-orthogonal target.
FitResult fit(const TargetUnitary& target, const FitOptions& options = {});

// Bundled reference values: the real mixing matrix this library reproduces
// (embedded as the upper 3x3 block of a 4x4 identity-extended matrix) and the
// rounded best-fit angles that go with it.
TargetUnitary reference_mixing_matrix();
GateTemplateParams reference_mixing_angles();

// Optional complex extension: the six real angles dressed with a phase on the
// high qubit (angle 7) and a controlled phase between the qubits (angle 8),
// appended after the real template. Setting the two extra angles to zero
// recovers the real template exactly. The extension shares the fit machinery
// but has no reference values to validate against, so nothing downstream
// depends on it.
struct CpTemplateParams {
    std::array<double, 8> angles{};
};

struct CpFitResult {
    CpTemplateParams params;
    double residual = 0.0;
    double max_elem_error = 0.0;
    int iterations = 0;
    bool converged = false;
};

CMatrix evaluate_cp_template(const CpTemplateParams& params);
CpFitResult fit_cp(const CMatrix& target, const FitOptions& options = {});

}  // namespace nuosc
