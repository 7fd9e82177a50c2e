#pragma once

#include <array>
#include <cstdint>

#include "nuosc/circuit.hpp"
#include "nuosc/flavor.hpp"

// Readout-noise model over the two-qubit flavor register and its statistical
// correction. The noise is defined by a 4x4 stochastic matrix M built from two
// per-qubit flip rates; observed = M * true. Calibration recovers the rates
// from a known-state run, mitigation applies M^-1 to measured frequencies.

namespace nuosc {

// Flip rates for the high qubit (f1) and low qubit (f2). Valid when both are
// non-negative and f1 + f2 <= 1, which keeps every entry of M non-negative.
struct ReadoutNoise {
    double f1 = 0.0;
    double f2 = 0.0;
};

// Row-major 4x4 over outcome order (00, 01, 10, 11). Symmetric with unit row
// sums by construction.
struct MitigationMatrix {
    std::array<double, 16> m{};
};

// How apply_noise_channel resamples outcomes. `matrix` draws from the columns
// of the calibrated M form, which carries extra f^2 diagonal weight and is
// what calibration and mitigation assume. `independent_flips` is the plain
// per-qubit confusion model, kept for sensitivity studies; it is NOT the
// inverse of build_mitigation_matrix's M.
enum class ChannelModel { matrix, independent_flips };

// Diagonal (1-f1)(1-f2)+f1^2+f2^2, single-flip entries (1-f1)f2-f2^2 and
// (1-f2)f1-f1^2, double-flip entries f1 f2. Throws when the rates are
// negative or f1+f2 > 1.
MitigationMatrix build_mitigation_matrix(const ReadoutNoise& noise);

// Per-shot resampling: a shot observed in state i is redrawn from column i of
// the channel matrix. Shots are enumerated in key order with stream Rng(seed +
// shot index), so the result is independent of histogram layout. Requires a
// two-slot histogram.
CountsHistogram apply_noise_channel(const CountsHistogram& counts, const ReadoutNoise& noise,
                                    std::uint64_t seed, ChannelModel model = ChannelModel::matrix);

// Flip-rate estimates from a zero-baseline run with a known prepared state.
// f1/f2 are the raw least-squares estimates; noise() clamps them into [0, 0.5]
// for direct use in build_mitigation_matrix.
struct CalibrationResult {
    double f1 = 0.0;
    double f2 = 0.0;
    double f1_err = 0.0;
    double f2_err = 0.0;
    std::uint64_t n_shots = 0;
    bool non_physical = false;  // an estimate fell outside [0, 0.5]

    ReadoutNoise noise() const;
};

// Two-parameter least-squares fit of the observed 4-outcome frequencies
// against the M column of the prepared state: closed-form start from the
// per-qubit marginal flip rates, then Gauss-Newton refinement. Standard
// errors come from the multinomial sampling covariance propagated through the
// fit. Requires at least 100 shots.
CalibrationResult calibrate_from_zero_baseline(const CountsHistogram& counts,
                                               FlavorLabel prepared);

// Mitigated probabilities plus the unclamped solve for transparency. clamped
// reports whether any raw entry fell outside [0, 1] before renormalization.
struct MitigationOutcome {
    std::array<double, 4> p{};
    std::array<double, 4> raw{};
    bool clamped = false;
};

// Solves M x = observed frequencies, clamps x into [0, 1], renormalizes to
// unit sum. Throws when |det M| < 1e-10.
MitigationOutcome mitigate(const CountsHistogram& counts, const MitigationMatrix& m);

}  // namespace nuosc
