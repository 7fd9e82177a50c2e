#include "nuosc/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nuosc/rng.hpp"

namespace nuosc {

namespace {

void check_noise(const ReadoutNoise& noise) {
    if (noise.f1 < 0.0 || noise.f2 < 0.0)
        throw std::invalid_argument("flip rates must be >= 0");
    if (noise.f1 + noise.f2 > 1.0)
        throw std::invalid_argument("f1 + f2 must not exceed 1");
}

void check_two_slots(const CountsHistogram& counts, const char* who) {
    if (counts.n_slots != 2)
        throw std::invalid_argument(std::string(who) + " expects a two-slot histogram, got " +
                                    std::to_string(counts.n_slots) + " slot(s)");
}

// Entry of the calibrated noise matrix by outcome pair. The xor of the two
// states says which qubits disagree: bit 1 -> low qubit (f2), bit 2 -> high
// qubit (f1).
double matrix_entry(int row, int col, double f1, double f2) {
    switch (row ^ col) {
        case 0: return (1.0 - f1) * (1.0 - f2) + f1 * f1 + f2 * f2;
        case 1: return (1.0 - f1) * f2 - f2 * f2;
        case 2: return (1.0 - f2) * f1 - f1 * f1;
        default: return f1 * f2;
    }
}

void matrix_entry_grad(int row, int col, double f1, double f2, double& df1, double& df2) {
    switch (row ^ col) {
        case 0:
            df1 = -(1.0 - f2) + 2.0 * f1;
            df2 = -(1.0 - f1) + 2.0 * f2;
            return;
        case 1:
            df1 = -f2;
            df2 = (1.0 - f1) - 2.0 * f2;
            return;
        case 2:
            df1 = (1.0 - f2) - 2.0 * f1;
            df2 = -f1;
            return;
        default:
            df1 = f2;
            df2 = f1;
            return;
    }
}

std::array<double, 16> independent_flip_matrix(double f1, double f2) {
    std::array<double, 16> m{};
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col) {
            const int differ = row ^ col;
            const double p_high = (differ & 2) ? f1 : 1.0 - f1;
            const double p_low = (differ & 1) ? f2 : 1.0 - f2;
            m[static_cast<std::size_t>(row * 4 + col)] = p_high * p_low;
        }
    return m;
}

// Closed-form start for one flip rate from its marginal flip fraction r:
// under the matrix channel the marginal flip probability is f(1-f), inverted
// on the branch f <= 1/2. r is clamped just below the vertex 1/4.
double invert_marginal(double r) {
    const double clamped = std::clamp(r, 0.0, 0.2499);
    return 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * clamped));
}

}  // namespace

ReadoutNoise CalibrationResult::noise() const {
    return ReadoutNoise{std::clamp(f1, 0.0, 0.5), std::clamp(f2, 0.0, 0.5)};
}

MitigationMatrix build_mitigation_matrix(const ReadoutNoise& noise) {
    check_noise(noise);
    MitigationMatrix m;
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col)
            m.m[static_cast<std::size_t>(row * 4 + col)] =
                matrix_entry(row, col, noise.f1, noise.f2);
    return m;
}

CountsHistogram apply_noise_channel(const CountsHistogram& counts, const ReadoutNoise& noise,
                                    std::uint64_t seed, ChannelModel model) {
    check_noise(noise);
    check_two_slots(counts, "apply_noise_channel");

    const std::array<double, 16> m = model == ChannelModel::matrix
                                         ? build_mitigation_matrix(noise).m
                                         : independent_flip_matrix(noise.f1, noise.f2);

    const std::array<std::string, 4> labels = {"00", "01", "10", "11"};
    CountsHistogram out;
    out.n_slots = 2;
    out.total_shots = counts.total_shots;

    std::uint64_t shot = 0;
    for (const auto& [key, count] : counts.counts) {
        std::size_t source = 0;
        for (char c : key) source = source * 2 + (c == '1' ? 1 : 0);
        if (source > 3)
            throw std::invalid_argument("histogram key '" + key + "' is not a two-bit outcome");
        for (std::uint64_t k = 0; k < count; ++k, ++shot) {
            Rng rng(seed + shot);
            const double u = rng.uniform();
            double cumulative = 0.0;
            int drawn = 3;
            for (int row = 0; row < 4; ++row) {
                cumulative += m[static_cast<std::size_t>(row * 4) + source];
                if (u < cumulative) {
                    drawn = row;
                    break;
                }
            }
            ++out.counts[labels[static_cast<std::size_t>(drawn)]];
        }
    }
    return out;
}

CalibrationResult calibrate_from_zero_baseline(const CountsHistogram& counts,
                                               FlavorLabel prepared) {
    check_two_slots(counts, "calibrate_from_zero_baseline");
    if (counts.total_shots < 100)
        throw std::invalid_argument("calibration needs at least 100 shots, got " +
                                    std::to_string(counts.total_shots));

    const std::vector<double> obs = to_probabilities(counts);
    const int prep = flavor_index(prepared);

    // Marginal flip fractions of each qubit give the starting point.
    double r_high = 0.0, r_low = 0.0;
    for (int j = 0; j < 4; ++j) {
        if ((j ^ prep) & 2) r_high += obs[static_cast<std::size_t>(j)];
        if ((j ^ prep) & 1) r_low += obs[static_cast<std::size_t>(j)];
    }
    double f1 = invert_marginal(r_high);
    double f2 = invert_marginal(r_low);

    // Gauss-Newton on all four bins against the prepared state's M column.
    for (int iter = 0; iter < 50; ++iter) {
        double jtj[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        double jtr[2] = {0.0, 0.0};
        for (int j = 0; j < 4; ++j) {
            const double resid = obs[static_cast<std::size_t>(j)] - matrix_entry(j, prep, f1, f2);
            double d1, d2;
            matrix_entry_grad(j, prep, f1, f2, d1, d2);
            jtj[0][0] += d1 * d1;
            jtj[0][1] += d1 * d2;
            jtj[1][1] += d2 * d2;
            jtr[0] += d1 * resid;
            jtr[1] += d2 * resid;
        }
        jtj[1][0] = jtj[0][1];
        const double det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if (std::abs(det) < 1e-14) break;
        const double step1 = (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        const double step2 = (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        f1 += step1;
        f2 += step2;
        if (std::abs(step1) < 1e-12 && std::abs(step2) < 1e-12) break;
    }

    CalibrationResult result;
    result.f1 = f1;
    result.f2 = f2;
    result.n_shots = counts.total_shots;
    result.non_physical = f1 < 0.0 || f1 > 0.5 || f2 < 0.0 || f2 > 0.5;

    // Sandwich covariance: multinomial noise on the observed frequencies
    // propagated through the least-squares solution.
    double jac[4][2];
    std::vector<double> fitted(4);
    for (int j = 0; j < 4; ++j) {
        matrix_entry_grad(j, prep, f1, f2, jac[j][0], jac[j][1]);
        fitted[static_cast<std::size_t>(j)] = matrix_entry(j, prep, f1, f2);
    }
    double jtj[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int j = 0; j < 4; ++j) {
        jtj[0][0] += jac[j][0] * jac[j][0];
        jtj[0][1] += jac[j][0] * jac[j][1];
        jtj[1][1] += jac[j][1] * jac[j][1];
    }
    jtj[1][0] = jtj[0][1];
    const double det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    if (std::abs(det) > 1e-14) {
        const double inv[2][2] = {{jtj[1][1] / det, -jtj[0][1] / det},
                                  {-jtj[1][0] / det, jtj[0][0] / det}};
        // B = (J^T J)^-1 J^T, covariance = B Sigma B^T with
        // Sigma = (diag(p) - p p^T) / N.
        double b[2][4];
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 4; ++j)
                b[k][j] = inv[k][0] * jac[j][0] + inv[k][1] * jac[j][1];
        const double n = static_cast<double>(counts.total_shots);
        double var[2] = {0.0, 0.0};
        for (int k = 0; k < 2; ++k) {
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const double sigma =
                        ((i == j ? fitted[static_cast<std::size_t>(i)] : 0.0) -
                         fitted[static_cast<std::size_t>(i)] * fitted[static_cast<std::size_t>(j)]) /
                        n;
                    var[k] += b[k][i] * sigma * b[k][j];
                }
        }
        result.f1_err = std::sqrt(std::max(0.0, var[0]));
        result.f2_err = std::sqrt(std::max(0.0, var[1]));
    }
    return result;
}

MitigationOutcome mitigate(const CountsHistogram& counts, const MitigationMatrix& m) {
    check_two_slots(counts, "mitigate");
    const std::vector<double> observed = to_probabilities(counts);

    // Gaussian elimination with partial pivoting on [M | observed].
    double aug[4][5];
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) aug[r][c] = m.m[static_cast<std::size_t>(r * 4 + c)];
        aug[r][4] = observed[static_cast<std::size_t>(r)];
    }
    double det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        if (pivot != col) {
            for (int k = 0; k < 5; ++k) std::swap(aug[col][k], aug[pivot][k]);
            det = -det;
        }
        det *= aug[col][col];
        if (aug[col][col] == 0.0) break;
        for (int r = col + 1; r < 4; ++r) {
            const double factor = aug[r][col] / aug[col][col];
            for (int k = col; k < 5; ++k) aug[r][k] -= factor * aug[col][k];
        }
    }
    if (std::abs(det) < 1e-10)
        throw std::invalid_argument("mitigation matrix is singular (|det| = " +
                                    std::to_string(std::abs(det)) + ")");

    MitigationOutcome out;
    for (int r = 3; r >= 0; --r) {
        double value = aug[r][4];
        for (int c = r + 1; c < 4; ++c) value -= aug[r][c] * out.raw[static_cast<std::size_t>(c)];
        out.raw[static_cast<std::size_t>(r)] = value / aug[r][r];
    }

    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double clamped = std::clamp(out.raw[static_cast<std::size_t>(k)], 0.0, 1.0);
        if (clamped != out.raw[static_cast<std::size_t>(k)]) out.clamped = true;
        out.p[static_cast<std::size_t>(k)] = clamped;
        sum += clamped;
    }
    if (sum > 0.0)
        for (auto& value : out.p) value /= sum;
    return out;
}

}  // namespace nuosc
