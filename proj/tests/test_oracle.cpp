#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nuosc/linalg.hpp"
#include "nuosc/oracle.hpp"
#include "nuosc/rng.hpp"
#include "nuosc/units.hpp"

using nuosc::CMatrix;
using nuosc::cxd;
using nuosc::Rng;

namespace {

const double pi = std::acos(-1.0);

CMatrix rotation_2x2(double theta) {
    CMatrix u(2);
    u.at(0, 0) = std::cos(theta);
    u.at(0, 1) = std::sin(theta);
    u.at(1, 0) = -std::sin(theta);
    u.at(1, 1) = std::cos(theta);
    return u;
}

// Random real orthogonal 4x4 from composed Givens rotations.
CMatrix random_orthogonal_4(Rng& rng) {
    CMatrix u(4);
    for (int i = 0; i < 4; ++i) u.at(i, i) = 1.0;
    for (int p = 0; p < 4; ++p)
        for (int q = p + 1; q < 4; ++q) {
            const double a = 2.0 * pi * rng.uniform();
            const double c = std::cos(a), s = std::sin(a);
            for (int k = 0; k < 4; ++k) {
                const cxd up = u.at(p, k), uq = u.at(q, k);
                u.at(p, k) = c * up - s * uq;
                u.at(q, k) = s * up + c * uq;
            }
        }
    return u;
}

CMatrix random_hermitian(Rng& rng, int dim) {
    CMatrix h(dim);
    for (int r = 0; r < dim; ++r) {
        h.at(r, r) = 2.0 * (rng.uniform() - 0.5);
        for (int c = r + 1; c < dim; ++c) {
            const cxd v(rng.uniform() - 0.5, rng.uniform() - 0.5);
            h.at(r, c) = v;
            h.at(c, r) = std::conj(v);
        }
    }
    return h;
}

}  // namespace

TEST_CASE("two-flavor survival follows the standard interference formula") {
    const double theta = 0.5836, dm2 = 7.5e-5, l = 180.0, e = 0.004;
    const double arg = nuosc::osc_coeff * dm2 * l / e;
    const double expected = 1.0 - std::pow(std::sin(2.0 * theta) * std::sin(arg), 2);
    CHECK(std::abs(nuosc::two_flavor_probability(theta, dm2, l, e, nuosc::FlavorLabel::e,
                                                 nuosc::FlavorLabel::e) -
                   expected) < 1e-15);
    CHECK(std::abs(nuosc::two_flavor_probability(theta, dm2, l, e, nuosc::FlavorLabel::e,
                                                 nuosc::FlavorLabel::mu) -
                   (1.0 - expected)) < 1e-15);
    // mu -> mu survival equals e -> e for a real 2x2 mixing matrix.
    CHECK(std::abs(nuosc::two_flavor_probability(theta, dm2, l, e, nuosc::FlavorLabel::mu,
                                                 nuosc::FlavorLabel::mu) -
                   expected) < 1e-15);
}

TEST_CASE("n-flavor probability reduces to the two-flavor formula") {
    Rng rng(100);
    for (int trial = 0; trial < 50; ++trial) {
        const double theta = pi * (rng.uniform() - 0.5);
        const double dm2 = 0.01 * rng.uniform();
        const double l = 1000.0 * rng.uniform();
        const double e = 0.1 + rng.uniform();
        const auto p = nuosc::n_flavor_probability(rotation_2x2(theta), {dm2}, l, e);
        CHECK(std::abs(p[0][0] - nuosc::two_flavor_probability(theta, dm2, l, e,
                                                               nuosc::FlavorLabel::e,
                                                               nuosc::FlavorLabel::e)) < 1e-12);
        CHECK(std::abs(p[1][0] - nuosc::two_flavor_probability(theta, dm2, l, e,
                                                               nuosc::FlavorLabel::mu,
                                                               nuosc::FlavorLabel::e)) < 1e-12);
    }
}

TEST_CASE("n-flavor probabilities are doubly stochastic and start at identity") {
    Rng rng(200);
    const CMatrix u = random_orthogonal_4(rng);
    const std::vector<double> dm2 = {7.5e-5, 2.5e-3, 0.1};

    const auto at_zero = nuosc::n_flavor_probability(u, dm2, 0.0, 1.0);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(std::abs(at_zero[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] -
                           (a == b ? 1.0 : 0.0)) < 1e-12);

    const auto p = nuosc::n_flavor_probability(u, dm2, 321.0, 0.7);
    for (int a = 0; a < 4; ++a) {
        double row = 0.0, col = 0.0;
        for (int b = 0; b < 4; ++b) {
            row += p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            col += p[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
            CHECK(p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] >= 0.0);
        }
        CHECK(std::abs(row - 1.0) < 1e-12);
        CHECK(std::abs(col - 1.0) < 1e-12);
    }
}

TEST_CASE("n-flavor probability rejects a non-unitary mixing matrix") {
    CMatrix bad(2);
    bad.at(0, 0) = 0.9;
    bad.at(0, 1) = 0.9;
    bad.at(1, 0) = 0.1;
    bad.at(1, 1) = 0.1;
    CHECK_THROWS_AS(nuosc::n_flavor_probability(bad, {1e-3}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("damping interpolates between coherent and fully decohered") {
    Rng rng(300);
    const CMatrix u = random_orthogonal_4(rng);
    const std::vector<double> dm2 = {7.5e-5, 2.5e-3, 2.575e-3};
    const double l = 500.0, e = 1.0;

    const auto coherent = nuosc::n_flavor_probability(u, dm2, l, e);
    const auto undamped = nuosc::damped_n_flavor_probability(u, dm2, l, e, 0.0);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(std::abs(coherent[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] -
                           undamped[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) <
                  1e-15);

    // At gamma L >> 1 the mass-bit-differing interference terms vanish; what
    // survives is the classical mixture plus the bit-0-conserving cross
    // terms, computed here directly.
    const auto damped = nuosc::damped_n_flavor_probability(u, dm2, l, e, 0.1);
    const std::array<double, 4> phases = {0.0, nuosc::osc_coeff * 2.0 * dm2[0] * l / e,
                                          nuosc::osc_coeff * 2.0 * dm2[1] * l / e,
                                          nuosc::osc_coeff * 2.0 * dm2[2] * l / e};
    for (int a = 0; a < 4; ++a) {
        double rowsum = 0.0;
        for (int b = 0; b < 4; ++b) {
            double want = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    if ((i ^ j) & 1) continue;
                    const cxd term = u.at(b, i) * std::conj(u.at(a, i)) *
                                     std::conj(u.at(b, j)) * u.at(a, j) *
                                     std::polar(1.0, phases[static_cast<std::size_t>(j)] -
                                                         phases[static_cast<std::size_t>(i)]);
                    want += term.real();
                }
            CHECK(std::abs(damped[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] - want) <
                  1e-12);
            rowsum += damped[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
        CHECK(std::abs(rowsum - 1.0) < 1e-12);
    }
}

TEST_CASE("jacobi diagonalization reconstructs random hermitian matrices") {
    Rng rng(400);
    for (int dim = 2; dim <= 4; ++dim) {
        for (int trial = 0; trial < 20; ++trial) {
            const CMatrix h = random_hermitian(rng, dim);
            const nuosc::EigenSystem eig = nuosc::diagonalize_hermitian(h);
            REQUIRE(static_cast<int>(eig.values.size()) == dim);
            for (int k = 0; k + 1 < dim; ++k) CHECK(eig.values[static_cast<std::size_t>(k)] <= eig.values[static_cast<std::size_t>(k + 1)]);
            CHECK(eig.u_m.unitarity_defect() < 1e-12);
            // H = U^dagger diag U
            CMatrix d(dim);
            for (int k = 0; k < dim; ++k) d.at(k, k) = eig.values[static_cast<std::size_t>(k)];
            const CMatrix rebuilt = eig.u_m.dagger() * d * eig.u_m;
            double max_err = 0.0;
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c)
                    max_err = std::max(max_err, std::abs(rebuilt.at(r, c) - h.at(r, c)));
            CHECK(max_err < 1e-12);
        }
    }
    CHECK_THROWS_AS(nuosc::diagonalize_hermitian(random_hermitian(rng, 5)), std::invalid_argument);
}

TEST_CASE("hamiltonian propagation agrees with the interference oracle") {
    Rng rng(500);
    const double e = 0.8;
    SUBCASE("two flavors") {
        const double theta = 0.61;
        const double dm2 = 2.4e-3;
        const CMatrix h = nuosc::build_vacuum_hamiltonian(rotation_2x2(theta), {dm2}, e);
        for (double l : {0.0, 100.0, 350.0, 801.5}) {
            const auto from_h = nuosc::probability_from_hamiltonian(h, l);
            const auto direct = nuosc::n_flavor_probability(rotation_2x2(theta), {dm2}, l, e);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    CHECK(std::abs(from_h[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] -
                                   direct[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) <
                          1e-12);
        }
    }
    SUBCASE("four flavors") {
        const CMatrix u = random_orthogonal_4(rng);
        const std::vector<double> dm2 = {7.5e-5, 2.5e-3, 0.08};
        const CMatrix h = nuosc::build_vacuum_hamiltonian(u, dm2, e);
        const auto from_h = nuosc::probability_from_hamiltonian(h, 420.0);
        const auto direct = nuosc::n_flavor_probability(u, dm2, 420.0, e);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(std::abs(from_h[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] -
                               direct[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) <
                      1e-11);
    }
}

TEST_CASE("two-level hamiltonian survival matches the analytic rotation formula") {
    Rng rng(600);
    for (int trial = 0; trial < 30; ++trial) {
        CMatrix h(2);
        const double a = rng.uniform() - 0.5;
        const double b = rng.uniform() - 0.5;
        const double d = rng.uniform() - 0.5;
        h.at(0, 0) = a;
        h.at(0, 1) = b;
        h.at(1, 0) = b;
        h.at(1, 1) = d;
        const double l = 50.0 * rng.uniform();
        const double lambda = std::hypot(a - d, 2.0 * b);
        const double s2 = lambda == 0.0 ? 0.0 : std::pow(2.0 * b / lambda, 2);
        const double expected =
            1.0 - s2 * std::pow(std::sin(lambda * nuosc::ham_phase_coeff * l / 2.0), 2);
        const auto p = nuosc::probability_from_hamiltonian(h, l);
        CHECK(std::abs(p[0][0] - expected) < 1e-11);
        CHECK(std::abs(p[0][0] + p[0][1] - 1.0) < 1e-12);
    }
}

TEST_CASE("matter potential shifts the ee entry by the tabulated coefficient") {
    const double theta = 0.5836, dm2 = 7.5e-5, e = 0.005, n_e = 1.0e25;
    const CMatrix vac = nuosc::build_vacuum_hamiltonian(rotation_2x2(theta), {dm2}, e);
    const CMatrix mat = nuosc::build_matter_hamiltonian(rotation_2x2(theta), {dm2}, e, {n_e, 0.0});
    CHECK(std::abs(mat.at(0, 0) - vac.at(0, 0) - cxd(nuosc::matter_potential_per_cm3 * n_e)) <
          1e-18);
    CHECK(std::abs(mat.at(0, 1) - vac.at(0, 1)) == 0.0);
    CHECK(std::abs(mat.at(1, 1) - vac.at(1, 1)) == 0.0);
}

TEST_CASE("effective matter parameters have the right limits") {
    const double theta = 0.5836, dm2 = 7.5e-5, e = 0.005;
    const double delta = dm2 / (2.0 * e);

    const nuosc::EffectiveParams vacuum_limit =
        nuosc::matter_effective_params(theta, dm2, e, 0.0);
    CHECK(std::abs(vacuum_limit.theta_m - theta) < 1e-12);
    CHECK(std::abs(vacuum_limit.lambda - delta) < 1e-15);

    // Dense limit: the potential dominates and the effective mixing angle
    // saturates at pi/2.
    const nuosc::EffectiveParams dense =
        nuosc::matter_effective_params(theta, dm2, e, 1.0e32);
    CHECK(std::abs(dense.theta_m - pi / 2.0) < 1e-3);

    // The effective-parameter survival probability equals the full
    // Hamiltonian propagation.
    const double n_e = 2.0e25, l = 1000.0;
    const nuosc::EffectiveParams ep = nuosc::matter_effective_params(theta, dm2, e, n_e);
    const CMatrix h = nuosc::build_matter_hamiltonian(rotation_2x2(theta), {dm2}, e, {n_e, 0.0});
    const double via_eff = nuosc::two_flavor_probability(ep.theta_m, ep.lambda * 2.0 * e, l, e,
                                                         nuosc::FlavorLabel::e,
                                                         nuosc::FlavorLabel::e);
    CHECK(std::abs(nuosc::probability_from_hamiltonian(h, l)[0][0] - via_eff) < 1e-11);
}

TEST_CASE("lv hamiltonian assembles the energy polynomial") {
    const double theta = 0.61, dm2 = 2.4e-3, e = 2.0;
    const CMatrix vac = nuosc::build_vacuum_hamiltonian(rotation_2x2(theta), {dm2}, e);

    nuosc::LvParams lv;
    lv.a3 = CMatrix(2);
    lv.a3.at(0, 0) = 1e-4;
    lv.c4 = CMatrix(2);
    lv.c4.at(0, 1) = 2e-5;
    lv.c4.at(1, 0) = 2e-5;
    lv.a5 = CMatrix(2);
    lv.a5.at(1, 1) = -3e-6;
    lv.c6 = CMatrix(2);
    lv.c6.at(0, 0) = 4e-7;

    const CMatrix h = nuosc::build_lv_hamiltonian(vac, lv, e);
    CHECK(std::abs(h.at(0, 0) - (vac.at(0, 0) + 1e-4 + 4e-7 * e * e * e)) < 1e-18);
    CHECK(std::abs(h.at(0, 1) - (vac.at(0, 1) + 2e-5 * e)) < 1e-18);
    CHECK(std::abs(h.at(1, 1) - (vac.at(1, 1) - 3e-6 * e * e)) < 1e-18);

    // Defaulted (dimension 0) term blocks drop out entirely.
    nuosc::LvParams empty;
    const CMatrix same = nuosc::build_lv_hamiltonian(vac, empty, e);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(same.at(r, c) == vac.at(r, c));

    // A non-hermitian coefficient matrix is rejected.
    nuosc::LvParams bad;
    bad.a3 = CMatrix(2);
    bad.a3.at(0, 1) = 1e-3;
    CHECK_THROWS_AS(nuosc::build_lv_hamiltonian(vac, bad, e), std::invalid_argument);
}
