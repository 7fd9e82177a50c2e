#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>

#include "nuosc/pmns_fit.hpp"
#include "nuosc/rng.hpp"

using nuosc::CMatrix;
using nuosc::FitOptions;
using nuosc::GateTemplateParams;
using nuosc::Rng;
using nuosc::TargetUnitary;

namespace {

const double pi = std::acos(-1.0);

GateTemplateParams random_params(Rng& rng) {
    GateTemplateParams p;
    for (double& a : p.angles) a = pi * (1.0 - 2.0 * rng.uniform());
    return p;
}

double max_abs_diff(const std::array<double, 16>& a, const std::array<double, 16>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < 16; ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_CASE("angle canonicalization lands in (-2pi, 2pi]") {
    CHECK(std::abs(nuosc::canonicalize_angle(3.0 * pi) - (-pi)) < 1e-15);
    CHECK(std::abs(nuosc::canonicalize_angle(-3.0 * pi) - pi) < 1e-15);
    CHECK(std::abs(nuosc::canonicalize_angle(0.5) - 0.5) == 0.0);
    CHECK(nuosc::canonicalize_angle(-2.0 * pi) > 0.0);
    CHECK(std::abs(nuosc::canonicalize_angle(-2.0 * pi) - 2.0 * pi) < 1e-15);
    CHECK(std::abs(nuosc::canonicalize_angle(9.0 * pi) - pi) < 1e-12);
    // Canonicalization never changes the template's value.
    Rng rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        GateTemplateParams p = random_params(rng);
        GateTemplateParams shifted = p;
        shifted.angles[trial % 6] += 4.0 * pi * (1 + trial % 3);
        CHECK(max_abs_diff(nuosc::evaluate_template(nuosc::canonicalize(shifted)),
                           nuosc::evaluate_template(p)) < 1e-12);
    }
}

TEST_CASE("zero angles evaluate to the identity") {
    const std::array<double, 16> m = nuosc::evaluate_template(GateTemplateParams{});
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(m[static_cast<std::size_t>(r * 4 + c)] == (r == c ? 1.0 : 0.0));
}

TEST_CASE("the template is orthogonal and 4pi periodic with a 2pi sign flip") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const GateTemplateParams p = random_params(rng);
        const std::array<double, 16> m = nuosc::evaluate_template(p);
        // M M^T = I
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                double dot = 0.0;
                for (int k = 0; k < 4; ++k)
                    dot += m[static_cast<std::size_t>(r * 4 + k)] * m[static_cast<std::size_t>(c * 4 + k)];
                CHECK(std::abs(dot - (r == c ? 1.0 : 0.0)) < 1e-13);
            }

        GateTemplateParams shifted = p;
        shifted.angles[0] += 2.0 * pi;
        const std::array<double, 16> flipped = nuosc::evaluate_template(shifted);
        double err = 0.0;
        for (std::size_t k = 0; k < 16; ++k)
            err = std::max(err, std::abs(flipped[k] + m[k]));
        CHECK(err < 1e-12);
    }
}

TEST_CASE("inverted parameters evaluate to the transpose") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const GateTemplateParams p = random_params(rng);
        const std::array<double, 16> m = nuosc::evaluate_template(p);
        const std::array<double, 16> inv = nuosc::evaluate_template(nuosc::invert_params(p));
        double err = 0.0;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                err = std::max(err, std::abs(inv[static_cast<std::size_t>(r * 4 + c)] -
                                             m[static_cast<std::size_t>(c * 4 + r)]));
        CHECK(err < 1e-14);
    }
}

TEST_CASE("residual is zero against the template's own value") {
    Rng rng(4);
    const GateTemplateParams p = random_params(rng);
    TargetUnitary target;
    target.m = nuosc::evaluate_template(p);
    CHECK(nuosc::residual(p, target) < 1e-28);
}

TEST_CASE("residual of the identity against the reference matrix is pinned") {
    // Regression anchor: the objective's value at the zero start. A change
    // here means either the template or the bundled matrix moved.
    const double r = nuosc::residual(GateTemplateParams{}, nuosc::reference_mixing_matrix());
    CHECK(std::abs(r - 1.9017938603159998) < 1e-12);
}

TEST_CASE("a wildly non-orthogonal target is rejected") {
    TargetUnitary target;
    target.m.fill(0.5);
    CHECK_THROWS_AS(nuosc::fit(target), std::invalid_argument);
}

TEST_CASE("fit recovers randomly generated templates") {
    Rng rng(5);
    for (int trial = 0; trial < 2; ++trial) {
        const GateTemplateParams p = random_params(rng);
        TargetUnitary target;
        target.m = nuosc::evaluate_template(p);
        const nuosc::FitResult result = nuosc::fit(target);
        CHECK(result.converged);
        CHECK(result.max_elem_error < 1e-6);
        CHECK(max_abs_diff(nuosc::evaluate_template(result.params), target.m) < 1e-6);
    }
}

TEST_CASE("fit refinement from a known solution stays in its basin") {
    Rng rng(6);
    const GateTemplateParams p = random_params(rng);
    TargetUnitary target;
    target.m = nuosc::evaluate_template(p);
    FitOptions options;
    options.seed_params = p;
    const nuosc::FitResult result = nuosc::fit(target, options);
    CHECK(result.converged);
    CHECK(result.residual < 1e-20);
    CHECK(max_abs_diff(nuosc::evaluate_template(result.params), target.m) < 1e-9);
}

TEST_CASE("fit from the bundled reference angles converges on the bundled matrix") {
    FitOptions options;
    options.seed_params = nuosc::reference_mixing_angles();
    const nuosc::FitResult result = nuosc::fit(nuosc::reference_mixing_matrix(), options);
    CHECK(result.converged);
    CHECK(result.max_elem_error < 1e-6);
}

TEST_CASE("cp extension with zero phases reproduces the real template") {
    Rng rng(7);
    const GateTemplateParams p = random_params(rng);
    nuosc::CpTemplateParams cp;
    std::copy(p.angles.begin(), p.angles.end(), cp.angles.begin());
    cp.angles[6] = 0.0;
    cp.angles[7] = 0.0;
    const CMatrix m = nuosc::evaluate_cp_template(cp);
    const std::array<double, 16> real_m = nuosc::evaluate_template(p);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            CHECK(m.at(r, c).imag() == 0.0);
            CHECK(m.at(r, c).real() == real_m[static_cast<std::size_t>(r * 4 + c)]);
        }
    CHECK(m.unitarity_defect() < 1e-13);
}

TEST_CASE("cp extension applies its phases to the high-qubit rows") {
    nuosc::CpTemplateParams cp{};
    cp.angles[6] = 0.4;
    cp.angles[7] = -0.9;
    const CMatrix m = nuosc::evaluate_cp_template(cp);
    // On the identity template the phases sit directly on the diagonal.
    CHECK(std::abs(m.at(0, 0) - nuosc::cxd(1.0)) < 1e-15);
    CHECK(std::abs(m.at(1, 1) - nuosc::cxd(1.0)) < 1e-15);
    CHECK(std::abs(m.at(2, 2) - std::polar(1.0, 0.4)) < 1e-15);
    CHECK(std::abs(m.at(3, 3) - std::polar(1.0, 0.4 - 0.9)) < 1e-15);
    CHECK(m.unitarity_defect() < 1e-13);
}

TEST_CASE("cp fit recovers a complex target when seeded near the real part") {
    Rng rng(8);
    const GateTemplateParams base = random_params(rng);
    nuosc::CpTemplateParams truth;
    std::copy(base.angles.begin(), base.angles.end(), truth.angles.begin());
    truth.angles[6] = 0.3;
    truth.angles[7] = -0.2;
    const CMatrix target = nuosc::evaluate_cp_template(truth);
    FitOptions options;
    options.seed_params = base;
    const nuosc::CpFitResult result = nuosc::fit_cp(target, options);
    CHECK(result.converged);
    CHECK(result.max_elem_error < 1e-6);
}
