#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>

#include "nuosc/density_matrix.hpp"
#include "nuosc/flavor_circuits.hpp"
#include "nuosc/oracle.hpp"
#include "nuosc/rng.hpp"
#include "nuosc/units.hpp"

using nuosc::Circuit;
using nuosc::CMatrix;
using nuosc::cxd;
using nuosc::FlavorLabel;
using nuosc::GateOp;
using nuosc::GateTemplateParams;
using nuosc::Rng;
using nuosc::StateVector;

namespace {

const double pi = std::acos(-1.0);

Circuit without_measures(const Circuit& circuit, int slot_cutoff = -1) {
    Circuit out = circuit;
    out.ops.clear();
    for (const GateOp& op : circuit.ops) {
        if (op.kind == nuosc::GateKind::measure && (slot_cutoff < 0 || op.slot < slot_cutoff))
            continue;
        out.ops.push_back(op);
    }
    return out;
}

GateTemplateParams random_params(Rng& rng) {
    GateTemplateParams p;
    for (double& a : p.angles) a = pi * (1.0 - 2.0 * rng.uniform());
    return p;
}

CMatrix template_cmatrix(const GateTemplateParams& p) {
    const std::array<double, 16> m = nuosc::evaluate_template(p);
    CMatrix u(4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) u.at(r, c) = m[static_cast<std::size_t>(r * 4 + c)];
    return u;
}

std::array<double, 4> exact_two_qubit_probs(const Circuit& circuit) {
    const StateVector s =
        nuosc::run_statevector(without_measures(circuit), nuosc::make_basis_state(2, 0));
    return {nuosc::probability(s, 0), nuosc::probability(s, 1), nuosc::probability(s, 2),
            nuosc::probability(s, 3)};
}

}  // namespace

TEST_CASE("accumulated phase is linear in dm2 and baseline over energy") {
    CHECK(std::abs(nuosc::phase_of(2.5e-3, 500.0, 1.0) - 3.167325) < 1e-9);
    CHECK(std::abs(nuosc::phase_of(7.5e-5, 180.0, 0.004) -
                   2.0 * nuosc::osc_coeff * 7.5e-5 * 180.0 / 0.004) < 1e-12);
    CHECK(nuosc::phase_of(1.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("two-flavor circuit reproduces the survival formula in both bases") {
    Rng rng(10);
    for (int trial = 0; trial < 25; ++trial) {
        nuosc::TwoFlavorParams p;
        p.theta = pi * (rng.uniform() - 0.5);
        p.dm2 = 0.01 * rng.uniform();
        p.e_gev = 0.2 + rng.uniform();
        p.l_km = 1500.0 * rng.uniform();
        const double phase = nuosc::phase_of(p.dm2, p.l_km, p.e_gev);
        const double survival =
            1.0 - std::pow(std::sin(2.0 * p.theta) * std::sin(phase / 2.0), 2);

        const Circuit flavor = without_measures(nuosc::build_two_flavor_circuit(p, FlavorLabel::e));
        const StateVector fs = nuosc::run_statevector(flavor, nuosc::make_basis_state(1, 0));
        CHECK(std::abs(nuosc::probability(fs, 0) - survival) < 1e-12);

        const Circuit mu_c = without_measures(nuosc::build_two_flavor_circuit(p, FlavorLabel::mu));
        const StateVector ms = nuosc::run_statevector(mu_c, nuosc::make_basis_state(1, 0));
        CHECK(std::abs(nuosc::probability(ms, 1) - survival) < 1e-12);

        // Mass-basis readout only sees the mixing angle, never the phase.
        const Circuit mass = without_measures(
            nuosc::build_two_flavor_circuit(p, FlavorLabel::e, nuosc::TwoFlavorBasis::mass));
        const StateVector zs = nuosc::run_statevector(mass, nuosc::make_basis_state(1, 0));
        CHECK(std::abs(nuosc::probability(zs, 0) - std::pow(std::cos(p.theta), 2)) < 1e-12);
    }
    CHECK_THROWS_AS(nuosc::build_two_flavor_circuit({}, FlavorLabel::tau), std::invalid_argument);
}

TEST_CASE("the mixing gate sequence realizes the template matrix") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const GateTemplateParams p = random_params(rng);
        Circuit forward;
        forward.n_qubits = 2;
        forward.ops = nuosc::pmns3_gate(p, nuosc::GateDirection::forward);
        const std::array<double, 16> want = nuosc::evaluate_template(p);
        double max_err = 0.0;
        for (int col = 0; col < 4; ++col) {
            const StateVector s =
                nuosc::run_statevector(forward, nuosc::make_basis_state(2, col));
            for (int row = 0; row < 4; ++row)
                max_err = std::max(max_err,
                                   std::abs(s.amp[static_cast<std::size_t>(row)] -
                                            cxd(want[static_cast<std::size_t>(row * 4 + col)])));
        }
        CHECK(max_err < 1e-13);

        // forward then inverse composes to the identity
        Circuit round_trip = forward;
        for (const GateOp& op : nuosc::pmns3_gate(p, nuosc::GateDirection::inverse))
            round_trip.ops.push_back(op);
        for (int col = 0; col < 4; ++col) {
            const StateVector s =
                nuosc::run_statevector(round_trip, nuosc::make_basis_state(2, col));
            CHECK(std::abs(nuosc::probability(s, col) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("three-flavor circuit matches the interference oracle") {
    Rng rng(12);
    const GateTemplateParams p = random_params(rng);
    const CMatrix u = template_cmatrix(p);
    nuosc::ThreeFlavorParams params;
    params.pmns_gate_params = p;
    params.dm2_21 = 7.5e-5;
    params.dm2_31 = 2.5e-3;
    params.e_gev = 1.0;

    for (FlavorLabel initial : {FlavorLabel::e, FlavorLabel::mu, FlavorLabel::tau}) {
        for (double l : {0.0, 180.0, 512.3, 1200.0}) {
            params.l_km = l;
            const Circuit circuit = nuosc::build_three_flavor_circuit(params, initial);
            const auto probs = exact_two_qubit_probs(circuit);
            const auto oracle = nuosc::n_flavor_probability(
                u, {params.dm2_21, params.dm2_31, params.dm2_21 + params.dm2_31}, l,
                params.e_gev);
            const auto init = static_cast<std::size_t>(nuosc::flavor_index(initial));
            double sum = 0.0;
            for (int b = 0; b < 4; ++b) {
                CHECK(std::abs(probs[static_cast<std::size_t>(b)] -
                               oracle[init][static_cast<std::size_t>(b)]) < 1e-11);
                sum += probs[static_cast<std::size_t>(b)];
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
            if (l == 0.0) CHECK(std::abs(probs[init] - 1.0) < 1e-12);
        }
    }
    CHECK_THROWS_AS(nuosc::build_three_flavor_circuit(params, FlavorLabel::x),
                    std::invalid_argument);
}

TEST_CASE("sterile evolution applies the three target phases") {
    Rng rng(13);
    for (int draw = 0; draw < 25; ++draw) {
        nuosc::SterileParams p;
        p.dm2_21 = 0.05 * (rng.uniform() - 0.5);
        p.dm2_31 = 0.05 * (rng.uniform() - 0.5);
        p.dm2_41 = 0.05 * (rng.uniform() - 0.5);
        p.e_gev = 1.0;
        p.l_km = 400.0 * rng.uniform();
        Circuit c;
        c.n_qubits = 2;
        c.ops = nuosc::build_sterile_evolution(p);
        const std::array<double, 3> phases = {nuosc::phase_of(p.dm2_21, p.l_km, p.e_gev),
                                              nuosc::phase_of(p.dm2_31, p.l_km, p.e_gev),
                                              nuosc::phase_of(p.dm2_41, p.l_km, p.e_gev)};
        const StateVector s0 = nuosc::run_statevector(c, nuosc::make_basis_state(2, 0));
        const cxd global = s0.amp[0];
        REQUIRE(std::abs(std::abs(global) - 1.0) < 1e-12);
        for (int k = 1; k < 4; ++k) {
            const StateVector s = nuosc::run_statevector(c, nuosc::make_basis_state(2, k));
            CHECK(std::abs(s.amp[static_cast<std::size_t>(k)] / global -
                           std::polar(1.0, phases[static_cast<std::size_t>(k - 1)])) < 1e-12);
        }
    }
}

TEST_CASE("sterile circuit matches the four-state oracle, including the fourth flavor") {
    Rng rng(14);
    const GateTemplateParams p = random_params(rng);
    nuosc::SterileParams params;
    params.dm2_21 = 7.5e-5;
    params.dm2_31 = 2.5e-3;
    params.dm2_41 = 0.9;
    params.e_gev = 1.0;
    params.mixing = nuosc::evaluate_template(p);
    const CMatrix u = template_cmatrix(p);

    for (FlavorLabel initial : {FlavorLabel::mu, FlavorLabel::x}) {
        for (double l : {37.0, 250.0}) {
            params.l_km = l;
            const Circuit circuit = nuosc::build_sterile_circuit(params, initial);
            const auto probs = exact_two_qubit_probs(circuit);
            const auto oracle = nuosc::n_flavor_probability(
                u, {params.dm2_21, params.dm2_31, params.dm2_41}, l, params.e_gev);
            const auto init = static_cast<std::size_t>(nuosc::flavor_index(initial));
            for (int b = 0; b < 4; ++b)
                CHECK(std::abs(probs[static_cast<std::size_t>(b)] -
                               oracle[init][static_cast<std::size_t>(b)]) < 1e-9);
        }
    }

    nuosc::SterileParams bad = params;
    bad.mixing[0] = 2.0;
    CHECK_THROWS_AS(nuosc::build_sterile_circuit(bad, FlavorLabel::mu), std::invalid_argument);
}

TEST_CASE("decoherence circuit with zero damping equals the coherent sandwich") {
    Rng rng(15);
    const GateTemplateParams mixing = random_params(rng);

    nuosc::DecoherenceParams p;
    p.dm2_21 = 7.5e-5;
    p.dm2_31 = 2.5e-3;
    p.e_gev = 1.0;
    p.total_l_over_e = 650.0;
    p.gamma_per_km = 0.0;
    p.n_steps = 16;
    const Circuit circuit = nuosc::build_decoherence_circuit(p, mixing, FlavorLabel::mu);
    CHECK(circuit.n_qubits == 3);
    CHECK(circuit.n_classical_slots == 2 + p.n_steps);

    const nuosc::DensityMatrix rho = nuosc::run_density(
        without_measures(circuit, 2), nuosc::make_density_basis_state(3, 0));
    const nuosc::DensityMatrix reduced = nuosc::partial_trace(rho, {0, 1});

    nuosc::ThreeFlavorParams coherent;
    coherent.pmns_gate_params = mixing;
    coherent.dm2_21 = p.dm2_21;
    coherent.dm2_31 = p.dm2_31;
    coherent.e_gev = p.e_gev;
    coherent.l_km = p.total_l_over_e * p.e_gev;
    const auto probs =
        exact_two_qubit_probs(nuosc::build_three_flavor_circuit(coherent, FlavorLabel::mu));
    for (int b = 0; b < 4; ++b)
        CHECK(std::abs(reduced.at(b, b).real() - probs[static_cast<std::size_t>(b)]) < 1e-12);
}

TEST_CASE("decoherence circuit populations follow the damped oracle") {
    Rng rng(16);
    const GateTemplateParams mixing = random_params(rng);
    nuosc::DecoherenceParams p;
    p.dm2_21 = 7.5e-5;
    p.dm2_31 = 2.5e-3;
    p.e_gev = 1.0;
    p.total_l_over_e = 500.0;
    p.gamma_per_km = 2.4e-3;
    p.n_steps = 16;
    const Circuit circuit = nuosc::build_decoherence_circuit(p, mixing, FlavorLabel::e);
    const nuosc::DensityMatrix rho = nuosc::run_density(
        without_measures(circuit, 2), nuosc::make_density_basis_state(3, 0));
    const nuosc::DensityMatrix reduced = nuosc::partial_trace(rho, {0, 1});
    const auto oracle = nuosc::damped_n_flavor_probability(
        template_cmatrix(mixing), {p.dm2_21, p.dm2_31, p.dm2_21 + p.dm2_31},
        p.total_l_over_e * p.e_gev, p.e_gev, p.gamma_per_km);
    for (int b = 0; b < 4; ++b)
        CHECK(std::abs(reduced.at(b, b).real() - oracle[0][static_cast<std::size_t>(b)]) < 1e-11);

    CHECK_THROWS_AS(nuosc::build_decoherence_circuit(p, mixing, FlavorLabel::x),
                    std::invalid_argument);
}

TEST_CASE("sampling the decoherence circuit fills flavor and ancilla slots") {
    Rng rng(17);
    const GateTemplateParams mixing = random_params(rng);
    nuosc::DecoherenceParams p;
    p.dm2_21 = 7.5e-5;
    p.dm2_31 = 2.5e-3;
    p.e_gev = 1.0;
    p.total_l_over_e = 400.0;
    p.gamma_per_km = 1e-3;
    p.n_steps = 4;
    const Circuit circuit = nuosc::build_decoherence_circuit(p, mixing, FlavorLabel::mu);
    const nuosc::CountsHistogram hist =
        nuosc::run_shots(circuit, nuosc::make_basis_state(3, 0), 512, 3);
    CHECK(hist.total_shots == 512);
    CHECK(hist.n_slots == 6);
    for (const auto& [key, count] : hist.counts) CHECK(key.size() == 6);
    const nuosc::CountsHistogram flavor = nuosc::marginalize(hist, {0, 1});
    CHECK(flavor.n_slots == 2);
    CHECK(flavor.total_shots == 512);
}
