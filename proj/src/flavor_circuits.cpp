#include "nuosc/flavor_circuits.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nuosc/units.hpp"

namespace nuosc {

namespace {

void require_positive_energy(double e_gev) {
    if (!(e_gev > 0.0)) throw std::invalid_argument("energy must be positive");
}

void require_nonnegative_baseline(double l_km) {
    if (l_km < 0.0) throw std::invalid_argument("baseline must be >= 0");
}

// X gates that turn |00> into the computational state assigned to the flavor.
void append_flavor_prep(Circuit& c, FlavorLabel initial) {
    const int idx = flavor_index(initial);
    if (idx & 1) c.ops.push_back(make_pauli_x(0));
    if (idx & 2) c.ops.push_back(make_pauli_x(1));
}

void append_ops(Circuit& c, const std::vector<GateOp>& ops) {
    c.ops.insert(c.ops.end(), ops.begin(), ops.end());
}

// Per-step decoherence unit: mass-basis phase advance, then entangle the
// ancilla with qubit 0 by a rotation whose cosine of half-angle equals the
// per-step damping factor, then read the ancilla out and reset it.
void append_decoherence_steps(Circuit& c, const DecoherenceParams& p, int first_slot) {
    const double l_over_e_step = p.total_l_over_e / p.n_steps;
    const double dphi_31 = 2.0 * osc_coeff * p.dm2_31 * l_over_e_step;
    const double dphi_21 = 2.0 * osc_coeff * p.dm2_21 * l_over_e_step;
    const double dl_km = l_over_e_step * p.e_gev;
    const double epsilon = 2.0 * std::acos(std::exp(-p.gamma_per_km * dl_km));
    for (int step = 0; step < p.n_steps; ++step) {
        c.ops.push_back(make_phase_s(1, dphi_31));
        c.ops.push_back(make_phase_s(0, dphi_21));
        c.ops.push_back(make_controlled_u3(0, 2, epsilon, 0.0, 0.0));
        c.ops.push_back(make_measure(2, first_slot + step));
        c.ops.push_back(make_reset(2));
    }
}

void check_decoherence_params(const DecoherenceParams& p) {
    if (p.n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (p.gamma_per_km < 0.0) throw std::invalid_argument("gamma must be >= 0");
    if (p.total_l_over_e < 0.0) throw std::invalid_argument("L/E must be >= 0");
    require_positive_energy(p.e_gev);
}

}  // namespace

double phase_of(double dm2, double l_km, double e_gev) {
    require_positive_energy(e_gev);
    return 2.0 * osc_coeff * dm2 * l_km / e_gev;
}

Circuit build_two_flavor_circuit(const TwoFlavorParams& p, FlavorLabel initial,
                                 TwoFlavorBasis basis) {
    if (initial != FlavorLabel::e && initial != FlavorLabel::mu)
        throw std::invalid_argument(std::string("two-flavor circuits accept e or mu, got ") +
                                    flavor_name(initial));
    require_positive_energy(p.e_gev);
    require_nonnegative_baseline(p.l_km);

    Circuit c;
    c.n_qubits = 1;
    c.n_classical_slots = 1;
    if (initial == FlavorLabel::mu) c.ops.push_back(make_pauli_x(0));
    c.ops.push_back(make_u3(0, 2.0 * p.theta, 0.0, 0.0));
    c.ops.push_back(make_phase_s(0, phase_of(p.dm2, p.l_km, p.e_gev)));
    if (basis == TwoFlavorBasis::flavor) c.ops.push_back(make_u3(0, -2.0 * p.theta, 0.0, 0.0));
    c.ops.push_back(make_measure(0, 0));
    return c;
}

std::vector<GateOp> pmns3_gate(const GateTemplateParams& params, GateDirection direction) {
    const auto& a = params.angles;
    std::vector<GateOp> ops;
    ops.reserve(10);
    if (direction == GateDirection::forward) {
        ops.push_back(make_u3(1, a[0], 0.0, 0.0));
        ops.push_back(make_u3(0, a[1], 0.0, 0.0));
        ops.push_back(make_pauli_x(1));
        ops.push_back(make_cnot(0, 1));
        ops.push_back(make_u3(1, a[2], 0.0, 0.0));
        ops.push_back(make_u3(0, a[3], 0.0, 0.0));
        ops.push_back(make_pauli_x(1));
        ops.push_back(make_cnot(0, 1));
        ops.push_back(make_u3(1, a[4], 0.0, 0.0));
        ops.push_back(make_u3(0, a[5], 0.0, 0.0));
    } else {
        ops.push_back(make_u3(0, -a[5], 0.0, 0.0));
        ops.push_back(make_u3(1, -a[4], 0.0, 0.0));
        ops.push_back(make_cnot(0, 1));
        ops.push_back(make_pauli_x(1));
        ops.push_back(make_u3(0, -a[3], 0.0, 0.0));
        ops.push_back(make_u3(1, -a[2], 0.0, 0.0));
        ops.push_back(make_cnot(0, 1));
        ops.push_back(make_pauli_x(1));
        ops.push_back(make_u3(0, -a[1], 0.0, 0.0));
        ops.push_back(make_u3(1, -a[0], 0.0, 0.0));
    }
    return ops;
}

Circuit build_three_flavor_circuit(const ThreeFlavorParams& p, FlavorLabel initial) {
    if (initial == FlavorLabel::x)
        throw std::invalid_argument("three-flavor circuits accept e, mu, or tau only");
    require_positive_energy(p.e_gev);
    require_nonnegative_baseline(p.l_km);

    Circuit c;
    c.n_qubits = 2;
    c.n_classical_slots = 2;
    append_flavor_prep(c, initial);
    append_ops(c, pmns3_gate(p.pmns_gate_params, GateDirection::inverse));
    c.ops.push_back(make_phase_s(1, phase_of(p.dm2_31, p.l_km, p.e_gev)));
    c.ops.push_back(make_phase_s(0, phase_of(p.dm2_21, p.l_km, p.e_gev)));
    append_ops(c, pmns3_gate(p.pmns_gate_params, GateDirection::forward));
    c.ops.push_back(make_measure(0, 0));
    c.ops.push_back(make_measure(1, 1));
    return c;
}

std::vector<GateOp> build_sterile_evolution(const SterileParams& p) {
    require_positive_energy(p.e_gev);
    const double phi_21 = phase_of(p.dm2_21, p.l_km, p.e_gev);
    const double phi_31 = phase_of(p.dm2_31, p.l_km, p.e_gev);
    const double phi_41 = phase_of(p.dm2_41, p.l_km, p.e_gev);

    // Unknowns: phase x on the qubit-1 sector, y on the qubit-0 sector, z on
    // the XOR-odd states. Requiring mass states 1..3 to pick up phi_21,
    // phi_31, phi_41 gives the linear system below; solve it by elimination
    // rather than trusting a transcribed closed form.
    double a[3][4] = {
        {0.0, 1.0, 1.0, phi_21},
        {1.0, 0.0, 1.0, phi_31},
        {1.0, 1.0, 0.0, phi_41},
    };
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        for (int k = 0; k < 4; ++k) std::swap(a[col][k], a[pivot][k]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double factor = a[r][col] / a[col][col];
            for (int k = col; k < 4; ++k) a[r][k] -= factor * a[col][k];
        }
    }
    const double x = a[0][3] / a[0][0];
    const double y = a[1][3] / a[1][1];
    const double z = a[2][3] / a[2][2];

    // Cross-check against the half-sum combinations the system must produce.
    const double scale = 1.0 + std::abs(phi_21) + std::abs(phi_31) + std::abs(phi_41);
    if (std::abs(x - 0.5 * (-phi_21 + phi_31 + phi_41)) > 1e-9 * scale ||
        std::abs(y - 0.5 * (phi_21 - phi_31 + phi_41)) > 1e-9 * scale ||
        std::abs(z - 0.5 * (phi_21 + phi_31 - phi_41)) > 1e-9 * scale)
        throw std::logic_error("sterile phase solution disagrees with closed form");

    return {make_phase_s(1, x), make_phase_s(0, y), make_cnot(1, 0), make_phase_s(0, z),
            make_cnot(1, 0)};
}

Circuit build_sterile_circuit(const SterileParams& p, FlavorLabel initial) {
    require_nonnegative_baseline(p.l_km);
    TargetUnitary target;
    target.m = p.mixing;
    {
        // The type contract wants a genuinely orthogonal matrix, tighter than
        // the fit entry check.
        double defect = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double dot = 0.0;
                for (int k = 0; k < 4; ++k)
                    dot += p.mixing[static_cast<std::size_t>(k * 4 + i)] *
                           p.mixing[static_cast<std::size_t>(k * 4 + j)];
                defect = std::max(defect, std::abs(dot - (i == j ? 1.0 : 0.0)));
            }
        if (defect > 1e-10)
            throw std::invalid_argument("sterile mixing matrix is not orthogonal");
    }
    const FitResult fitted = fit(target);
    if (!fitted.converged)
        throw std::runtime_error(
            "sterile mixing matrix is not representable by the six-angle gate template");

    Circuit c;
    c.n_qubits = 2;
    c.n_classical_slots = 2;
    append_flavor_prep(c, initial);
    append_ops(c, pmns3_gate(fitted.params, GateDirection::inverse));
    append_ops(c, build_sterile_evolution(p));
    append_ops(c, pmns3_gate(fitted.params, GateDirection::forward));
    c.ops.push_back(make_measure(0, 0));
    c.ops.push_back(make_measure(1, 1));
    return c;
}

Circuit build_decoherence_block(const DecoherenceParams& p) {
    check_decoherence_params(p);
    Circuit c;
    c.n_qubits = 3;
    c.n_classical_slots = p.n_steps;
    append_decoherence_steps(c, p, 0);
    return c;
}

Circuit build_decoherence_circuit(const DecoherenceParams& p, const GateTemplateParams& mixing,
                                  FlavorLabel initial) {
    if (initial == FlavorLabel::x)
        throw std::invalid_argument("decoherence circuits accept e, mu, or tau only");
    check_decoherence_params(p);
    Circuit c;
    c.n_qubits = 3;
    c.n_classical_slots = 2 + p.n_steps;
    append_flavor_prep(c, initial);
    append_ops(c, pmns3_gate(mixing, GateDirection::inverse));
    append_decoherence_steps(c, p, 2);
    append_ops(c, pmns3_gate(mixing, GateDirection::forward));
    c.ops.push_back(make_measure(0, 0));
    c.ops.push_back(make_measure(1, 1));
    return c;
}

}  // namespace nuosc
