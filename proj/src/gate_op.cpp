#include "nuosc/gate_op.hpp"

#include <cmath>
#include <stdexcept>

namespace nuosc {

const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::u3: return "u3";
        case GateKind::phase_s: return "phase_s";
        case GateKind::pauli_x: return "pauli_x";
        case GateKind::cnot: return "cnot";
        case GateKind::controlled_u3: return "controlled_u3";
        case GateKind::controlled_phase: return "controlled_phase";
        case GateKind::measure: return "measure";
        case GateKind::reset: return "reset";
    }
    return "?";
}

std::array<cxd, 4> gate_payload_matrix(const GateOp& op) {
    using std::cos;
    using std::sin;
    switch (op.kind) {
        case GateKind::u3:
        case GateKind::controlled_u3: {
            // U3(theta, phi, lambda):
            //   [ cos(theta/2)              -sin(theta/2) e^{i lambda}      ]
            //   [ sin(theta/2) e^{i phi}     cos(theta/2) e^{i(lambda+phi)} ]
            const double c = cos(op.theta / 2.0);
            const double s = sin(op.theta / 2.0);
            return {cxd(c, 0.0), -s * std::polar(1.0, op.lambda),
                    s * std::polar(1.0, op.phi), c * std::polar(1.0, op.lambda + op.phi)};
        }
        case GateKind::phase_s:
        case GateKind::controlled_phase:
            return {cxd(1.0, 0.0), cxd(0.0, 0.0), cxd(0.0, 0.0), std::polar(1.0, op.phi)};
        case GateKind::pauli_x:
        case GateKind::cnot:
            return {cxd(0.0, 0.0), cxd(1.0, 0.0), cxd(1.0, 0.0), cxd(0.0, 0.0)};
        case GateKind::measure:
        case GateKind::reset:
            throw std::invalid_argument(std::string(gate_kind_name(op.kind)) +
                                        " has no unitary matrix");
    }
    throw std::invalid_argument("bad GateKind");
}

CMatrix gate_unitary(const GateOp& op) {
    const auto m = gate_payload_matrix(op);
    if (!is_controlled_kind(op.kind)) {
        CMatrix u(2);
        u.at(0, 0) = m[0];
        u.at(0, 1) = m[1];
        u.at(1, 0) = m[2];
        u.at(1, 1) = m[3];
        return u;
    }
    // Basis (control, target) with control as the high bit: the payload acts
    // on the target only when the control bit is 1.
    CMatrix u = CMatrix::identity(4);
    u.at(2, 2) = m[0];
    u.at(2, 3) = m[1];
    u.at(3, 2) = m[2];
    u.at(3, 3) = m[3];
    return u;
}

}  // namespace nuosc
