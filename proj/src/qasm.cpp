#include "nuosc/qasm.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nuosc {

namespace {

std::string fmt_angle(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string qubit_ref(int index) { return "q[" + std::to_string(index) + "]"; }

}  // namespace

std::string export_qasm(const Circuit& circuit) {
    validate(circuit);
    std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
    out += "qreg q[" + std::to_string(circuit.n_qubits) + "];\n";
    if (circuit.n_classical_slots > 0)
        out += "creg c[" + std::to_string(circuit.n_classical_slots) + "];\n";

    for (const GateOp& op : circuit.ops) {
        const std::string t = qubit_ref(op.target);
        switch (op.kind) {
            case GateKind::u3:
                out += "u3(" + fmt_angle(op.theta) + "," + fmt_angle(op.phi) + "," +
                       fmt_angle(op.lambda) + ") " + t + ";\n";
                break;
            case GateKind::phase_s:
                out += "u1(" + fmt_angle(op.phi) + ") " + t + ";\n";
                break;
            case GateKind::pauli_x:
                out += "x " + t + ";\n";
                break;
            case GateKind::cnot:
                out += "cx " + qubit_ref(op.control) + "," + t + ";\n";
                break;
            case GateKind::controlled_u3: {
                // Standard qelib1 cu3 body: phase split across control and
                // target, two CNOTs around half rotations.
                const std::string c = qubit_ref(op.control);
                out += "u1(" + fmt_angle((op.lambda + op.phi) / 2.0) + ") " + c + ";\n";
                out += "u1(" + fmt_angle((op.lambda - op.phi) / 2.0) + ") " + t + ";\n";
                out += "cx " + c + "," + t + ";\n";
                out += "u3(" + fmt_angle(-op.theta / 2.0) + ",0," +
                       fmt_angle(-(op.phi + op.lambda) / 2.0) + ") " + t + ";\n";
                out += "cx " + c + "," + t + ";\n";
                out += "u3(" + fmt_angle(op.theta / 2.0) + "," + fmt_angle(op.phi) + ",0) " + t +
                       ";\n";
                break;
            }
            case GateKind::measure:
                out += "measure " + t + " -> c[" + std::to_string(op.slot) + "];\n";
                break;
            case GateKind::reset:
                out += "reset " + t + ";\n";
                break;
            case GateKind::controlled_phase:
                throw std::invalid_argument(
                    "controlled phase ops have no direct OpenQASM 2.0 form here; "
                    "decompose before export");
        }
    }
    return out;
}

}  // namespace nuosc
