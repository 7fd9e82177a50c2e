#pragma once

#include <string>

#include "nuosc/circuit.hpp"

namespace nuosc {

// Serializes a circuit as OpenQASM 2.0: header, include, register
// declarations sized from the circuit, then one statement per op (except
// ControlledU3, which expands to the standard six-line two-CNOT controlled
// rotation). Angles are printed with 12 significant digits, so equal circuits
// always serialize to identical text. ControlledPhase ops have no qelib1
// counterpart here and are rejected.
std::string export_qasm(const Circuit& circuit);

}  // namespace nuosc
