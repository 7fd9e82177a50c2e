#pragma once

#include <string>
#include <vector>

// Release gate: ten end-to-end checks covering the fit, the circuit builders,
// shot statistics, mitigation, and the output formats. Each check pins its
// own tolerances; the detail string reports the measured numbers either way
// so a red result says how far off it was.

namespace nuosc {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

// Runs every criterion in order (throwing bodies are caught and reported as
// failures). Total runtime is dominated by the template fit and the
// mitigation scan, about half a minute end to end.
std::vector<CriterionResult> run_acceptance();

}  // namespace nuosc
