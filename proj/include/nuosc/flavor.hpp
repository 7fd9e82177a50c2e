#pragma once

#include <stdexcept>
#include <string>

namespace nuosc {

// Flavor labels for the simulated register. The two-qubit computational basis
// hosts four states; the fourth ("x") is either unphysical padding or a
// sterile state, depending on the scenario.
//
// Basis convention, used everywhere: bit string "q1 q0" maps to index
// q1*2 + q0, and flavors sit at e->|00>, mu->|01>, tau->|10>, x->|11>.
enum class FlavorLabel { e, mu, tau, x };

inline int flavor_index(FlavorLabel f) { return static_cast<int>(f); }

inline FlavorLabel flavor_from_index(int i) {
    if (i < 0 || i > 3) throw std::out_of_range("flavor index must be 0..3, got " + std::to_string(i));
    return static_cast<FlavorLabel>(i);
}

inline const char* flavor_name(FlavorLabel f) {
    switch (f) {
        case FlavorLabel::e: return "e";
        case FlavorLabel::mu: return "mu";
        case FlavorLabel::tau: return "tau";
        case FlavorLabel::x: return "x";
    }
    throw std::invalid_argument("bad FlavorLabel");
}

inline FlavorLabel parse_flavor(const std::string& s) {
    if (s == "e") return FlavorLabel::e;
    if (s == "mu") return FlavorLabel::mu;
    if (s == "tau") return FlavorLabel::tau;
    if (s == "x") return FlavorLabel::x;
    throw std::invalid_argument("unknown flavor \"" + s + "\" (expected e, mu, tau, or x)");
}

}  // namespace nuosc
