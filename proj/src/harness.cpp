#include "nuosc/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nuosc/qasm.hpp"
#include "nuosc/rng.hpp"
#include "nuosc/units.hpp"

namespace nuosc {

namespace {

using ordered_json = nlohmann::ordered_json;

// Stream ids for RNG derivation: three per scan point, plus a detached block
// for the calibration run so changing n_points never reseeds it.
constexpr std::uint64_t calibration_circuit_stream = 0xC0000000ULL;
constexpr std::uint64_t calibration_channel_stream = 0xC0000001ULL;

[[noreturn]] void fail(const std::string& message) { throw std::invalid_argument(message); }

void check_keys(const ordered_json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) fail("unknown key \"" + item.key() + "\" in " + where);
    }
}

double require_number(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) fail("\"" + std::string(key) + "\" is required in " + where);
    if (!obj.at(key).is_number()) fail("\"" + std::string(key) + "\" in " + where + " must be a number");
    return obj.at(key).get<double>();
}

double optional_number(const ordered_json& obj, const char* key, const std::string& where,
                       double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) fail("\"" + std::string(key) + "\" in " + where + " must be a number");
    return obj.at(key).get<double>();
}

std::int64_t require_integer(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) fail("\"" + std::string(key) + "\" is required in " + where);
    if (!obj.at(key).is_number_integer()) fail("\"" + std::string(key) + "\" in " + where + " must be an integer");
    return obj.at(key).get<std::int64_t>();
}

std::int64_t optional_integer(const ordered_json& obj, const char* key, const std::string& where,
                              std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer()) fail("\"" + std::string(key) + "\" in " + where + " must be an integer");
    return obj.at(key).get<std::int64_t>();
}

bool optional_bool(const ordered_json& obj, const char* key, const std::string& where,
                   bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) fail("\"" + std::string(key) + "\" in " + where + " must be a boolean");
    return obj.at(key).get<bool>();
}

std::string require_string(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) fail("\"" + std::string(key) + "\" is required in " + where);
    if (!obj.at(key).is_string()) fail("\"" + std::string(key) + "\" in " + where + " must be a string");
    return obj.at(key).get<std::string>();
}

template <std::size_t N>
std::array<double, N> number_array(const ordered_json& value, const char* key,
                                   const std::string& where) {
    if (!value.is_array() || value.size() != N)
        fail("\"" + std::string(key) + "\" in " + where + " must be an array of " +
             std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t k = 0; k < N; ++k) {
        if (!value.at(k).is_number())
            fail("\"" + std::string(key) + "\" in " + where + " must contain numbers only");
        out[k] = value.at(k).get<double>();
    }
    return out;
}

// 2x2 symmetric matrix given as [[a, b], [b, d]].
std::array<double, 4> symmetric_2x2(const ordered_json& value, const char* key,
                                    const std::string& where) {
    if (!value.is_array() || value.size() != 2)
        fail("\"" + std::string(key) + "\" in " + where + " must be a 2x2 array");
    std::array<double, 4> out{};
    for (int r = 0; r < 2; ++r) {
        const auto row = number_array<2>(value.at(static_cast<std::size_t>(r)), key, where);
        out[static_cast<std::size_t>(r * 2)] = row[0];
        out[static_cast<std::size_t>(r * 2 + 1)] = row[1];
    }
    if (std::abs(out[1] - out[2]) > 1e-12)
        fail("\"" + std::string(key) + "\" in " + where + " must be symmetric");
    return out;
}

GateTemplateParams resolve_default_pmns() {
    const FitResult fitted = fit(reference_mixing_matrix());
    if (!fitted.converged)
        throw std::runtime_error("internal fit of the bundled mixing matrix did not converge");
    return fitted.params;
}

void parse_kinematics(const ordered_json& params, const std::string& where, RunConfig& config) {
    switch (config.scan.axis) {
        case ScanAxis::l_km:
            config.fixed_e_gev = require_number(params, "E", where);
            if (!(config.fixed_e_gev > 0.0)) fail("\"E\" in " + where + " must be > 0");
            break;
        case ScanAxis::e_gev:
            config.fixed_l_km = require_number(params, "L", where);
            if (config.fixed_l_km < 0.0) fail("\"L\" in " + where + " must be >= 0");
            break;
        case ScanAxis::l_over_e:
            config.fixed_e_gev = optional_number(params, "E", where, 1.0);
            if (!(config.fixed_e_gev > 0.0)) fail("\"E\" in " + where + " must be > 0");
            break;
    }
}

void parse_params(const ordered_json& params, RunConfig& config) {
    const std::string where = "params";
    switch (config.scenario) {
        case Scenario::two_flavor:
            check_keys(params, where, {"theta", "dm2", "L", "E"});
            config.theta = require_number(params, "theta", where);
            config.dm2 = require_number(params, "dm2", where);
            break;
        case Scenario::three_flavor:
            check_keys(params, where, {"dm2_21", "dm2_31", "pmns_angles", "L", "E"});
            config.dm2_21 = require_number(params, "dm2_21", where);
            config.dm2_31 = require_number(params, "dm2_31", where);
            if (params.contains("pmns_angles"))
                config.pmns.angles = number_array<6>(params.at("pmns_angles"), "pmns_angles", where);
            else
                config.pmns = resolve_default_pmns();
            break;
        case Scenario::sterile: {
            check_keys(params, where, {"dm2_21", "dm2_31", "dm2_41", "mixing_angles", "mixing", "L", "E"});
            config.dm2_21 = require_number(params, "dm2_21", where);
            config.dm2_31 = require_number(params, "dm2_31", where);
            config.dm2_41 = require_number(params, "dm2_41", where);
            const bool has_angles = params.contains("mixing_angles");
            const bool has_matrix = params.contains("mixing");
            if (has_angles == has_matrix)
                fail("params for sterile must provide exactly one of \"mixing_angles\" and \"mixing\"");
            if (has_angles) {
                GateTemplateParams angles;
                angles.angles = number_array<6>(params.at("mixing_angles"), "mixing_angles", where);
                config.sterile_mixing = evaluate_template(angles);
            } else {
                config.sterile_mixing = number_array<16>(params.at("mixing"), "mixing", where);
            }
            break;
        }
        case Scenario::decoherence:
            check_keys(params, where, {"dm2_21", "dm2_31", "gamma", "n_steps", "pmns_angles", "L", "E"});
            config.dm2_21 = require_number(params, "dm2_21", where);
            config.dm2_31 = require_number(params, "dm2_31", where);
            config.gamma_per_km = require_number(params, "gamma", where);
            if (config.gamma_per_km < 0.0) fail("\"gamma\" in " + where + " must be >= 0");
            config.n_steps = static_cast<int>(optional_integer(params, "n_steps", where, 16));
            if (config.n_steps < 1) fail("\"n_steps\" in " + where + " must be >= 1");
            if (params.contains("pmns_angles"))
                config.pmns.angles = number_array<6>(params.at("pmns_angles"), "pmns_angles", where);
            else
                config.pmns = resolve_default_pmns();
            break;
        case Scenario::matter:
        case Scenario::nsi:
            if (config.scenario == Scenario::nsi) {
                check_keys(params, where, {"theta", "dm2", "n_e_cm3", "eps_ee", "L", "E"});
                config.eps_ee = require_number(params, "eps_ee", where);
            } else {
                check_keys(params, where, {"theta", "dm2", "n_e_cm3", "L", "E"});
            }
            config.theta = require_number(params, "theta", where);
            config.dm2 = require_number(params, "dm2", where);
            config.n_e_cm3 = require_number(params, "n_e_cm3", where);
            if (config.n_e_cm3 < 0.0) fail("\"n_e_cm3\" in " + where + " must be >= 0");
            break;
        case Scenario::lv:
            check_keys(params, where, {"theta", "dm2", "a3", "c4", "a5", "c6", "L", "E"});
            config.theta = require_number(params, "theta", where);
            config.dm2 = require_number(params, "dm2", where);
            if (params.contains("a3")) config.lv_a3 = symmetric_2x2(params.at("a3"), "a3", where);
            if (params.contains("c4")) config.lv_c4 = symmetric_2x2(params.at("c4"), "c4", where);
            if (params.contains("a5")) config.lv_a5 = symmetric_2x2(params.at("a5"), "a5", where);
            if (params.contains("c6")) config.lv_c6 = symmetric_2x2(params.at("c6"), "c6", where);
            break;
    }
    parse_kinematics(params, where, config);
}

void validate_initial(const RunConfig& config) {
    const bool two_state = config.scenario == Scenario::two_flavor ||
                           config.scenario == Scenario::matter ||
                           config.scenario == Scenario::nsi || config.scenario == Scenario::lv;
    if (two_state && config.initial != FlavorLabel::e && config.initial != FlavorLabel::mu)
        fail(std::string("\"initial\" must be e or mu for scenario ") +
             scenario_name(config.scenario));
    if ((config.scenario == Scenario::three_flavor || config.scenario == Scenario::decoherence) &&
        config.initial == FlavorLabel::x)
        fail(std::string("\"initial\" must be e, mu, or tau for scenario ") +
             scenario_name(config.scenario));
}

bool is_two_state(const RunConfig& config) {
    return config.scenario == Scenario::two_flavor || config.scenario == Scenario::matter ||
           config.scenario == Scenario::nsi || config.scenario == Scenario::lv;
}

// Mixing matrix for the two-state scenarios, rows (e, mu) over mass columns.
CMatrix two_state_mixing(double theta) {
    CMatrix u(2);
    u.at(0, 0) = std::cos(theta);
    u.at(0, 1) = std::sin(theta);
    u.at(1, 0) = -std::sin(theta);
    u.at(1, 1) = std::cos(theta);
    return u;
}

CMatrix effective_hamiltonian(const RunConfig& config, double e_gev) {
    const CMatrix u = two_state_mixing(config.theta);
    const std::vector<double> dm2_list = {config.dm2};
    if (config.scenario == Scenario::lv) {
        LvParams lv;
        const auto to_cmatrix = [](const std::array<double, 4>& m) {
            CMatrix out(2);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) out.at(r, c) = m[static_cast<std::size_t>(r * 2 + c)];
            return out;
        };
        lv.a3 = to_cmatrix(config.lv_a3);
        lv.c4 = to_cmatrix(config.lv_c4);
        lv.a5 = to_cmatrix(config.lv_a5);
        lv.c6 = to_cmatrix(config.lv_c6);
        return build_lv_hamiltonian(build_vacuum_hamiltonian(u, dm2_list, e_gev), lv, e_gev);
    }
    MatterParams matter;
    matter.n_e_cm3 = config.n_e_cm3;
    matter.eps_ee = config.scenario == Scenario::nsi ? config.eps_ee : 0.0;
    return build_matter_hamiltonian(u, dm2_list, e_gev, matter);
}

// Collapses a real symmetric 2x2 Hamiltonian to the equivalent vacuum-form
// parameters: rotation angle of its eigenbasis and an eV^2 splitting that
// reproduces the eigenvalue gap at this energy.
void effective_two_state_params(const CMatrix& h, double e_gev, double& theta_eff,
                                double& dm2_eff) {
    const double h00 = h.at(0, 0).real();
    const double h11 = h.at(1, 1).real();
    const double h01 = h.at(0, 1).real();
    theta_eff = 0.5 * std::atan2(2.0 * h01, h11 - h00);
    dm2_eff = std::hypot(h11 - h00, 2.0 * h01) * 2.0 * e_gev;
}

std::vector<double> four_state_dm2_list(const RunConfig& config) {
    if (config.scenario == Scenario::sterile)
        return {config.dm2_21, config.dm2_31, config.dm2_41};
    // The fourth (unused) state rides along with the phase the two
    // single-qubit S gates force on |11>, the sum of the two splittings.
    return {config.dm2_21, config.dm2_31, config.dm2_21 + config.dm2_31};
}

CMatrix four_state_mixing(const RunConfig& config) {
    std::array<double, 16> m{};
    if (config.scenario == Scenario::sterile)
        m = config.sterile_mixing;
    else
        m = evaluate_template(config.pmns);
    CMatrix u(4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) u.at(r, c) = m[static_cast<std::size_t>(r * 4 + c)];
    return u;
}

// Drops Measure ops: all of them, or only those writing slots below a cutoff
// (used to keep mid-circuit ancilla measurements while removing the final
// flavor readout).
Circuit drop_measures(const Circuit& circuit, int slot_cutoff) {
    Circuit out = circuit;
    out.ops.clear();
    for (const GateOp& op : circuit.ops) {
        if (op.kind == GateKind::measure && (slot_cutoff < 0 || op.slot < slot_cutoff)) continue;
        out.ops.push_back(op);
    }
    return out;
}

std::array<std::optional<double>, 4> exact_probabilities(const RunConfig& config,
                                                         const Circuit& circuit) {
    std::array<std::optional<double>, 4> out;
    if (config.scenario == Scenario::decoherence) {
        const Circuit stripped = drop_measures(circuit, 2);
        const DensityMatrix rho =
            run_density(stripped, make_density_basis_state(circuit.n_qubits, 0));
        const DensityMatrix reduced = partial_trace(rho, {0, 1});
        for (int k = 0; k < 4; ++k) out[static_cast<std::size_t>(k)] = reduced.at(k, k).real();
        return out;
    }
    const Circuit stripped = drop_measures(circuit, -1);
    const StateVector s = run_statevector(stripped, make_basis_state(circuit.n_qubits, 0));
    for (int k = 0; k < s.dim(); ++k) out[static_cast<std::size_t>(k)] = probability(s, k);
    return out;
}

// Lifts a single-slot histogram into the two-qubit outcome space ("0" -> "00",
// "1" -> "01") so the readout-noise machinery sees its native format.
CountsHistogram pad_to_two_slots(const CountsHistogram& hist) {
    if (hist.n_slots == 2) return hist;
    if (hist.n_slots != 1) throw std::invalid_argument("expected a 1- or 2-slot histogram");
    CountsHistogram out;
    out.n_slots = 2;
    out.total_shots = hist.total_shots;
    for (const auto& [key, count] : hist.counts) out.counts["0" + key] += count;
    return out;
}

std::string fmt_g(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string csv_cell(const std::optional<double>& value) {
    return value ? fmt_g(*value) : std::string();
}

ordered_json config_to_json(const RunConfig& config) {
    ordered_json j;
    j["scenario"] = scenario_name(config.scenario);
    j["initial"] = flavor_name(config.initial);
    ordered_json scan;
    scan["axis"] = axis_name(config.scan.axis);
    scan["min"] = config.scan.min;
    scan["max"] = config.scan.max;
    scan["n_points"] = config.scan.n_points;
    scan["spacing"] = config.scan.spacing == ScanSpacing::linear ? "linear" : "log";
    j["scan"] = scan;
    j["shots"] = config.shots;
    j["seed"] = config.seed;
    j["calibration_shots"] = config.calibration_shots;
    if (config.noise) {
        ordered_json noise;
        noise["f1"] = config.noise->noise.f1;
        noise["f2"] = config.noise->noise.f2;
        noise["independent_flips"] = config.noise->independent_flips;
        j["noise"] = noise;
    } else {
        j["noise"] = nullptr;
    }
    j["mitigation"] = config.mitigation;
    j["include_gate_error_term"] = config.include_gate_error_term;
    j["output_prefix"] = config.output_prefix;

    ordered_json params;
    switch (config.scenario) {
        case Scenario::two_flavor:
            params["theta"] = config.theta;
            params["dm2"] = config.dm2;
            break;
        case Scenario::three_flavor:
            params["dm2_21"] = config.dm2_21;
            params["dm2_31"] = config.dm2_31;
            params["pmns_angles"] = config.pmns.angles;
            break;
        case Scenario::sterile:
            params["dm2_21"] = config.dm2_21;
            params["dm2_31"] = config.dm2_31;
            params["dm2_41"] = config.dm2_41;
            params["mixing"] = config.sterile_mixing;
            break;
        case Scenario::decoherence:
            params["dm2_21"] = config.dm2_21;
            params["dm2_31"] = config.dm2_31;
            params["gamma"] = config.gamma_per_km;
            params["n_steps"] = config.n_steps;
            params["pmns_angles"] = config.pmns.angles;
            break;
        case Scenario::matter:
        case Scenario::nsi:
            params["theta"] = config.theta;
            params["dm2"] = config.dm2;
            params["n_e_cm3"] = config.n_e_cm3;
            if (config.scenario == Scenario::nsi) params["eps_ee"] = config.eps_ee;
            break;
        case Scenario::lv: {
            params["theta"] = config.theta;
            params["dm2"] = config.dm2;
            const auto mat = [](const std::array<double, 4>& m) {
                return ordered_json::array({ordered_json::array({m[0], m[1]}),
                                            ordered_json::array({m[2], m[3]})});
            };
            params["a3"] = mat(config.lv_a3);
            params["c4"] = mat(config.lv_c4);
            params["a5"] = mat(config.lv_a5);
            params["c6"] = mat(config.lv_c6);
            break;
        }
    }
    switch (config.scan.axis) {
        case ScanAxis::l_km: params["E"] = config.fixed_e_gev; break;
        case ScanAxis::e_gev: params["L"] = config.fixed_l_km; break;
        case ScanAxis::l_over_e: params["E"] = config.fixed_e_gev; break;
    }
    j["params"] = params;
    return j;
}

double axis_value_at(const ScanSpec& scan, int index) {
    if (scan.n_points == 1) return scan.min;
    const double t = static_cast<double>(index) / (scan.n_points - 1);
    if (scan.spacing == ScanSpacing::linear) return scan.min + (scan.max - scan.min) * t;
    return std::exp(std::log(scan.min) + (std::log(scan.max) - std::log(scan.min)) * t);
}

}  // namespace

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::two_flavor: return "two_flavor";
        case Scenario::three_flavor: return "three_flavor";
        case Scenario::sterile: return "sterile";
        case Scenario::decoherence: return "decoherence";
        case Scenario::matter: return "matter";
        case Scenario::nsi: return "nsi";
        case Scenario::lv: return "lv";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (Scenario s : {Scenario::two_flavor, Scenario::three_flavor, Scenario::sterile,
                       Scenario::decoherence, Scenario::matter, Scenario::nsi, Scenario::lv})
        if (name == scenario_name(s)) return s;
    fail("unknown scenario \"" + name + "\"");
}

const char* axis_name(ScanAxis a) {
    switch (a) {
        case ScanAxis::l_km: return "L";
        case ScanAxis::e_gev: return "E";
        case ScanAxis::l_over_e: return "L_over_E";
    }
    return "?";
}

ScanAxis parse_axis(const std::string& name) {
    for (ScanAxis a : {ScanAxis::l_km, ScanAxis::e_gev, ScanAxis::l_over_e})
        if (name == axis_name(a)) return a;
    fail("unknown scan axis \"" + name + "\" (expected L, E, or L_over_E)");
}

RunConfig load_config_from_string(const std::string& text, const std::string& origin) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
    try {
        if (!doc.is_object()) fail("config root must be a JSON object");
        check_keys(doc, "config",
                   {"scenario", "initial", "shots", "seed", "calibration_shots", "scan", "params",
                    "noise", "mitigation", "include_gate_error_term", "output_prefix"});

        RunConfig config;
        config.scenario = parse_scenario(require_string(doc, "scenario", "config"));

        const bool two_state_default = config.scenario == Scenario::two_flavor ||
                                       config.scenario == Scenario::matter ||
                                       config.scenario == Scenario::nsi ||
                                       config.scenario == Scenario::lv;
        config.initial = two_state_default ? FlavorLabel::e : FlavorLabel::mu;
        if (doc.contains("initial"))
            config.initial = parse_flavor(require_string(doc, "initial", "config"));

        const std::int64_t shots = optional_integer(doc, "shots", "config", 1024);
        if (shots < 1) fail("\"shots\" must be >= 1");
        config.shots = static_cast<std::uint64_t>(shots);
        const std::int64_t seed = optional_integer(doc, "seed", "config", 0);
        if (seed < 0) fail("\"seed\" must be >= 0");
        config.seed = static_cast<std::uint64_t>(seed);
        const std::int64_t calibration_shots =
            optional_integer(doc, "calibration_shots", "config", shots);
        if (calibration_shots < 1) fail("\"calibration_shots\" must be >= 1");
        config.calibration_shots = static_cast<std::uint64_t>(calibration_shots);

        if (!doc.contains("scan") || !doc.at("scan").is_object())
            fail("\"scan\" object is required");
        const ordered_json& scan = doc.at("scan");
        check_keys(scan, "scan", {"axis", "min", "max", "n_points", "spacing"});
        config.scan.axis = parse_axis(require_string(scan, "axis", "scan"));
        config.scan.min = require_number(scan, "min", "scan");
        config.scan.max = require_number(scan, "max", "scan");
        const std::int64_t n_points = require_integer(scan, "n_points", "scan");
        if (n_points < 1) fail("\"n_points\" in scan must be >= 1");
        config.scan.n_points = static_cast<int>(n_points);
        if (scan.contains("spacing")) {
            const std::string spacing = require_string(scan, "spacing", "scan");
            if (spacing == "linear")
                config.scan.spacing = ScanSpacing::linear;
            else if (spacing == "log")
                config.scan.spacing = ScanSpacing::log;
            else
                fail("\"spacing\" in scan must be \"linear\" or \"log\"");
        }
        if (config.scan.min > config.scan.max) fail("\"min\" in scan must be <= \"max\"");
        if (config.scan.spacing == ScanSpacing::log && !(config.scan.min > 0.0))
            fail("\"min\" in scan must be > 0 for log spacing");
        if (config.scan.axis == ScanAxis::e_gev && !(config.scan.min > 0.0))
            fail("\"min\" in scan must be > 0 when the axis is E");
        if (config.scan.min < 0.0) fail("\"min\" in scan must be >= 0");

        if (doc.contains("noise")) {
            if (!doc.at("noise").is_object()) fail("\"noise\" must be an object");
            const ordered_json& noise = doc.at("noise");
            check_keys(noise, "noise", {"f1", "f2", "independent_flips"});
            NoiseConfig nc;
            nc.noise.f1 = require_number(noise, "f1", "noise");
            nc.noise.f2 = require_number(noise, "f2", "noise");
            if (nc.noise.f1 < 0.0) fail("\"f1\" in noise must be >= 0");
            if (nc.noise.f2 < 0.0) fail("\"f2\" in noise must be >= 0");
            if (nc.noise.f1 + nc.noise.f2 > 1.0) fail("noise requires f1 + f2 <= 1");
            nc.independent_flips = optional_bool(noise, "independent_flips", "noise", false);
            config.noise = nc;
        }
        config.mitigation = optional_bool(doc, "mitigation", "config", config.noise.has_value());
        config.include_gate_error_term =
            optional_bool(doc, "include_gate_error_term", "config", false);
        config.output_prefix = doc.contains("output_prefix")
                                   ? require_string(doc, "output_prefix", "config")
                                   : std::string(scenario_name(config.scenario));

        if (!doc.contains("params") || !doc.at("params").is_object())
            fail("\"params\" object is required");
        parse_params(doc.at("params"), config);
        validate_initial(config);

        if (config.scenario == Scenario::sterile) {
            // Check orthogonality here so a bad matrix fails at load, naming
            // the field, instead of deep inside the first scan point.
            CMatrix u(4);
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c)
                    u.at(r, c) = config.sterile_mixing[static_cast<std::size_t>(r * 4 + c)];
            if (u.unitarity_defect() > 1e-10)
                fail("\"mixing\" in params must be orthogonal");
        }

        if (const char* env_seed = std::getenv("NUOSC_SEED")) {
            char* end = nullptr;
            const unsigned long long value = std::strtoull(env_seed, &end, 10);
            if (end == env_seed || *end != '\0')
                fail("NUOSC_SEED must be an unsigned integer, got \"" + std::string(env_seed) +
                     "\"");
            config.seed = value;
        }
        return config;
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_config_from_string(buffer.str(), path);
}

void axis_kinematics(const RunConfig& config, double axis_value, double& l_km, double& e_gev) {
    switch (config.scan.axis) {
        case ScanAxis::l_km:
            l_km = axis_value;
            e_gev = config.fixed_e_gev;
            break;
        case ScanAxis::e_gev:
            l_km = config.fixed_l_km;
            e_gev = axis_value;
            break;
        case ScanAxis::l_over_e:
            e_gev = config.fixed_e_gev;
            l_km = axis_value * e_gev;
            break;
    }
}

Circuit build_scenario_circuit(const RunConfig& config, double l_km, double e_gev) {
    switch (config.scenario) {
        case Scenario::two_flavor: {
            TwoFlavorParams p{config.theta, config.dm2, e_gev, l_km};
            return build_two_flavor_circuit(p, config.initial);
        }
        case Scenario::three_flavor: {
            ThreeFlavorParams p;
            p.pmns_gate_params = config.pmns;
            p.dm2_21 = config.dm2_21;
            p.dm2_31 = config.dm2_31;
            p.e_gev = e_gev;
            p.l_km = l_km;
            return build_three_flavor_circuit(p, config.initial);
        }
        case Scenario::sterile: {
            SterileParams p;
            p.dm2_21 = config.dm2_21;
            p.dm2_31 = config.dm2_31;
            p.dm2_41 = config.dm2_41;
            p.e_gev = e_gev;
            p.l_km = l_km;
            p.mixing = config.sterile_mixing;
            return build_sterile_circuit(p, config.initial);
        }
        case Scenario::decoherence: {
            DecoherenceParams p;
            p.dm2_21 = config.dm2_21;
            p.dm2_31 = config.dm2_31;
            p.e_gev = e_gev;
            p.total_l_over_e = l_km / e_gev;
            p.gamma_per_km = config.gamma_per_km;
            p.n_steps = config.n_steps;
            return build_decoherence_circuit(p, config.pmns, config.initial);
        }
        case Scenario::matter:
        case Scenario::nsi:
        case Scenario::lv: {
            double theta_eff = 0.0, dm2_eff = 0.0;
            effective_two_state_params(effective_hamiltonian(config, e_gev), e_gev, theta_eff,
                                       dm2_eff);
            TwoFlavorParams p{theta_eff, dm2_eff, e_gev, l_km};
            return build_two_flavor_circuit(p, config.initial);
        }
    }
    throw std::logic_error("unreachable scenario");
}

std::array<std::optional<double>, 4> oracle_probabilities(const RunConfig& config, double l_km,
                                                          double e_gev) {
    std::array<std::optional<double>, 4> out;
    const int init = flavor_index(config.initial);
    switch (config.scenario) {
        case Scenario::two_flavor:
            out[0] = two_flavor_probability(config.theta, config.dm2, l_km, e_gev, config.initial,
                                            FlavorLabel::e);
            out[1] = two_flavor_probability(config.theta, config.dm2, l_km, e_gev, config.initial,
                                            FlavorLabel::mu);
            break;
        case Scenario::three_flavor:
        case Scenario::sterile: {
            const auto p = n_flavor_probability(four_state_mixing(config),
                                                four_state_dm2_list(config), l_km, e_gev);
            for (int b = 0; b < 4; ++b)
                out[static_cast<std::size_t>(b)] = p[static_cast<std::size_t>(init)][static_cast<std::size_t>(b)];
            break;
        }
        case Scenario::decoherence: {
            const auto p =
                damped_n_flavor_probability(four_state_mixing(config), four_state_dm2_list(config),
                                            l_km, e_gev, config.gamma_per_km);
            for (int b = 0; b < 4; ++b)
                out[static_cast<std::size_t>(b)] = p[static_cast<std::size_t>(init)][static_cast<std::size_t>(b)];
            break;
        }
        case Scenario::matter:
        case Scenario::nsi:
        case Scenario::lv: {
            const auto p = probability_from_hamiltonian(effective_hamiltonian(config, e_gev), l_km);
            out[0] = p[static_cast<std::size_t>(init)][0];
            out[1] = p[static_cast<std::size_t>(init)][1];
            break;
        }
    }
    return out;
}

ScanReport run_scan(const RunConfig& config) {
    ScanReport report;
    report.config = config;

    MitigationMatrix mitigation_matrix;
    if (config.mitigation) {
        // Zero-baseline calibration: prepare the initial state, no evolution,
        // read out through the same noise channel the scan will see.
        const Circuit cal_circuit = build_scenario_circuit(config, 0.0, config.fixed_e_gev);
        CountsHistogram cal_hist =
            run_shots(cal_circuit, make_basis_state(cal_circuit.n_qubits, 0),
                      config.calibration_shots, derive_stream(config.seed, calibration_circuit_stream));
        if (config.scenario == Scenario::decoherence) cal_hist = marginalize(cal_hist, {0, 1});
        cal_hist = pad_to_two_slots(cal_hist);
        if (config.noise)
            cal_hist = apply_noise_channel(cal_hist, config.noise->noise,
                                           derive_stream(config.seed, calibration_channel_stream),
                                           config.noise->independent_flips
                                               ? ChannelModel::independent_flips
                                               : ChannelModel::matrix);
        report.calibration = calibrate_from_zero_baseline(cal_hist, config.initial);
        mitigation_matrix = build_mitigation_matrix(report.calibration->noise());
    }

    const bool two_state = is_two_state(config);
    for (int i = 0; i < config.scan.n_points; ++i) {
        ScanPoint point;
        point.axis_value = axis_value_at(config.scan, i);
        axis_kinematics(config, point.axis_value, point.l_km, point.e_gev);

        const Circuit circuit = build_scenario_circuit(config, point.l_km, point.e_gev);
        point.exact = exact_probabilities(config, circuit);
        point.oracle = oracle_probabilities(config, point.l_km, point.e_gev);

        CountsHistogram hist =
            run_shots(circuit, make_basis_state(circuit.n_qubits, 0), config.shots,
                      derive_stream(config.seed, 3 * static_cast<std::uint64_t>(i)));
        if (config.scenario == Scenario::decoherence) hist = marginalize(hist, {0, 1});
        {
            const std::vector<double> p = to_probabilities(hist);
            for (std::size_t k = 0; k < p.size(); ++k) point.sampled[k] = p[k];
        }
        for (int f = 0; f < 4; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            if (!point.sampled[fi]) continue;
            const double ps = *point.sampled[fi];
            double variance = ps * (1.0 - ps) / static_cast<double>(config.shots);
            // Optional flat term representing accumulated per-gate infidelity,
            // reported alongside the binomial error, never applied to data.
            if (config.include_gate_error_term) variance += 50e-6;
            point.stat_err[fi] = std::sqrt(variance);
        }

        if (config.noise) {
            const CountsHistogram noisy = apply_noise_channel(
                pad_to_two_slots(hist), config.noise->noise,
                derive_stream(config.seed, 3 * static_cast<std::uint64_t>(i) + 1),
                config.noise->independent_flips ? ChannelModel::independent_flips
                                                : ChannelModel::matrix);
            const std::vector<double> p = to_probabilities(noisy);
            for (std::size_t k = 0; k < 4; ++k) point.noisy[k] = p[k];
            if (config.mitigation) {
                const MitigationOutcome outcome = mitigate(noisy, mitigation_matrix);
                for (std::size_t k = 0; k < 4; ++k) point.mitigated[k] = outcome.p[k];
                point.mitigated_raw = outcome.raw;
                point.mitigated_clamped = outcome.clamped;
            }
        } else if (config.mitigation) {
            const MitigationOutcome outcome = mitigate(pad_to_two_slots(hist), mitigation_matrix);
            for (std::size_t k = 0; k < 4; ++k) point.mitigated[k] = outcome.p[k];
            point.mitigated_raw = outcome.raw;
            point.mitigated_clamped = outcome.clamped;
        }

        if (two_state) {
            // Flavors outside the two-state model carry no exact/sampled/
            // oracle values; the noise channel still populates their outcome
            // bins, so noisy and mitigated entries stay.
            point.exact[2].reset();
            point.exact[3].reset();
            point.sampled[2].reset();
            point.sampled[3].reset();
            point.stat_err[2].reset();
            point.stat_err[3].reset();
        }
        report.points.push_back(point);
    }
    return report;
}

std::string report_to_csv(const ScanReport& report) {
    std::string out =
        "scenario,axis_name,axis_value,flavor,p_exact,p_sampled,p_noisy,p_mitigated,p_oracle,"
        "stat_err\n";
    const char* scenario = scenario_name(report.config.scenario);
    const char* axis = axis_name(report.config.scan.axis);
    for (const ScanPoint& point : report.points) {
        for (int f = 0; f < 4; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            out += scenario;
            out += ',';
            out += axis;
            out += ',';
            out += fmt_g(point.axis_value);
            out += ',';
            out += flavor_name(flavor_from_index(f));
            out += ',';
            out += csv_cell(point.exact[fi]);
            out += ',';
            out += csv_cell(point.sampled[fi]);
            out += ',';
            out += csv_cell(point.noisy[fi]);
            out += ',';
            out += csv_cell(point.mitigated[fi]);
            out += ',';
            out += csv_cell(point.oracle[fi]);
            out += ',';
            out += csv_cell(point.stat_err[fi]);
            out += '\n';
        }
    }
    return out;
}

std::string report_to_json(const ScanReport& report) {
    ordered_json j;
    j["schema_version"] = report_schema_version;
    j["tool_version"] = tool_version;
    j["config"] = config_to_json(report.config);
    if (report.calibration) {
        ordered_json cal;
        cal["f1"] = report.calibration->f1;
        cal["f2"] = report.calibration->f2;
        cal["f1_err"] = report.calibration->f1_err;
        cal["f2_err"] = report.calibration->f2_err;
        cal["n_calibration_shots"] = report.calibration->n_shots;
        cal["non_physical"] = report.calibration->non_physical;
        j["calibration"] = cal;
    } else {
        j["calibration"] = nullptr;
    }
    ordered_json points = ordered_json::array();
    for (const ScanPoint& point : report.points) {
        ordered_json p;
        p["axis_value"] = point.axis_value;
        p["L"] = point.l_km;
        p["E"] = point.e_gev;
        ordered_json flavors;
        for (int f = 0; f < 4; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            ordered_json entry;
            const auto put = [&entry](const char* key, const std::optional<double>& value) {
                if (value) entry[key] = *value;
            };
            put("exact", point.exact[fi]);
            put("sampled", point.sampled[fi]);
            put("noisy", point.noisy[fi]);
            put("mitigated", point.mitigated[fi]);
            put("oracle", point.oracle[fi]);
            put("stat_err", point.stat_err[fi]);
            if (!entry.empty()) flavors[flavor_name(flavor_from_index(f))] = entry;
        }
        p["flavors"] = flavors;
        if (point.mitigated[0]) {
            p["mitigated_raw"] = point.mitigated_raw;
            p["mitigated_clamped"] = point.mitigated_clamped;
        }
        points.push_back(p);
    }
    j["points"] = points;
    return j.dump(2) + "\n";
}

std::string report_to_gnuplot(const ScanReport& report, const std::string& csv_filename) {
    const ScanAxis axis = report.config.scan.axis;
    const char* label = axis == ScanAxis::l_km      ? "L [km]"
                        : axis == ScanAxis::e_gev   ? "E [GeV]"
                                                    : "L/E [km/GeV]";
    std::string out;
    out += "# plots " + csv_filename + "\n";
    out += "set datafile separator \",\"\n";
    out += "set datafile missing \"\"\n";
    out += "set xlabel \"" + std::string(label) + "\"\n";
    out += "set ylabel \"probability\"\n";
    out += "set yrange [-0.05:1.05]\n";
    out += "set key outside\n";
    out += "plot \\\n";
    bool first = true;
    for (const char* flavor : {"e", "mu", "tau", "x"}) {
        if (!first) out += ", \\\n";
        first = false;
        const std::string match = "strcol(4) eq \"" + std::string(flavor) + "\"";
        out += "  '" + csv_filename + "' using (" + match + " ? $3 : 1/0):5 with lines title \"P(" +
               flavor + ") exact\"";
        out += ", \\\n  '" + csv_filename + "' using (" + match +
               " ? $3 : 1/0):6 with points pt 6 title \"P(" + flavor + ") sampled\"";
        if (report.config.mitigation)
            out += ", \\\n  '" + csv_filename + "' using (" + match +
                   " ? $3 : 1/0):8 with points pt 4 title \"P(" + flavor + ") mitigated\"";
    }
    out += "\n";
    return out;
}

void write_report(const ScanReport& report, const ReportPaths& paths) {
    const auto write_file = [](const std::string& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << content;
        if (!out) throw std::runtime_error("write failed for " + path);
    };
    if (!paths.csv.empty()) write_file(paths.csv, report_to_csv(report));
    if (!paths.json.empty()) write_file(paths.json, report_to_json(report));
    if (!paths.gnuplot.empty()) {
        std::string csv_name = paths.csv;
        const std::size_t slash = csv_name.find_last_of('/');
        if (slash != std::string::npos) csv_name = csv_name.substr(slash + 1);
        write_file(paths.gnuplot, report_to_gnuplot(report, csv_name));
    }
}

}  // namespace nuosc
