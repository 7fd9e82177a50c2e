#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nuosc/circuit.hpp"
#include "nuosc/flavor.hpp"
#include "nuosc/flavor_circuits.hpp"
#include "nuosc/mitigation.hpp"
#include "nuosc/oracle.hpp"

// Scenario configs in, scan data out. A RunConfig describes one experiment
// family (scenario + physics + scan axis + shot budget); run_scan produces the
// per-point probability table in every requested mode, and write_report
// serializes it as CSV and JSON (plus an optional gnuplot script).

namespace nuosc {

inline constexpr int report_schema_version = 1;
inline constexpr const char* tool_version = "0.1.0";

enum class Scenario { two_flavor, three_flavor, sterile, decoherence, matter, nsi, lv };
enum class ScanAxis { l_km, e_gev, l_over_e };
enum class ScanSpacing { linear, log };

const char* scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);
const char* axis_name(ScanAxis a);
ScanAxis parse_axis(const std::string& name);

struct ScanSpec {
    ScanAxis axis = ScanAxis::l_over_e;
    double min = 0.0;
    double max = 0.0;
    int n_points = 1;
    ScanSpacing spacing = ScanSpacing::linear;
};

struct NoiseConfig {
    ReadoutNoise noise;
    // Swaps the calibrated-matrix channel for the plain per-qubit flip model;
    // mitigation then corrects a slightly different channel than the one
    // injected, which is the point of the sensitivity study.
    bool independent_flips = false;
};

// Parsed and validated experiment description. Physics fields are flat; the
// loader fills the ones its scenario uses and leaves the rest at defaults.
struct RunConfig {
    Scenario scenario = Scenario::two_flavor;
    FlavorLabel initial = FlavorLabel::e;
    ScanSpec scan;
    std::uint64_t shots = 1024;
    std::uint64_t seed = 0;
    std::uint64_t calibration_shots = 1024;
    std::optional<NoiseConfig> noise;
    bool mitigation = false;
    bool include_gate_error_term = false;
    std::string output_prefix;

    // two_flavor, matter, nsi, lv
    double theta = 0.0;
    double dm2 = 0.0;
    // three_flavor, sterile, decoherence
    double dm2_21 = 0.0;
    double dm2_31 = 0.0;
    double dm2_41 = 0.0;
    GateTemplateParams pmns;               // resolved at load time
    std::array<double, 16> sterile_mixing{};
    // decoherence
    double gamma_per_km = 0.0;
    int n_steps = 16;
    // matter, nsi
    double n_e_cm3 = 0.0;
    double eps_ee = 0.0;
    // lv: 2x2 real symmetric coefficient matrices, row-major; all-zero when
    // the config omits them
    std::array<double, 4> lv_a3{};
    std::array<double, 4> lv_c4{};
    std::array<double, 4> lv_a5{};
    std::array<double, 4> lv_c6{};
    // fixed off-axis kinematics (whichever the axis does not sweep)
    double fixed_l_km = 0.0;
    double fixed_e_gev = 1.0;
};

// Parses and validates a JSON config. Unknown keys anywhere in the document
// are rejected with the offending key named; missing required fields and
// out-of-range values name the field. The NUOSC_SEED environment variable,
// when set, overrides the config's seed.
RunConfig load_config(const std::string& path);
RunConfig load_config_from_string(const std::string& text, const std::string& origin);

// One scan point. Each per-flavor slot is empty when that mode or flavor does
// not apply (no noise configured, flavor outside a two-state scenario, ...).
struct ScanPoint {
    double axis_value = 0.0;
    double l_km = 0.0;
    double e_gev = 0.0;
    std::array<std::optional<double>, 4> exact;
    std::array<std::optional<double>, 4> sampled;
    std::array<std::optional<double>, 4> noisy;
    std::array<std::optional<double>, 4> mitigated;
    std::array<std::optional<double>, 4> oracle;
    std::array<std::optional<double>, 4> stat_err;
    // unclamped mitigation solve, kept for the JSON report
    std::array<double, 4> mitigated_raw{};
    bool mitigated_clamped = false;
};

struct ScanReport {
    RunConfig config;
    std::optional<CalibrationResult> calibration;
    std::vector<ScanPoint> points;
};

// (L, E) kinematics for one axis value.
void axis_kinematics(const RunConfig& config, double axis_value, double& l_km, double& e_gev);

// The measurement circuit run at one scan point; also what export-qasm
// serializes.
Circuit build_scenario_circuit(const RunConfig& config, double l_km, double e_gev);

// Reference probabilities for one point from the oracle module (closed forms
// and diagonalization, no circuits). Entries for flavors outside the
// scenario's space stay empty.
std::array<std::optional<double>, 4> oracle_probabilities(const RunConfig& config, double l_km,
                                                          double e_gev);

// Runs the full scan: per point, exact probabilities, sampled shots, then the
// optional noise channel and mitigation. When mitigation is on, a zero-
// baseline calibration run (calibration_shots shots through the same noise
// channel) is performed first and its fitted rates are what mitigation
// inverts. Per-point RNG streams are derived from the config seed and the
// point index, so results do not depend on evaluation order.
ScanReport run_scan(const RunConfig& config);

// Serialized forms. CSV columns:
// scenario,axis_name,axis_value,flavor,p_exact,p_sampled,p_noisy,p_mitigated,p_oracle,stat_err
// with one row per flavor per point and empty fields for absent values;
// numbers are printed with 12 significant digits, so a rerun with the same
// config and seed is byte-identical.
std::string report_to_csv(const ScanReport& report);
std::string report_to_json(const ScanReport& report);
std::string report_to_gnuplot(const ScanReport& report, const std::string& csv_filename);

struct ReportPaths {
    std::string csv;      // empty = skip
    std::string json;     // empty = skip
    std::string gnuplot;  // empty = skip
};

void write_report(const ScanReport& report, const ReportPaths& paths);

}  // namespace nuosc
