#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nuosc/acceptance.hpp"
#include "nuosc/harness.hpp"
#include "nuosc/mitigation.hpp"
#include "nuosc/pmns_fit.hpp"
#include "nuosc/qasm.hpp"
#include "nuosc/rng.hpp"

namespace {

nuosc::TargetUnitary load_target(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open target file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    nuosc::TargetUnitary target;
    // Accept either a flat array of 16 numbers or a 4x4 nested array.
    if (doc.is_array() && doc.size() == 16) {
        for (int k = 0; k < 16; ++k) {
            if (!doc.at(static_cast<std::size_t>(k)).is_number())
                throw std::runtime_error(path + ": target entries must be numbers");
            target.m[static_cast<std::size_t>(k)] = doc.at(static_cast<std::size_t>(k)).get<double>();
        }
        return target;
    }
    if (doc.is_array() && doc.size() == 4) {
        for (int r = 0; r < 4; ++r) {
            const auto& row = doc.at(static_cast<std::size_t>(r));
            if (!row.is_array() || row.size() != 4)
                throw std::runtime_error(path + ": target rows must hold 4 numbers");
            for (int c = 0; c < 4; ++c) {
                if (!row.at(static_cast<std::size_t>(c)).is_number())
                    throw std::runtime_error(path + ": target entries must be numbers");
                target.m[static_cast<std::size_t>(r * 4 + c)] =
                    row.at(static_cast<std::size_t>(c)).get<double>();
            }
        }
        return target;
    }
    throw std::runtime_error(path + ": target must be a flat 16-number array or a 4x4 array");
}

int cmd_run(const std::string& config_path, const CLI::Option* seed_opt, std::uint64_t seed,
            const CLI::Option* shots_opt, std::uint64_t shots, const std::string& out_dir,
            bool no_mitigation, bool gnuplot_script) {
    nuosc::RunConfig config = nuosc::load_config(config_path);
    if (seed_opt->count() > 0) config.seed = seed;
    if (shots_opt->count() > 0) {
        if (shots < 1) throw std::runtime_error("--shots must be >= 1");
        config.shots = shots;
    }
    if (no_mitigation) config.mitigation = false;

    const nuosc::ScanReport report = nuosc::run_scan(config);

    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/" + config.output_prefix;
    nuosc::ReportPaths paths;
    paths.csv = base + ".csv";
    paths.json = base + ".json";
    if (gnuplot_script) paths.gnuplot = base + ".gp";
    nuosc::write_report(report, paths);

    std::printf("scenario %s, initial %s, %d points, %llu shots, seed %llu\n",
                nuosc::scenario_name(config.scenario), nuosc::flavor_name(config.initial),
                config.scan.n_points, static_cast<unsigned long long>(config.shots),
                static_cast<unsigned long long>(config.seed));
    if (report.calibration) {
        std::printf("calibration: f1 = %.5f +- %.5f, f2 = %.5f +- %.5f%s\n",
                    report.calibration->f1, report.calibration->f1_err, report.calibration->f2,
                    report.calibration->f2_err,
                    report.calibration->non_physical ? " (outside [0, 0.5], clamped)" : "");
    }
    std::printf("wrote %s\n", paths.csv.c_str());
    std::printf("wrote %s\n", paths.json.c_str());
    if (gnuplot_script) std::printf("wrote %s\n", paths.gnuplot.c_str());
    return 0;
}

int cmd_fit_pmns(const CLI::Option* target_opt, const std::string& target_path,
                 const CLI::Option* seed_params_opt, const std::string& seed_params,
                 std::uint64_t seed) {
    nuosc::TargetUnitary target =
        target_opt->count() > 0 ? load_target(target_path) : nuosc::reference_mixing_matrix();
    nuosc::FitOptions options;
    options.seed = seed;
    if (seed_params_opt->count() > 0) {
        if (seed_params != "reference")
            throw std::runtime_error("--seed-params accepts only \"reference\"");
        options.seed_params = nuosc::reference_mixing_angles();
    }

    const auto start = std::chrono::steady_clock::now();
    const nuosc::FitResult result = nuosc::fit(target, options);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::printf("angles:");
    for (double a : result.params.angles) std::printf(" %.10g", a);
    std::printf("\n");
    // ready to paste into a config's params block
    std::printf("\"pmns_angles\": [");
    for (std::size_t i = 0; i < result.params.angles.size(); ++i)
        std::printf("%s%.17g", i == 0 ? "" : ", ", result.params.angles[i]);
    std::printf("]\n");
    std::printf("residual        %.6e\n", result.residual);
    std::printf("max elem error  %.6e\n", result.max_elem_error);
    std::printf("iterations      %d\n", result.iterations);
    std::printf("converged       %s\n", result.converged ? "yes" : "no");
    std::printf("runtime         %.3f s\n", elapsed);
    return result.converged ? 0 : 1;
}

int cmd_calibrate(const std::string& config_path) {
    nuosc::RunConfig config = nuosc::load_config(config_path);
    // Zero-baseline run through the configured noise channel, mirroring what
    // run_scan does before a mitigated scan.
    config.mitigation = true;
    config.scan.n_points = 1;
    config.scan.min = 0.0;
    config.scan.max = 0.0;
    if (config.scan.axis == nuosc::ScanAxis::e_gev) {
        config.scan.axis = nuosc::ScanAxis::l_over_e;
        config.scan.min = 0.0;
        config.scan.max = 0.0;
    }
    const nuosc::ScanReport report = nuosc::run_scan(config);
    if (!report.calibration) throw std::runtime_error("calibration did not run");
    const nuosc::CalibrationResult& cal = *report.calibration;
    std::printf("f1 = %.6f +- %.6f\n", cal.f1, cal.f1_err);
    std::printf("f2 = %.6f +- %.6f\n", cal.f2, cal.f2_err);
    std::printf("shots = %llu\n", static_cast<unsigned long long>(cal.n_shots));
    if (cal.non_physical)
        std::printf("warning: estimates fell outside [0, 0.5] and were clamped for use\n");
    return 0;
}

int cmd_export_qasm(const std::string& config_path) {
    const nuosc::RunConfig config = nuosc::load_config(config_path);
    double l_km = 0.0, e_gev = 0.0;
    nuosc::axis_kinematics(config, config.scan.min, l_km, e_gev);
    const nuosc::Circuit circuit = nuosc::build_scenario_circuit(config, l_km, e_gev);
    std::fputs(nuosc::export_qasm(circuit).c_str(), stdout);
    return 0;
}

int cmd_selftest() {
    const auto results = nuosc::run_acceptance();
    int failures = 0;
    for (const auto& r : results) {
        std::printf("[%s] %2d %s: %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str());
        if (!r.passed) ++failures;
    }
    std::printf("%zu/%zu criteria passed\n", results.size() - static_cast<std::size_t>(failures),
                results.size());
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-circuit simulation of neutrino flavor oscillation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::uint64_t shots = 0;
    bool no_mitigation = false;
    bool gnuplot_script = false;

    auto* run_cmd = app.add_subcommand("run", "run a scan from a JSON config and write reports");
    run_cmd->add_option("config", config_path, "JSON config file")->required();
    auto* run_seed = run_cmd->add_option("--seed", seed, "override the RNG seed");
    auto* run_shots = run_cmd->add_option("--shots", shots, "override shots per point");
    run_cmd->add_option("--out-dir", out_dir, "directory for report files (default .)");
    run_cmd->add_flag("--no-mitigation", no_mitigation, "disable readout mitigation");
    run_cmd->add_flag("--gnuplot-script", gnuplot_script, "also emit a gnuplot script");

    std::string target_path;
    std::string seed_params_value;
    std::uint64_t fit_seed = 0;
    auto* fit_cmd = app.add_subcommand("fit-pmns", "fit the six-angle gate template to a matrix");
    auto* target_opt =
        fit_cmd->add_option("--target", target_path, "JSON file with a 4x4 target matrix");
    auto* seed_params_opt = fit_cmd->add_option(
        "--seed-params", seed_params_value,
        "start from named angles (\"reference\") instead of random restarts");
    fit_cmd->add_option("--seed", fit_seed, "restart RNG seed");

    std::string calibrate_path;
    auto* cal_cmd =
        app.add_subcommand("calibrate", "estimate readout flip rates from a zero-baseline run");
    cal_cmd->add_option("config", calibrate_path, "JSON config file")->required();

    std::string qasm_path;
    auto* qasm_cmd =
        app.add_subcommand("export-qasm", "print the scan circuit at the first point as OpenQASM");
    qasm_cmd->add_option("config", qasm_path, "JSON config file")->required();

    auto* selftest_cmd = app.add_subcommand("selftest", "run the acceptance criteria");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(config_path, run_seed, seed, run_shots, shots, out_dir, no_mitigation,
                           gnuplot_script);
        if (fit_cmd->parsed())
            return cmd_fit_pmns(target_opt, target_path, seed_params_opt, seed_params_value,
                                fit_seed);
        if (cal_cmd->parsed()) return cmd_calibrate(calibrate_path);
        if (qasm_cmd->parsed()) return cmd_export_qasm(qasm_path);
        if (selftest_cmd->parsed()) return cmd_selftest();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
