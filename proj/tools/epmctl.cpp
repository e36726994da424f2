// epmctl: experiment harness CLI for the EPM connector toolkit.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epm/errors.hpp"
#include "epm/harness.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string params_path;
    std::string out_dir = "out";
};

epm::Config load_config(const GlobalOpts& g) {
    if (g.config_path.empty()) return epm::harness::default_config();
    epm::Config cfg = epm::Config::from_file(g.config_path);
    if (cfg.empty()) throw epm::UsageError("config file is empty: " + g.config_path);
    return cfg;
}

epm::harness::Params load_params(const GlobalOpts& g) {
    if (g.params_path.empty()) return epm::harness::default_params();
    return epm::harness::load_params(g.params_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EPM connector simulation and calibration toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags are accepted after the subcommand too

    GlobalOpts g;
    app.add_option("--config", g.config_path, "structured config file (INI sections)");
    app.add_option("--params", g.params_path, "calibrated parameter file (JSON)");
    app.add_option("--out", g.out_dir, "output directory");

    auto* winding = app.add_subcommand("winding-compare", "flux density vs drive voltage per winding");
    auto* force_gap = app.add_subcommand("force-gap", "holding force vs air gap curve");
    auto* pulse = app.add_subcommand("pulse", "switching pulse energy and polarization outcome");
    double pulse_v = -1, pulse_i = -1, pulse_ms = -1;
    pulse->add_option("--voltage", pulse_v, "pulse voltage (V)");
    pulse->add_option("--current", pulse_i, "pulse current (A)");
    pulse->add_option("--duration-ms", pulse_ms, "pulse duration (ms)");

    auto* dock = app.add_subcommand("dock", "self-alignment success map sweep");
    double alpha = -1;
    dock->add_option("--alpha", alpha, "platform tilt (deg)");

    auto* fluid = app.add_subcommand("fluid", "fluid transfer efficiency");
    std::string fluid_mode;
    double fluid_inlet = -1;
    fluid->add_option("--mode", fluid_mode, "parallel | dual | loop");
    fluid->add_option("--inlet", fluid_inlet, "inlet flow rate (ml/min)");

    auto* flex = app.add_subcommand("flex", "mechanical flexibility envelope");
    auto* protocol = app.add_subcommand("protocol", "connection protocol trace");
    std::string script_path;
    protocol->add_option("--script", script_path, "event script (time_ms connector event)");

    auto* calibrate = app.add_subcommand("calibrate", "fit model parameters to measurement data");
    std::string target, data_path;
    calibrate->add_option("target", target, "force | dock | fluid | flex")->required();
    calibrate->add_option("--data", data_path, "measurement CSV (fixture default)");

    auto* report_cmd = app.add_subcommand("report", "consolidated model-vs-reference table");

    try {
        app.parse(argc, argv);

        epm::Config cfg = load_config(g);
        // calibrate creates the parameter file when it does not exist yet
        epm::harness::Params params =
            (*calibrate && !std::filesystem::exists(g.params_path))
                ? epm::harness::default_params()
                : load_params(g);

        auto run = [&](const std::string& name) {
            auto manifest = epm::harness::run_experiment(name, cfg, params, g.out_dir);
            for (const auto& [path, digest] : manifest.outputs)
                std::printf("wrote %s (%s)\n", path.c_str(), digest.c_str());
        };

        if (*winding) run("winding");
        if (*force_gap) run("force_gap");
        if (*pulse) {
            if (pulse_v >= 0) cfg.set("pulse", "voltage_V", std::to_string(pulse_v));
            if (pulse_i >= 0) cfg.set("pulse", "current_A", std::to_string(pulse_i));
            if (pulse_ms >= 0) cfg.set("pulse", "duration_ms", std::to_string(pulse_ms));
            run("pulse");
        }
        if (*dock) {
            if (alpha >= 0) cfg.set("dock", "alpha_deg", std::to_string(alpha));
            run("dock");
        }
        if (*fluid) {
            if (!fluid_mode.empty()) cfg.set("fluid", "mode", fluid_mode);
            if (fluid_inlet >= 0) cfg.set("fluid", "inlet_ml_min", std::to_string(fluid_inlet));
            run("fluid");
        }
        if (*flex) run("flex");
        if (*protocol) {
            if (!script_path.empty()) cfg.set("protocol", "script", script_path);
            run("protocol");
        }
        if (*calibrate) {
            std::string out_path = g.params_path.empty() ? "params.json" : g.params_path;
            std::string summary = epm::harness::calibrate(target, data_path, cfg, params, out_path);
            std::printf("%s\nwrote %s\n", summary.c_str(), out_path.c_str());
        }
        if (*report_cmd) {
            auto rep = epm::harness::report(g.out_dir);
            std::printf("wrote %s/report.csv (%zu rows)\n", g.out_dir.c_str(), rep.rows.size());
            if (!rep.complete) {
                std::fprintf(stderr, "report: some experiments are absent\n");
                return 1;
            }
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors exit 2
    } catch (const epm::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
