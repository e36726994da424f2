// Experiment harness: named experiment runs with manifests, calibration
// entry points and the consolidated model-vs-reference report.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "epm/compliance.hpp"
#include "epm/config.hpp"
#include "epm/docking.hpp"
#include "epm/fluidics.hpp"
#include "epm/force.hpp"
#include "epm/magnetics.hpp"

namespace epm::harness {

inline constexpr const char* kToolVersion = "epmkit 1.0.0";

// Calibrated model parameters consumed by the experiments. The shipped
// defaults come from running `epmctl calibrate` on the bundled fixtures.
struct Params {
    force::ForceCalibration force_calib;
    double force_rmse_N = 0;
    int force_iterations = 0;

    fluidics::LossParams fluid;

    double dock_gravity_load_N = 0;
    double dock_spring_restoring_N_m = 0;

    compliance::FlexTargets flex_targets;
};

Params default_params();
Params load_params(const std::string& path);
void save_params(const Params& params, const std::string& path);

Config default_config();

// Assembly/geometry loaders shared by experiments and tests.
magnetics::EPMAssembly assembly_from_config(const Config& cfg);
docking::DockGeometry dock_geometry_from_config(const Config& cfg);
docking::DockingParams dock_params_from_config(const Config& cfg, const Params& params);
fluidics::FluidGeometry fluid_geometry_from_config(const Config& cfg);
compliance::ForceModel force_model(const magnetics::EPMAssembly& assembly,
                                   const force::ForceCalibration& calib);

std::uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

struct RunManifest {
    std::string tool_version;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> outputs; // (path, digest)
    double wall_time_s = 0;

    bool verify() const; // every listed output exists and matches its digest
};

inline constexpr std::array<const char*, 7> kExperiments = {
    "winding", "force_gap", "pulse", "dock", "fluid", "flex", "protocol"};

// Dispatches to the owning module and writes outputs plus
// <experiment>.manifest.json under out_dir. Identical config and parameters
// produce byte-identical outputs.
RunManifest run_experiment(const std::string& experiment, const Config& cfg, const Params& params,
                           const std::string& out_dir);

// Runs the owning module's calibration on `data_path` (fixture defaults when
// empty) and writes the updated parameter file; returns a fit summary line.
std::string calibrate(const std::string& target, const std::string& data_path, const Config& cfg,
                      Params& params, const std::string& params_out_path);

struct ReportRow {
    std::string quantity;
    double paper_value = 0;
    double model_value = 0;
    double rel_error = 0;
    bool present = false;
};

struct Report {
    std::vector<ReportRow> rows;
    bool complete = true;
};

// Consolidated comparison table over a directory of experiment outputs;
// writes report.csv there. Missing quantities are listed as absent.
Report report(const std::string& out_dir);

} // namespace epm::harness
