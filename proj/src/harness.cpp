#include "epm/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "epm/csv.hpp"
#include "epm/errors.hpp"
#include "epm/coupling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace epm::harness {

namespace {

constexpr const char* kDefaultIni = R"ini(
[run]
# reserved for stochastic sampling; every shipped experiment is deterministic
seed = 0

[assembly]
alnico_coercivity_A_per_m = 48000
alnico_remanence_T = 1.26
alnico_recoil_permeability = 3.0
alnico_length_m = 0.007
alnico_diameter_m = 0.005
ndfeb_coercivity_A_per_m = 870000
ndfeb_remanence_T = 1.17
ndfeb_recoil_permeability = 1.05
ndfeb_length_m = 0.007
ndfeb_diameter_m = 0.005
coil_turns = 120
coil_resistance_ohm = 3.0
coil_wire_diameter_m = 0.00015
gap_thickness_m = 0.0005
gap_area_m2 = 4.885e-5

[winding]
# the winding-comparison prototypes used 130-turn coils trimmed to 2 ohms
coil_turns = 130
coil_resistance_ohm = 2.0
voltage_min = 0
voltage_max = 30
points = 20

[pulse]
voltage_V = 30
current_A = 10
duration_ms = 1

[force]
fixture = data/force_gap_measurements.csv
gap_max_mm = 1.0
gap_step_mm = 0.1

[dock]
alpha_deg = 0
spacing_mm = 5
dipoles_per_arc = 16
arc_radius_m = 0.011
arc_half_span_deg = 75
arc_moment_A_m2 = 0.06
epm_moment_A_m2 = 0.10
arc_recess_m = 0.005
epm_recess_m = 0.006
face_radius_m = 0.018
bend_arm_m = 0.14
capture_threshold_m = 0.0015
bearing_friction_torque_Nm = 2e-06
rotor_damping = 0.01
alignment_tolerance_deg = 10
descent_step_m = 0.0025
initial_rotor_angle_deg = 60
slide_steps = 6
workers = 4

[fluid]
fixture = data/fluid_operating_points.csv
tube_length_m = 0.15
tank_equivalent_length_m = 0.05
rotary_equivalent_length_m = 0.02
port_half_equivalent_length_m = 0.01

[flex]
axial_target_mm = 20
bend_target_deg = 30
lateral_target_mm = 6
distance_target_mm = 132
fluidic_angular_target_deg = 20

[protocol]
script =
)ini";

// shipped calibrated defaults; regenerate with `epmctl calibrate <target>`
constexpr double kForceLeakage = 0.51929662421474254;
constexpr double kForceResidualGap = 0.00016366200988743014;
constexpr double kForceRmse = 0.39885310181575417;
constexpr int kForceIterations = 11;
constexpr double kFluidLeakLoop = 2.3323732506268653e-10;
constexpr double kFluidLeakDual = 5.3442794450074098e-11;
constexpr double kDockGravity = 0.00059750000000000005;
constexpr double kDockSpring = 0.41999999999999998;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Params default_params() {
    Params p;
    p.force_calib.leakage_fraction = kForceLeakage;
    p.force_calib.residual_gap_m = kForceResidualGap;
    p.force_rmse_N = kForceRmse;
    p.force_iterations = kForceIterations;
    p.fluid.leak_conductance_loop = kFluidLeakLoop;
    p.fluid.leak_conductance_dual = kFluidLeakDual;
    p.dock_gravity_load_N = kDockGravity;
    p.dock_spring_restoring_N_m = kDockSpring;
    return p;
}

Params load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open parameter file: " + path);
    json j;
    in >> j;
    Params p = default_params();
    if (j.contains("force")) {
        const auto& f = j["force"];
        p.force_calib.leakage_fraction = f.value("leakage_fraction", p.force_calib.leakage_fraction);
        p.force_calib.residual_gap_m = f.value("residual_gap_m", p.force_calib.residual_gap_m);
        p.force_calib.effective_area_m2 = f.value("effective_area_m2", p.force_calib.effective_area_m2);
        p.force_calib.residual_force_floor_N =
            f.value("residual_force_floor_N", p.force_calib.residual_force_floor_N);
        p.force_rmse_N = f.value("rmse_N", p.force_rmse_N);
        p.force_iterations = f.value("iterations", p.force_iterations);
    }
    if (j.contains("fluid")) {
        const auto& f = j["fluid"];
        p.fluid.leak_conductance_loop = f.value("leak_conductance_loop", p.fluid.leak_conductance_loop);
        p.fluid.leak_conductance_dual = f.value("leak_conductance_dual", p.fluid.leak_conductance_dual);
    }
    if (j.contains("dock")) {
        const auto& d = j["dock"];
        p.dock_gravity_load_N = d.value("gravity_load_N", p.dock_gravity_load_N);
        p.dock_spring_restoring_N_m = d.value("spring_restoring_N_m", p.dock_spring_restoring_N_m);
    }
    if (j.contains("flex")) {
        const auto& f = j["flex"];
        p.flex_targets.axial_extension_m = f.value("axial_target_m", p.flex_targets.axial_extension_m);
        p.flex_targets.bend_angle_deg = f.value("bend_target_deg", p.flex_targets.bend_angle_deg);
        p.flex_targets.lateral_offset_m = f.value("lateral_target_m", p.flex_targets.lateral_offset_m);
        p.flex_targets.connection_distance_m =
            f.value("distance_target_m", p.flex_targets.connection_distance_m);
        p.flex_targets.fluidic_angular_deg =
            f.value("fluidic_angular_target_deg", p.flex_targets.fluidic_angular_deg);
    }
    return p;
}

void save_params(const Params& p, const std::string& path) {
    json j;
    j["force"] = {{"leakage_fraction", p.force_calib.leakage_fraction},
                  {"residual_gap_m", p.force_calib.residual_gap_m},
                  {"effective_area_m2", p.force_calib.effective_area_m2},
                  {"residual_force_floor_N", p.force_calib.residual_force_floor_N},
                  {"rmse_N", p.force_rmse_N},
                  {"iterations", p.force_iterations}};
    j["fluid"] = {{"leak_conductance_loop", p.fluid.leak_conductance_loop},
                  {"leak_conductance_dual", p.fluid.leak_conductance_dual}};
    j["dock"] = {{"gravity_load_N", p.dock_gravity_load_N},
                 {"spring_restoring_N_m", p.dock_spring_restoring_N_m}};
    j["flex"] = {{"axial_target_m", p.flex_targets.axial_extension_m},
                 {"bend_target_deg", p.flex_targets.bend_angle_deg},
                 {"lateral_target_m", p.flex_targets.lateral_offset_m},
                 {"distance_target_m", p.flex_targets.connection_distance_m},
                 {"fluidic_angular_target_deg", p.flex_targets.fluidic_angular_deg}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write parameter file: " + path);
    out << j.dump(2) << "\n";
}

Config default_config() { return Config::from_string(kDefaultIni); }

magnetics::EPMAssembly assembly_from_config(const Config& cfg) {
    using namespace magnetics;
    EPMAssembly a = make_default_assembly();
    auto seg = [&cfg](MagnetSegment& s, const std::string& prefix) {
        s.material.coercivity_A_per_m =
            cfg.get_double("assembly", prefix + "_coercivity_A_per_m", s.material.coercivity_A_per_m);
        s.material.remanence_T = cfg.get_double("assembly", prefix + "_remanence_T", s.material.remanence_T);
        s.material.recoil_permeability =
            cfg.get_double("assembly", prefix + "_recoil_permeability", s.material.recoil_permeability);
        s.length_m = cfg.get_double("assembly", prefix + "_length_m", s.length_m);
        double d = cfg.get_double("assembly", prefix + "_diameter_m", 0.005);
        s.cross_section_m2 = kPi * d * d / 4.0;
    };
    seg(a.alnico, "alnico");
    seg(a.ndfeb, "ndfeb");
    a.coil.turns = cfg.get_int("assembly", "coil_turns", a.coil.turns);
    a.coil.resistance_ohm = cfg.get_double("assembly", "coil_resistance_ohm", a.coil.resistance_ohm);
    a.coil.wire_diameter_m = cfg.get_double("assembly", "coil_wire_diameter_m", a.coil.wire_diameter_m);
    double g = cfg.get_double("assembly", "gap_thickness_m", a.gaps[0].thickness_m);
    double area = cfg.get_double("assembly", "gap_area_m2", a.gaps[0].area_m2);
    a.gaps = {AirGapSpec{g, area}, AirGapSpec{g, area}};
    a.saturation_flux_T = a.alnico.material.remanence_T;
    a.validate();
    return a;
}

docking::DockGeometry dock_geometry_from_config(const Config& cfg) {
    docking::DockGeometry g;
    g.dipoles_per_arc = cfg.get_int("dock", "dipoles_per_arc", g.dipoles_per_arc);
    g.arc_radius_m = cfg.get_double("dock", "arc_radius_m", g.arc_radius_m);
    g.arc_half_span_deg = cfg.get_double("dock", "arc_half_span_deg", g.arc_half_span_deg);
    g.arc_moment_A_m2 = cfg.get_double("dock", "arc_moment_A_m2", g.arc_moment_A_m2);
    g.epm_moment_A_m2 = cfg.get_double("dock", "epm_moment_A_m2", g.epm_moment_A_m2);
    g.arc_recess_m = cfg.get_double("dock", "arc_recess_m", g.arc_recess_m);
    g.epm_recess_m = cfg.get_double("dock", "epm_recess_m", g.epm_recess_m);
    g.face_radius_m = cfg.get_double("dock", "face_radius_m", g.face_radius_m);
    g.bend_arm_m = cfg.get_double("dock", "bend_arm_m", g.bend_arm_m);
    g.validate();
    return g;
}

docking::DockingParams dock_params_from_config(const Config& cfg, const Params& params) {
    docking::DockingParams p;
    p.gravity_load_N = params.dock_gravity_load_N;
    p.spring_restoring_N_m = params.dock_spring_restoring_N_m;
    p.capture_threshold_m = cfg.get_double("dock", "capture_threshold_m", p.capture_threshold_m);
    p.bearing_friction_torque_Nm =
        cfg.get_double("dock", "bearing_friction_torque_Nm", p.bearing_friction_torque_Nm);
    p.rotor_damping = cfg.get_double("dock", "rotor_damping", p.rotor_damping);
    p.alignment_tolerance_deg =
        cfg.get_double("dock", "alignment_tolerance_deg", p.alignment_tolerance_deg);
    p.descent_step_m = cfg.get_double("dock", "descent_step_m", p.descent_step_m);
    p.initial_rotor_angle_deg =
        cfg.get_double("dock", "initial_rotor_angle_deg", p.initial_rotor_angle_deg);
    p.slide_steps = cfg.get_int("dock", "slide_steps", p.slide_steps);
    p.validate();
    return p;
}

fluidics::FluidGeometry fluid_geometry_from_config(const Config& cfg) {
    fluidics::FluidGeometry g;
    g.tube_length_m = cfg.get_double("fluid", "tube_length_m", g.tube_length_m);
    g.tank_equivalent_length_m =
        cfg.get_double("fluid", "tank_equivalent_length_m", g.tank_equivalent_length_m);
    g.rotary_equivalent_length_m =
        cfg.get_double("fluid", "rotary_equivalent_length_m", g.rotary_equivalent_length_m);
    g.port_half_equivalent_length_m =
        cfg.get_double("fluid", "port_half_equivalent_length_m", g.port_half_equivalent_length_m);
    return g;
}

compliance::ForceModel force_model(const magnetics::EPMAssembly& assembly,
                                   const force::ForceCalibration& calib) {
    return [assembly, calib](double gap_m) { return force::predict_force(assembly, gap_m, calib); };
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& data) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

std::string params_fingerprint(const Params& p) {
    return fmt(p.force_calib.leakage_fraction) + "," + fmt(p.force_calib.residual_gap_m) + "," +
           fmt(p.fluid.leak_conductance_loop) + "," + fmt(p.fluid.leak_conductance_dual) + "," +
           fmt(p.dock_gravity_load_N) + "," + fmt(p.dock_spring_restoring_N_m);
}

struct ExperimentIO {
    const Config& cfg;
    const Params& params;
    fs::path out_dir;
    std::vector<std::string> written;

    void write(const std::string& name, const std::string& content) {
        fs::path p = out_dir / name;
        write_file(p.string(), content);
        written.push_back(name);
    }
};

std::string json_dump(const json& j) { return j.dump(2) + "\n"; }

void run_winding(ExperimentIO& io) {
    auto assembly = assembly_from_config(io.cfg);
    assembly.coil.turns = io.cfg.get_int("winding", "coil_turns", 130);
    assembly.coil.resistance_ohm = io.cfg.get_double("winding", "coil_resistance_ohm", 2.0);
    const double v0 = io.cfg.get_double("winding", "voltage_min", 0.0);
    const double v1 = io.cfg.get_double("winding", "voltage_max", 30.0);
    const int n = io.cfg.get_int("winding", "points", 20);
    if (n < 1) throw ValidationError("winding points must be >= 1");
    std::vector<double> volts;
    for (int i = 0; i < n; ++i)
        volts.push_back(n == 1 ? v0 : v0 + (v1 - v0) * i / (n - 1));
    auto curves = magnetics::compare_windings(assembly, volts);
    std::ostringstream ss;
    ss << "voltage_V,b_alnico_only_T,b_both_T\n";
    for (size_t i = 0; i < curves.voltage_V.size(); ++i)
        ss << csv_num(curves.voltage_V[i]) << ',' << csv_num(curves.b_alnico_only_T[i]) << ','
           << csv_num(curves.b_both_T[i]) << '\n';
    io.write("winding_compare.csv", ss.str());
}

void run_force_gap(ExperimentIO& io) {
    auto assembly = assembly_from_config(io.cfg);
    const std::string fixture = io.cfg.get_string("force", "fixture", "");
    std::vector<std::pair<double, double>> measured; // gap_mm -> N
    if (!fixture.empty() && fs::exists(fixture)) {
        CsvTable t = read_csv(fixture);
        for (size_t i = 0; i < t.rows.size(); ++i)
            measured.emplace_back(parse_csv_double(t.rows[i][0], long(i + 2)),
                                  parse_csv_double(t.rows[i][1], long(i + 2)));
    }
    const double gmax = io.cfg.get_double("force", "gap_max_mm", 1.0);
    const double gstep = io.cfg.get_double("force", "gap_step_mm", 0.1);
    std::ostringstream ss;
    ss << "gap_mm,force_N_model,force_N_measured\n";
    int steps = static_cast<int>(std::round(gmax / gstep));
    for (int i = 0; i <= steps; ++i) {
        double gap_mm = i * gstep;
        double f = force::predict_force(assembly, gap_mm * 1e-3, io.params.force_calib);
        ss << csv_num(gap_mm) << ',' << csv_num(f) << ',';
        for (auto& [gm, fn] : measured)
            if (std::abs(gm - gap_mm) < 1e-9) ss << csv_num(fn);
        ss << '\n';
    }
    io.write("force_gap_curve.csv", ss.str());
    json fit = {{"leakage_fraction", io.params.force_calib.leakage_fraction},
                {"residual_gap_m", io.params.force_calib.residual_gap_m},
                {"effective_area_m2", io.params.force_calib.effective_area_m2},
                {"rmse_N", io.params.force_rmse_N},
                {"iterations", io.params.force_iterations}};
    io.write("force_fit.json", json_dump(fit));
}

void run_pulse(ExperimentIO& io) {
    magnetics::PulseSpec pulse;
    pulse.voltage_V = io.cfg.get_double("pulse", "voltage_V", 30.0);
    pulse.current_A = io.cfg.get_double("pulse", "current_A", 10.0);
    pulse.duration_s = io.cfg.get_double("pulse", "duration_ms", 1.0) * 1e-3;
    pulse.validate();
    auto assembly = assembly_from_config(io.cfg);
    assembly.alnico.polarization = magnetics::Polarization::Opposed;
    auto after_on = magnetics::apply_pulse(assembly, pulse);
    magnetics::PulseSpec demag = pulse;
    demag.polarity = magnetics::PulsePolarity::Demagnetize;
    auto after_off = magnetics::apply_pulse(after_on, demag);
    json j = {{"voltage_V", pulse.voltage_V},
              {"current_A", pulse.current_A},
              {"duration_ms", pulse.duration_s * 1e3},
              {"energy_J", magnetics::pulse_energy(pulse)},
              {"switches_on", after_on.alnico.polarization == magnetics::Polarization::Aligned},
              {"switches_off", after_off.alnico.polarization == magnetics::Polarization::Opposed}};
    io.write("pulse.json", json_dump(j));
}

void run_dock(ExperimentIO& io) {
    const double alpha = io.cfg.get_double("dock", "alpha_deg", 0.0);
    const double spacing_mm = io.cfg.get_double("dock", "spacing_mm", 5.0);
    const int workers = io.cfg.get_int("dock", "workers", 4);
    auto layout = docking::ArcMagnetLayout::build(dock_geometry_from_config(io.cfg));
    auto dp = dock_params_from_config(io.cfg, io.params);
    auto map = docking::sweep_grid(spacing_mm * 1e-3, alpha, dp, layout, workers);

    // 7x7 grid of S/F cells, x ascending by row, y by column
    std::ostringstream ss;
    for (int iy = 0; iy < 7; ++iy)
        ss << (iy ? "," : "") << "y_" << csv_num(iy * spacing_mm) << "mm";
    ss << '\n';
    for (int ix = 0; ix < 7; ++ix) {
        for (int iy = 0; iy < 7; ++iy) ss << (iy ? "," : "") << (map.grid[ix][iy] ? 'S' : 'F');
        ss << '\n';
    }
    const std::string tag = "dock_alpha" + std::to_string(static_cast<int>(std::lround(alpha)));
    io.write(tag + ".csv", ss.str());
    json j = {{"tilt_deg", alpha},
              {"success_count", map.success_count()},
              {"success_rate", docking::success_rate(map)}};
    io.write(tag + "_summary.json", json_dump(j));
}

void run_fluid(ExperimentIO& io) {
    auto geometry = fluid_geometry_from_config(io.cfg);
    std::ostringstream ss;
    ss << "mode,inlet_ml_min,outlet_ml_min,efficiency\n";
    auto emit = [&](fluidics::TransferMode mode, double inlet) {
        auto net = fluidics::build_network(mode, geometry, io.params.fluid);
        auto res = fluidics::solve_flow(net, inlet);
        ss << fluidics::to_string(mode) << ',' << csv_num(res.inlet_ml_min) << ','
           << csv_num(res.outlet_ml_min) << ',' << csv_num(res.efficiency) << '\n';
    };
    if (io.cfg.has("fluid", "mode") || io.cfg.has("fluid", "inlet_ml_min")) {
        auto mode = fluidics::mode_from_string(io.cfg.get_string("fluid", "mode", "loop"));
        emit(mode, io.cfg.get_double("fluid", "inlet_ml_min", 80.0));
    } else {
        const std::string fixture = io.cfg.get_string("fluid", "fixture", "");
        if (fixture.empty() || !fs::exists(fixture))
            throw Error("fluid experiment needs the operating-point fixture or --mode/--inlet");
        CsvTable t = read_csv(fixture);
        for (size_t i = 0; i < t.rows.size(); ++i)
            emit(fluidics::mode_from_string(t.rows[i][0]),
                 parse_csv_double(t.rows[i][1], long(i + 2)));
    }
    io.write("fluid_results.csv", ss.str());
}

void run_flex(ExperimentIO& io) {
    auto assembly = assembly_from_config(io.cfg);
    auto fm = force_model(assembly, io.params.force_calib);
    auto calib = compliance::calibrate_springs(io.params.flex_targets, fm);
    auto lim = compliance::flex_limits(calib, fm);
    json j = {{"axial_mm", lim.axial_extension_m * 1e3},
              {"bend_deg", lim.bend_angle_deg},
              {"lateral_mm", lim.lateral_offset_m * 1e3},
              {"distance_mm", lim.connection_distance_m * 1e3},
              {"fluidic_angular_deg", lim.fluidic_angular_tolerance_deg},
              {"axial_stiffness_N_m", calib.compression.axial_stiffness_N_m},
              {"bending_stiffness_Nm_rad", calib.compression.bending_stiffness_Nm_rad},
              {"lateral_stiffness_N_m", calib.compression.lateral_stiffness_N_m},
              {"conical_bending_stiffness_Nm_rad", calib.conical.bending_stiffness_Nm_rad},
              {"body_length_m", calib.geometry.body_length_m}};
    io.write("flex_limits.json", json_dump(j));
}

constexpr const char* kDefaultScript = R"(0 A proximity
10 B proximity
120 A aligned
130 B aligned
200 A magnetize
210 B magnetize
300 A probe_ok
310 B probe_ok
400 A send:telemetry-frame-1
450 B send:ack-1
500 A send:telemetry-frame-2
900 A demagnetize
910 B demagnetize
950 A timeout
960 B timeout
)";

void run_protocol(ExperimentIO& io) {
    std::string script_path = io.cfg.get_string("protocol", "script", "");
    std::string script = script_path.empty() ? kDefaultScript : read_file(script_path);
    coupling::PairSimulator sim;
    auto trace = sim.run_script(script);
    std::ostringstream ss;
    for (const auto& line : trace) ss << line << '\n';
    io.write("protocol_trace.jsonl", ss.str());
}

} // namespace

bool RunManifest::verify() const {
    for (const auto& [path, digest] : outputs) {
        if (!fs::exists(path)) return false;
        if (fnv1a64_hex(read_file(path)) != digest) return false;
    }
    return true;
}

RunManifest run_experiment(const std::string& experiment, const Config& cfg, const Params& params,
                           const std::string& out_dir) {
    bool known = false;
    for (const char* name : kExperiments) known = known || experiment == name;
    if (!known) throw UsageError("unknown experiment: " + experiment);

    fs::create_directories(out_dir);
    ExperimentIO io{cfg, params, out_dir, {}};

    auto t0 = std::chrono::steady_clock::now();
    if (experiment == "winding") run_winding(io);
    else if (experiment == "force_gap") run_force_gap(io);
    else if (experiment == "pulse") run_pulse(io);
    else if (experiment == "dock") run_dock(io);
    else if (experiment == "fluid") run_fluid(io);
    else if (experiment == "flex") run_flex(io);
    else if (experiment == "protocol") run_protocol(io);
    auto t1 = std::chrono::steady_clock::now();

    RunManifest m;
    m.tool_version = kToolVersion;
    m.config_hash = fnv1a64_hex(cfg.canonical() + "|" + params_fingerprint(params));
    m.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    for (const auto& name : io.written) {
        fs::path p = fs::path(out_dir) / name;
        m.outputs.emplace_back(p.string(), fnv1a64_hex(read_file(p.string())));
    }

    json j = {{"tool_version", m.tool_version},
              {"config_hash", m.config_hash},
              {"wall_time_s", m.wall_time_s}};
    j["outputs"] = json::array();
    for (const auto& [path, digest] : m.outputs)
        j["outputs"].push_back({{"path", path}, {"digest", digest}});
    write_file((fs::path(out_dir) / (experiment + ".manifest.json")).string(), json_dump(j));
    return m;
}

std::string calibrate(const std::string& target, const std::string& data_path, const Config& cfg,
                      Params& params, const std::string& params_out_path) {
    std::ostringstream summary;
    if (target == "force") {
        std::string path = data_path.empty() ? cfg.get_string("force", "fixture", "") : data_path;
        CsvTable t = read_csv(path);
        std::vector<force::ForceMeasurement> data;
        for (size_t i = 0; i < t.rows.size(); ++i)
            data.push_back({parse_csv_double(t.rows[i][0], long(i + 2)) * 1e-3,
                            parse_csv_double(t.rows[i][1], long(i + 2))});
        auto rep = force::calibrate_force_model(data, assembly_from_config(cfg));
        params.force_calib = rep.calibration;
        params.force_rmse_N = rep.rmse_N;
        params.force_iterations = rep.iterations;
        summary << "force fit: leakage_fraction=" << fmt(rep.calibration.leakage_fraction)
                << " residual_gap_m=" << fmt(rep.calibration.residual_gap_m)
                << " rmse_N=" << fmt(rep.rmse_N) << " iterations=" << rep.iterations;
    } else if (target == "fluid") {
        std::string path = data_path.empty() ? cfg.get_string("fluid", "fixture", "") : data_path;
        CsvTable t = read_csv(path);
        std::vector<std::tuple<fluidics::TransferMode, double, double>> meas;
        for (size_t i = 0; i < t.rows.size(); ++i)
            meas.emplace_back(fluidics::mode_from_string(t.rows[i][0]),
                              parse_csv_double(t.rows[i][1], long(i + 2)),
                              parse_csv_double(t.rows[i][2], long(i + 2)));
        auto geometry = fluid_geometry_from_config(cfg);
        params.fluid = fluidics::calibrate_losses(meas, geometry);
        summary << "fluid fit: leak_conductance_loop=" << fmt(params.fluid.leak_conductance_loop)
                << " leak_conductance_dual=" << fmt(params.fluid.leak_conductance_dual);
        for (const auto& [mode, q_in, q_out] : meas) {
            auto res = fluidics::solve_flow(fluidics::build_network(mode, geometry, params.fluid), q_in);
            summary << "\n  " << fluidics::to_string(mode) << " @" << q_in
                    << ": model_outlet=" << fmt(res.outlet_ml_min) << " measured=" << q_out
                    << " residual=" << fmt(res.outlet_ml_min - q_out);
        }
    } else if (target == "dock") {
        std::array<int, 3> targets = {29, 27, 22};
        if (!data_path.empty()) {
            CsvTable t = read_csv(data_path); // tilt_deg,target_success_count
            for (size_t i = 0; i < t.rows.size(); ++i) {
                double tilt = parse_csv_double(t.rows[i][0], long(i + 2));
                int count = static_cast<int>(parse_csv_double(t.rows[i][1], long(i + 2)));
                if (tilt == 0) targets[0] = count;
                else if (tilt == 10) targets[1] = count;
                else if (tilt == 20) targets[2] = count;
                else throw DataFormatError("dock targets support tilts 0/10/20 deg", long(i + 2));
            }
        }
        auto layout = docking::ArcMagnetLayout::build(dock_geometry_from_config(cfg));
        auto base = dock_params_from_config(cfg, params);
        auto rep = docking::calibrate_dock(layout, base, targets, cfg.get_int("dock", "workers", 4));
        params.dock_gravity_load_N = rep.params.gravity_load_N;
        params.dock_spring_restoring_N_m = rep.params.spring_restoring_N_m;
        summary << "dock fit: gravity_load_N=" << fmt(rep.params.gravity_load_N)
                << " spring_restoring_N_m=" << fmt(rep.params.spring_restoring_N_m) << " counts="
                << rep.counts[0] << "/" << rep.counts[1] << "/" << rep.counts[2] << " targets="
                << targets[0] << "/" << targets[1] << "/" << targets[2]
                << " min_margin_N=" << fmt(rep.min_margin_N) << (rep.exact ? " (exact)" : "");
    } else if (target == "flex") {
        compliance::FlexTargets t = params.flex_targets;
        if (!data_path.empty()) {
            CsvTable tab = read_csv(data_path); // quantity,value
            for (size_t i = 0; i < tab.rows.size(); ++i) {
                const std::string& q = tab.rows[i][0];
                double v = parse_csv_double(tab.rows[i][1], long(i + 2));
                if (q == "axial_mm") t.axial_extension_m = v * 1e-3;
                else if (q == "bend_deg") t.bend_angle_deg = v;
                else if (q == "lateral_mm") t.lateral_offset_m = v * 1e-3;
                else if (q == "distance_mm") t.connection_distance_m = v * 1e-3;
                else if (q == "fluidic_angular_deg") t.fluidic_angular_deg = v;
                else throw DataFormatError("unknown flex target: " + q, long(i + 2));
            }
        } else {
            t.axial_extension_m = cfg.get_double("flex", "axial_target_mm", 20.0) * 1e-3;
            t.bend_angle_deg = cfg.get_double("flex", "bend_target_deg", 30.0);
            t.lateral_offset_m = cfg.get_double("flex", "lateral_target_mm", 6.0) * 1e-3;
            t.connection_distance_m = cfg.get_double("flex", "distance_target_mm", 132.0) * 1e-3;
            t.fluidic_angular_deg = cfg.get_double("flex", "fluidic_angular_target_deg", 20.0);
        }
        params.flex_targets = t;
        auto fm = force_model(assembly_from_config(cfg), params.force_calib);
        auto calib = compliance::calibrate_springs(t, fm);
        auto lim = compliance::flex_limits(calib, fm);
        summary << "flex fit: axial_stiffness_N_m=" << fmt(calib.compression.axial_stiffness_N_m)
                << " bending_stiffness_Nm_rad=" << fmt(calib.compression.bending_stiffness_Nm_rad)
                << " lateral_stiffness_N_m=" << fmt(calib.compression.lateral_stiffness_N_m)
                << "\n  residuals: axial_mm=" << fmt(lim.axial_extension_m * 1e3 - t.axial_extension_m * 1e3)
                << " bend_deg=" << fmt(lim.bend_angle_deg - t.bend_angle_deg)
                << " lateral_mm=" << fmt(lim.lateral_offset_m * 1e3 - t.lateral_offset_m * 1e3)
                << " distance_mm=" << fmt(lim.connection_distance_m * 1e3 - t.connection_distance_m * 1e3);
    } else {
        throw UsageError("unknown calibration target: " + target);
    }
    if (!params_out_path.empty()) save_params(params, params_out_path);
    return summary.str();
}

namespace {

struct ReportSource {
    json pulse, flex;
    std::map<int, json> dock; // tilt -> summary
    std::map<std::string, double> force_curve; // gap_mm key -> model N
    std::map<std::string, double> fluid_eff;   // "<mode>@<inlet>" -> efficiency
};

ReportSource load_outputs(const fs::path& dir) {
    ReportSource src;
    auto load_json = [](const fs::path& p) {
        json j;
        std::ifstream in(p);
        if (in) in >> j;
        return j;
    };
    if (fs::exists(dir / "pulse.json")) src.pulse = load_json(dir / "pulse.json");
    if (fs::exists(dir / "flex_limits.json")) src.flex = load_json(dir / "flex_limits.json");
    for (int tilt : {0, 10, 20}) {
        fs::path p = dir / ("dock_alpha" + std::to_string(tilt) + "_summary.json");
        if (fs::exists(p)) src.dock[tilt] = load_json(p);
    }
    if (fs::exists(dir / "force_gap_curve.csv")) {
        CsvTable t = read_csv((dir / "force_gap_curve.csv").string());
        for (size_t i = 0; i < t.rows.size(); ++i)
            src.force_curve[t.rows[i][0]] = parse_csv_double(t.rows[i][1], long(i + 2));
    }
    if (fs::exists(dir / "fluid_results.csv")) {
        CsvTable t = read_csv((dir / "fluid_results.csv").string());
        for (size_t i = 0; i < t.rows.size(); ++i)
            src.fluid_eff[t.rows[i][0] + "@" + t.rows[i][1]] =
                parse_csv_double(t.rows[i][3], long(i + 2));
    }
    return src;
}

} // namespace

Report report(const std::string& out_dir) {
    fs::create_directories(out_dir);
    ReportSource src = load_outputs(out_dir);
    Report rep;

    // nothing to compare: an empty run set reports an empty table
    if (src.pulse.is_null() && src.flex.is_null() && src.dock.empty() &&
        src.force_curve.empty() && src.fluid_eff.empty()) {
        write_file((fs::path(out_dir) / "report.csv").string(),
                   "quantity,paper_value,model_value,rel_error\n");
        return rep;
    }

    auto add = [&rep](const std::string& q, double paper, double model, bool present) {
        ReportRow row;
        row.quantity = q;
        row.paper_value = paper;
        row.present = present;
        if (present) {
            row.model_value = model;
            row.rel_error = paper != 0 ? std::abs(model - paper) / std::abs(paper) : std::abs(model);
        } else {
            rep.complete = false;
        }
        rep.rows.push_back(row);
    };

    add("pulse_energy_J", 0.3, src.pulse.is_null() ? 0 : src.pulse.value("energy_J", 0.0),
        !src.pulse.is_null());

    auto force_at = [&src](const char* key) { return src.force_curve.count(key) ? src.force_curve.at(key) : 0.0; };
    bool have_force = !src.force_curve.empty();
    add("force_zero_gap_N", 14.6, force_at("0"), have_force && src.force_curve.count("0"));
    add("force_gap_0.1mm_N", 7.7, force_at("0.1"), have_force && src.force_curve.count("0.1"));
    add("force_gap_1mm_N", 2.34, force_at("1"), have_force && src.force_curve.count("1"));

    const double dock_paper[3] = {0.591, 0.551, 0.449};
    const int tilts[3] = {0, 10, 20};
    for (int i = 0; i < 3; ++i) {
        bool present = src.dock.count(tilts[i]) > 0;
        add("dock_success_rate_alpha" + std::to_string(tilts[i]), dock_paper[i],
            present ? src.dock[tilts[i]].value("success_rate", 0.0) : 0.0, present);
    }

    const std::pair<std::string, double> fluid_rows[6] = {
        {"loop@80", 0.61},  {"loop@90", 0.62},  {"loop@100", 0.65},
        {"dual@102", 0.95}, {"dual@140", 0.97}, {"dual@175", 0.98}};
    for (const auto& [key, paper] : fluid_rows)
        add("fluid_eff_" + key, paper, src.fluid_eff.count(key) ? src.fluid_eff.at(key) : 0.0,
            src.fluid_eff.count(key) > 0);

    bool have_flex = !src.flex.is_null();
    add("flex_axial_extension_mm", 20.0, have_flex ? src.flex.value("axial_mm", 0.0) : 0.0, have_flex);
    add("flex_bend_angle_deg", 30.0, have_flex ? src.flex.value("bend_deg", 0.0) : 0.0, have_flex);
    add("flex_lateral_offset_mm", 6.0, have_flex ? src.flex.value("lateral_mm", 0.0) : 0.0, have_flex);
    add("flex_connection_distance_mm", 132.0, have_flex ? src.flex.value("distance_mm", 0.0) : 0.0,
        have_flex);
    add("flex_fluidic_angular_deg", 20.0, have_flex ? src.flex.value("fluidic_angular_deg", 0.0) : 0.0,
        have_flex);

    std::ostringstream ss;
    ss << "quantity,paper_value,model_value,rel_error\n";
    for (const auto& r : rep.rows) {
        ss << r.quantity << ',' << csv_num(r.paper_value) << ',';
        if (r.present)
            ss << csv_num(r.model_value) << ',' << csv_num(r.rel_error);
        else
            ss << "absent,absent";
        ss << '\n';
    }
    write_file((fs::path(out_dir) / "report.csv").string(), ss.str());
    return rep;
}

} // namespace epm::harness
