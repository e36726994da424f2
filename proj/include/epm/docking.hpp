// Quasi-static self-alignment simulator: a fixed connector at platform tilt
// alpha and a free one lowered vertically; the free rotor relaxes to torque
// equilibrium at each descent step and the capture force balance decides
// success. Sweeps the 7x7 offset grid of the alignment experiment.
#pragma once

#include <array>
#include <vector>

#include "epm/vec3.hpp"

namespace epm::docking {

struct DockGeometry {
    int dipoles_per_arc = 16;
    double arc_radius_m = 11e-3;
    double arc_half_span_deg = 75.0;
    double arc_moment_A_m2 = 0.06;   // total per arc magnet
    double epm_moment_A_m2 = 0.10;
    double arc_recess_m = 5e-3;      // magnet depth below the mating face
    double epm_recess_m = 6e-3;
    double face_radius_m = 18e-3;
    double bend_arm_m = 0.14;        // seat-deflection penalty per squared bend angle

    void validate() const;
};

// Face-local dipole cloud; +z is the outward face normal. The two arc magnets
// sit on +x / -x sectors with opposite poles; the EPM dipole at the center.
struct ArcMagnetLayout {
    std::vector<Vec3> dipole_positions;
    std::vector<Vec3> dipole_moments;
    Vec3 epm_position;
    Vec3 epm_moment;
    Vec3 rotor_axis{0, 0, 1};
    double face_radius_m = 18e-3;
    double bend_arm_m = 0.14;

    void validate() const;
    static ArcMagnetLayout build(const DockGeometry& geometry);
};

struct RigidPose {
    Mat3 rotation;
    Vec3 translation;
};

struct MagneticReaction {
    Vec3 force_N;               // total force on the free assembly
    double axial_torque_Nm = 0; // torque about the free rotor axis
};

// Pairwise dipole-dipole interaction between the fixed assembly (layout under
// pose_fixed) and the free assembly (the facing copy of the same layout, its
// recess mirrored through the mating plane, under pose_free).
MagneticReaction magnetic_interaction(const RigidPose& pose_fixed, const RigidPose& pose_free,
                                      const ArcMagnetLayout& layout);

struct DockingScenario {
    double x_offset_m = 0;
    double y_offset_m = 0;
    double tilt_alpha_deg = 0;
    double approach_speed_m_s = 3e-3;
    double start_height_m = 30e-3;

    void validate() const;
};

struct DockingParams {
    double rotor_damping = 0.01;            // N.m per rad/step; fixed-point gain is 1/damping
    double bearing_friction_torque_Nm = 2e-6;
    double gravity_load_N = 8e-4;
    double spring_restoring_N_m = 0.413;
    double capture_threshold_m = 1.5e-3;
    double alignment_tolerance_deg = 10.0;
    double descent_step_m = 2.5e-3;
    double initial_rotor_angle_deg = 60.0;
    int relax_max_iters = 500;
    double relax_tol_rad = 1e-4;
    int slide_steps = 6;
    std::vector<double> mating_orientations_deg = {0.0, 180.0};

    void validate() const;
};

enum class DockOutcome { Success, Fail };

struct DockTrace {
    DockOutcome outcome = DockOutcome::Fail;
    double pull_to_seat_N = 0;      // attraction projected on the seating direction
    double lateral_offset_m = 0;    // face-center offset in the fixed face plane
    double seat_deflection_m = 0;   // lateral offset + bend penalty
    double required_force_N = 0;
    double misalign_deg = 0;        // relaxed rotor angle vs nearest mating orientation
    double relaxed_torque_Nm = 0;   // |torque| at the captured equilibrium
    double max_step_torque_Nm = 0;  // worst |torque| left by any descent-step relaxation
};

DockTrace simulate_docking(const DockingScenario& scenario, const DockingParams& params,
                           const ArcMagnetLayout& layout);

struct SuccessMap {
    std::array<std::array<bool, 7>, 7> grid{}; // grid[ix][iy], offsets = index * spacing
    double spacing_m = 5e-3;
    double tilt_alpha_deg = 0;

    int success_count() const;
};

// Evaluates all 49 grid points; points are independent and merged in fixed
// row-major order, so the map is identical for any worker count.
SuccessMap sweep_grid(double spacing_m, double tilt_deg, const DockingParams& params,
                      const ArcMagnetLayout& layout, int workers = 0);

double success_rate(const SuccessMap& map);

struct DockCalibrationReport {
    DockingParams params;
    std::array<int, 3> counts{};   // successes at alpha = 0, 10, 20 deg
    std::array<int, 3> targets{};
    double min_margin_N = 0;       // distance of the closest grid point to the threshold
    bool exact = false;
};

// Tunes (gravity_load, spring_restoring) against the target success counts
// at tilts 0/10/20 deg, subject to origin capture, axis monotonicity and
// tilt monotonicity; picks the feasible cell maximizing the worst margin.
DockCalibrationReport calibrate_dock(const ArcMagnetLayout& layout, const DockingParams& base,
                                     const std::array<int, 3>& target_counts, int workers = 0);

} // namespace epm::docking
