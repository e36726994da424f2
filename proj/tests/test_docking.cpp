#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epm/docking.hpp"
#include "epm/errors.hpp"
#include "epm/harness.hpp"

using namespace epm;
using namespace epm::docking;

namespace {

ArcMagnetLayout default_layout() { return ArcMagnetLayout::build(DockGeometry{}); }

DockingParams default_params() {
    auto cfg = harness::default_config();
    return harness::dock_params_from_config(cfg, harness::default_params());
}

RigidPose pose_at(double x, double y, double h, double theta) {
    return {Mat3::rot_z(theta), Vec3{x, y, h}};
}

const RigidPose kFixedPose{Mat3{}, Vec3{0, 0, 0}};

} // namespace

TEST_CASE("aligned faces attract; like-poles-facing repels with a restoring torque") {
    auto layout = default_layout();
    auto r0 = magnetic_interaction(kFixedPose, pose_at(0, 0, 3e-3, 0.0), layout);
    CHECK(r0.force_N.z < 0);                      // pulled down toward the fixed face
    CHECK(std::abs(r0.axial_torque_Nm) < 1e-12);  // symmetric equilibrium

    // quarter-turn misalignment: weaker pull, nonzero alignment torque
    auto r90 = magnetic_interaction(kFixedPose, pose_at(0, 0, 3e-3, 3.14159265 / 2), layout);
    CHECK(std::abs(r90.axial_torque_Nm) > 1e-6);
    CHECK(r0.force_N.z < r90.force_N.z); // aligned pull is the strongest

    // half a turn puts like poles over each other: the arc pairs repel
    // (checked with the EPM contribution switched off) and the torque just
    // inside the turn restores toward alignment
    ArcMagnetLayout arcs_only = layout;
    arcs_only.epm_moment = {0, 0, 1e-12};
    auto r180 = magnetic_interaction(kFixedPose, pose_at(0, 0, 3e-3, 3.14159265), arcs_only);
    CHECK(r180.force_N.z > 0); // repulsive
    auto near180 = magnetic_interaction(kFixedPose, pose_at(0, 0, 3e-3, 2.9), arcs_only);
    CHECK(near180.axial_torque_Nm < 0); // pushes back toward theta = 0
}

TEST_CASE("dipole interaction is bilinear in the moments") {
    auto layout = default_layout();
    auto scaled = layout;
    for (auto& m : scaled.dipole_moments) m = m * 2.0;
    scaled.epm_moment = scaled.epm_moment * 2.0;
    auto r1 = magnetic_interaction(kFixedPose, pose_at(5e-3, 2e-3, 4e-3, 0.3), layout);
    auto r4 = magnetic_interaction(kFixedPose, pose_at(5e-3, 2e-3, 4e-3, 0.3), scaled);
    CHECK(r4.force_N.x == doctest::Approx(4 * r1.force_N.x).epsilon(1e-9));
    CHECK(r4.force_N.z == doctest::Approx(4 * r1.force_N.z).epsilon(1e-9));
    CHECK(r4.axial_torque_Nm == doctest::Approx(4 * r1.axial_torque_Nm).epsilon(1e-9));
}

TEST_CASE("force matches a finite-difference gradient of the pair energy") {
    // independent oracle: F_z = -dU/dz with U summed over dipole pairs
    auto layout = default_layout();
    auto energy = [&](double z) {
        // U = -m2 . B1(p2) summed pairwise, computed from the field route
        double u = 0;
        RigidPose fixed = kFixedPose;
        RigidPose free_pose = pose_at(4e-3, 3e-3, z, 0.4);
        // evaluate with the public interaction by integrating force is
        // circular; instead assemble the dipole clouds directly
        std::vector<Vec3> p1, m1, p2, m2;
        auto add = [&](std::vector<Vec3>& ps, std::vector<Vec3>& ms, const RigidPose& pose,
                       bool mirror) {
            for (size_t i = 0; i < layout.dipole_positions.size(); ++i) {
                Vec3 p = layout.dipole_positions[i];
                if (mirror) p.z = -p.z;
                ps.push_back(pose.rotation * p + pose.translation);
                ms.push_back(pose.rotation * layout.dipole_moments[i]);
            }
            Vec3 pe = layout.epm_position;
            if (mirror) pe.z = -pe.z;
            ps.push_back(pose.rotation * pe + pose.translation);
            ms.push_back(pose.rotation * layout.epm_moment);
        };
        add(p1, m1, fixed, false);
        add(p2, m2, free_pose, true);
        for (size_t i = 0; i < p1.size(); ++i)
            for (size_t j = 0; j < p2.size(); ++j) {
                Vec3 r = p2[j] - p1[i];
                double rn = r.norm();
                Vec3 rh = r / rn;
                Vec3 b = (magnetics::kMu0 / (4 * magnetics::kPi * rn * rn * rn)) *
                         (3.0 * rh * m1[i].dot(rh) - m1[i]);
                u -= m2[j].dot(b);
            }
        return u;
    };
    const double z = 5e-3, h = 1e-6;
    double fz_fd = -(energy(z + h) - energy(z - h)) / (2 * h);
    auto r = magnetic_interaction(kFixedPose, pose_at(4e-3, 3e-3, z, 0.4), default_layout());
    CHECK(r.force_N.z == doctest::Approx(fz_fd).epsilon(1e-5));
}

TEST_CASE("axial torque matches a finite-difference of the energy in theta") {
    auto layout = default_layout();
    auto reaction_energy_route = [&](double theta) {
        // rotate about z and measure the energy change numerically through
        // the torque reported at nearby angles (trapezoid check)
        return magnetic_interaction(kFixedPose, pose_at(3e-3, 6e-3, 4e-3, theta), layout)
            .axial_torque_Nm;
    };
    // torque = -dU/dtheta; integrate the reported torque over a small arc and
    // compare with direct energy difference via the force-route consistency:
    // instead verify the torque is the derivative of work done by rotation
    const double theta = 0.7, h = 1e-5;
    double tau_mid = reaction_energy_route(theta);
    double tau_a = reaction_energy_route(theta - h);
    double tau_b = reaction_energy_route(theta + h);
    // smoothness sanity for the derivative check below
    CHECK(std::abs(tau_b - tau_a) < 1e-2);

    // energy via direct summation (same oracle as the force test)
    auto energy = [&](double th) {
        std::vector<Vec3> p1, m1, p2, m2;
        RigidPose free_pose = pose_at(3e-3, 6e-3, 4e-3, th);
        auto add = [&](std::vector<Vec3>& ps, std::vector<Vec3>& ms, const RigidPose& pose,
                       bool mirror) {
            for (size_t i = 0; i < layout.dipole_positions.size(); ++i) {
                Vec3 p = layout.dipole_positions[i];
                if (mirror) p.z = -p.z;
                ps.push_back(pose.rotation * p + pose.translation);
                ms.push_back(pose.rotation * layout.dipole_moments[i]);
            }
            Vec3 pe = layout.epm_position;
            if (mirror) pe.z = -pe.z;
            ps.push_back(pose.rotation * pe + pose.translation);
            ms.push_back(pose.rotation * layout.epm_moment);
        };
        add(p1, m1, kFixedPose, false);
        add(p2, m2, free_pose, true);
        double u = 0;
        for (size_t i = 0; i < p1.size(); ++i)
            for (size_t j = 0; j < p2.size(); ++j) {
                Vec3 r = p2[j] - p1[i];
                double rn = r.norm();
                Vec3 rh = r / rn;
                Vec3 b = (magnetics::kMu0 / (4 * magnetics::kPi * rn * rn * rn)) *
                         (3.0 * rh * m1[i].dot(rh) - m1[i]);
                u -= m2[j].dot(b);
            }
        return u;
    };
    double tau_fd = -(energy(theta + h) - energy(theta - h)) / (2 * h);
    CHECK(tau_mid == doctest::Approx(tau_fd).epsilon(1e-5));
}

TEST_CASE("coincident dipoles raise a singular-separation error") {
    auto layout = default_layout();
    // drive the free face into exact coincidence with the fixed one
    RigidPose overlapping{Mat3{}, Vec3{0, 0, 0}};
    // mirrored recess makes z differ; force z overlap via a custom layout
    ArcMagnetLayout flat = layout;
    for (auto& p : flat.dipole_positions) p.z = 0;
    flat.epm_position.z = 0;
    CHECK_THROWS_AS(magnetic_interaction(kFixedPose, overlapping, flat), SingularSeparationError);
}

TEST_CASE("doubling the dipole discretization changes capture forces < 2%") {
    DockGeometry g16;
    DockGeometry g32 = g16;
    g32.dipoles_per_arc = 32;
    auto l16 = ArcMagnetLayout::build(g16);
    auto l32 = ArcMagnetLayout::build(g32);
    // representative poses: origin capture, mid-offset capture, far offset
    const struct { double x, y, th; } poses[] = {{0, 0, 0}, {10e-3, 5e-3, -0.5}, {20e-3, 0, 0}};
    for (const auto& p : poses) {
        auto r16 = magnetic_interaction(kFixedPose, pose_at(p.x, p.y, 1.5e-3, p.th), l16);
        auto r32 = magnetic_interaction(kFixedPose, pose_at(p.x, p.y, 1.5e-3, p.th), l32);
        double f16 = r16.force_N.norm(), f32 = r32.force_N.norm();
        CHECK(std::abs(f32 - f16) / f16 < 0.02);
    }
}

TEST_CASE("origin capture succeeds at all tilts") {
    auto layout = default_layout();
    auto params = default_params();
    for (double tilt : {0.0, 10.0, 20.0}) {
        DockingScenario sc;
        sc.tilt_alpha_deg = tilt;
        auto tr = simulate_docking(sc, params, layout);
        INFO("tilt=", tilt, " pull=", tr.pull_to_seat_N, " required=", tr.required_force_N);
        CHECK(tr.outcome == DockOutcome::Success);
        CHECK(tr.misalign_deg <= params.alignment_tolerance_deg);
    }
}

TEST_CASE("zero opposing load always captures at the origin") {
    auto layout = default_layout();
    auto params = default_params();
    params.gravity_load_N = 0;
    params.spring_restoring_N_m = 0;
    DockingScenario sc;
    auto tr = simulate_docking(sc, params, layout);
    CHECK(tr.outcome == DockOutcome::Success);
}

TEST_CASE("far y-offset at 20 deg tilt fails") {
    auto layout = default_layout();
    auto params = default_params();
    DockingScenario sc;
    sc.y_offset_m = 20e-3;
    sc.tilt_alpha_deg = 20.0;
    CHECK(simulate_docking(sc, params, layout).outcome == DockOutcome::Fail);
}

TEST_CASE("relaxed rotor sits inside the friction deadband at every descent step") {
    auto layout = default_layout();
    auto params = default_params();
    for (double tilt : {0.0, 20.0}) {
        for (int ix = 0; ix < 7; ++ix)
            for (int iy = 0; iy < 7; ++iy) {
                DockingScenario sc;
                sc.x_offset_m = ix * 5e-3;
                sc.y_offset_m = iy * 5e-3;
                sc.tilt_alpha_deg = tilt;
                auto tr = simulate_docking(sc, params, layout);
                INFO("tilt=", tilt, " x=", ix * 5, "mm y=", iy * 5, "mm");
                CHECK(tr.max_step_torque_Nm < params.bearing_friction_torque_Nm);
            }
    }
}

TEST_CASE("mirror symmetry in y and determinism of the sweep") {
    auto layout = default_layout();
    auto params = default_params();
    for (double tilt : {0.0, 20.0}) {
        for (double y : {5e-3, 15e-3}) {
            DockingScenario sp, sn;
            sp.tilt_alpha_deg = sn.tilt_alpha_deg = tilt;
            sp.x_offset_m = sn.x_offset_m = 10e-3;
            sp.y_offset_m = y;
            sn.y_offset_m = -y;
            auto tp = simulate_docking(sp, params, layout);
            auto tn = simulate_docking(sn, params, layout);
            // the mirrored landscape has mirrored equilibria; outcomes agree
            // exactly, forces up to the friction-deadband residual
            CHECK(tp.outcome == tn.outcome);
            CHECK(tp.pull_to_seat_N == doctest::Approx(tn.pull_to_seat_N).epsilon(0.02));
        }
    }
    // identical maps across runs and worker counts
    auto m1 = sweep_grid(5e-3, 10.0, params, layout, 1);
    auto m2 = sweep_grid(5e-3, 10.0, params, layout, 4);
    auto m3 = sweep_grid(5e-3, 10.0, params, layout, 4);
    CHECK(m1.grid == m2.grid);
    CHECK(m2.grid == m3.grid);
}

TEST_CASE("shipped defaults reproduce the reference success counts") {
    auto layout = default_layout();
    auto params = default_params();
    const int expected[3] = {29, 27, 22};
    const double tilts[3] = {0.0, 10.0, 20.0};
    int prev = 50;
    for (int i = 0; i < 3; ++i) {
        auto map = sweep_grid(5e-3, tilts[i], params, layout, 4);
        INFO("tilt=", tilts[i], " count=", map.success_count());
        CHECK(map.success_count() == expected[i]);
        CHECK(map.success_count() <= prev); // tilt monotonicity
        prev = map.success_count();
        CHECK(map.grid[0][0]); // origin capture

        // offset monotonicity along both axes
        for (auto axis : {0, 1}) {
            bool seen_fail = false;
            for (int k = 0; k < 7; ++k) {
                bool v = axis == 0 ? map.grid[k][0] : map.grid[0][k];
                if (!v) seen_fail = true;
                else CHECK(!seen_fail);
            }
        }
    }
}

TEST_CASE("success rate arithmetic") {
    SuccessMap map;
    CHECK(success_rate(map) == doctest::Approx(0.0));
    for (auto& row : map.grid) row.fill(true);
    CHECK(success_rate(map) == doctest::Approx(1.0));
    int n = 0;
    for (auto& row : map.grid)
        for (auto& v : row) v = n++ < 29;
    CHECK(success_rate(map) == doctest::Approx(29.0 / 49.0));
    CHECK(success_rate(map) == doctest::Approx(0.5918).epsilon(1e-3));
}

TEST_CASE("scenario and parameter validation") {
    DockingScenario sc;
    sc.tilt_alpha_deg = 95;
    CHECK_THROWS_AS(sc.validate(), ValidationError);
    DockingParams p = default_params();
    p.capture_threshold_m = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    DockGeometry g;
    g.dipoles_per_arc = 1;
    CHECK_THROWS_AS(g.validate(), ValidationError);
}
