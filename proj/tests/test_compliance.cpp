#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epm/compliance.hpp"
#include "epm/errors.hpp"

using namespace epm;
using namespace epm::compliance;

namespace {

// constant-force model: the x = F/k oracle applies exactly
ForceModel constant_force(double f) {
    return [f](double) { return f; };
}

ConnectorGeometry geom() {
    ConnectorGeometry g;
    g.body_length_m = 46e-3;
    return g;
}

SpringSpec spring(double k_ax, double k_b, double k_lat) {
    SpringSpec s;
    s.axial_stiffness_N_m = k_ax;
    s.bending_stiffness_Nm_rad = k_b;
    s.lateral_stiffness_N_m = k_lat;
    s.free_length_m = 40e-3;
    s.max_travel_m = 30e-3;
    return s;
}

} // namespace

TEST_CASE("axial limit matches the x = F/k oracle") {
    // 14.6 N against 0.73 N/mm -> 20 mm
    auto s = spring(730.0, 0.4, 2000.0);
    double x = max_axial_extension(s, geom(), constant_force(14.6));
    CHECK(x == doctest::Approx(20e-3).epsilon(1e-3));
    // no force, no retention
    CHECK(max_axial_extension(s, geom(), constant_force(0.0)) < 0.01e-3); // within bisection tol of 0
}

TEST_CASE("bend limit: linear oracle in the small-angle regime") {
    ConnectorGeometry g = geom();
    const double f = 10.0;
    // choose k so the root sits well below 10 degrees: theta* = F*arm/k
    double k = f * g.moment_arm_m / (3.0 * 3.14159265 / 180.0);
    auto s = spring(700.0, k, 2000.0);
    CHECK(max_bend_angle_deg(s, g, constant_force(f)) == doctest::Approx(3.0).epsilon(1e-3));
    // halving the stiffness doubles the small-angle limit
    auto s2 = spring(700.0, k / 2, 2000.0);
    CHECK(max_bend_angle_deg(s2, g, constant_force(f)) == doctest::Approx(6.0).epsilon(1e-3));
    // near-rigid spring: limit collapses toward zero
    auto s3 = spring(700.0, 1e9, 2000.0);
    CHECK(max_bend_angle_deg(s3, g, constant_force(f)) < 6e-4); // within bisection tol of 0
}

TEST_CASE("lateral limit matches the force balance oracle") {
    auto s = spring(700.0, 0.4, 2433.0);
    CHECK(max_lateral_offset(s, geom(), constant_force(14.6)) ==
          doctest::Approx(6e-3).epsilon(1e-3));
    auto rigid = spring(700.0, 0.4, 1e9);
    CHECK(max_lateral_offset(rigid, geom(), constant_force(14.6)) < 0.01e-3);
}

TEST_CASE("connection distance composes additively") {
    auto s = spring(730.0, 0.4, 2000.0);
    ConnectorGeometry g = geom();
    auto f = constant_force(14.6);
    double x = max_axial_extension(s, g, f);
    double d = max_connection_distance(s, g, s, g, f);
    CHECK(d == doctest::Approx(2 * g.body_length_m + 2 * x).epsilon(1e-12));
    // doubling one body length adds exactly that length
    ConnectorGeometry g2 = g;
    g2.body_length_m *= 2;
    CHECK(max_connection_distance(s, g2, s, g, f) ==
          doctest::Approx(d + g.body_length_m).epsilon(1e-12));
    // rigid springs: body lengths only
    auto rigid = spring(1e9, 1e9, 1e9);
    CHECK(max_connection_distance(rigid, g, rigid, g, f) ==
          doctest::Approx(2 * g.body_length_m).epsilon(1e-4));
}

TEST_CASE("calibrated springs meet the reference limits simultaneously") {
    FlexTargets targets;
    auto f = constant_force(14.26); // the calibrated zero-gap holding force
    auto calib = calibrate_springs(targets, f);
    auto lim = flex_limits(calib, f);
    CHECK(lim.axial_extension_m == doctest::Approx(20e-3).epsilon(0.10));
    CHECK(lim.bend_angle_deg == doctest::Approx(30.0).epsilon(0.10));
    CHECK(std::abs(lim.bend_angle_deg - 30.0) <= 3.0);
    CHECK(lim.lateral_offset_m == doctest::Approx(6e-3).epsilon(0.10));
    CHECK(lim.connection_distance_m == doctest::Approx(132e-3).epsilon(0.10));
    CHECK(std::abs(lim.fluidic_angular_tolerance_deg - 20.0) <= 2.0);
}

TEST_CASE("boundary consistency around each computed limit") {
    FlexTargets targets;
    auto f = constant_force(14.26);
    auto calib = calibrate_springs(targets, f);
    auto lim = flex_limits(calib, f);
    const double eps_len = 0.05e-3;
    const double eps_deg = 0.2;

    CHECK(coupling_retained(lim.axial_extension_m - eps_len, 0, 0, calib.compression,
                            calib.geometry, f));
    CHECK_FALSE(coupling_retained(lim.axial_extension_m + eps_len, 0, 0, calib.compression,
                                  calib.geometry, f));
    CHECK(coupling_retained(0, lim.bend_angle_deg - eps_deg, 0, calib.compression, calib.geometry, f));
    CHECK_FALSE(coupling_retained(0, lim.bend_angle_deg + eps_deg, 0, calib.compression,
                                  calib.geometry, f));
    CHECK(coupling_retained(0, 0, lim.lateral_offset_m - eps_len, calib.compression,
                            calib.geometry, f));
    CHECK_FALSE(coupling_retained(0, 0, lim.lateral_offset_m + eps_len, calib.compression,
                                  calib.geometry, f));
    // fluidic conical spring boundary
    CHECK(coupling_retained(0, lim.fluidic_angular_tolerance_deg - eps_deg, 0, calib.conical,
                            calib.geometry, f));
    CHECK_FALSE(coupling_retained(0, lim.fluidic_angular_tolerance_deg + eps_deg, 0, calib.conical,
                                  calib.geometry, f));

    // undeformed state always retained
    CHECK(coupling_retained(0, 0, 0, calib.compression, calib.geometry, f));
    // beyond travel
    CHECK_THROWS_AS(coupling_retained(calib.compression.max_travel_m + 1e-3, 0, 0,
                                      calib.compression, calib.geometry, f),
                    OutOfTravelError);
}

TEST_CASE("limits are non-increasing in the corresponding stiffness") {
    ConnectorGeometry g = geom();
    auto f = constant_force(14.26);
    double prev_ax = 1e9, prev_b = 1e9, prev_lat = 1e9;
    for (double scale : {0.5, 1.0, 2.0, 5.0}) {
        auto s = spring(713.0 * scale, 0.378 * scale, 2377.0 * scale);
        double ax = max_axial_extension(s, g, f);
        double b = max_bend_angle_deg(s, g, f);
        double lat = max_lateral_offset(s, g, f);
        CHECK(ax <= prev_ax + 1e-12);
        CHECK(b <= prev_b + 1e-9);
        CHECK(lat <= prev_lat + 1e-12);
        prev_ax = ax;
        prev_b = b;
        prev_lat = lat;
    }
}

TEST_CASE("bisection converges to tolerance and honors a nonzero gap ratio") {
    // synthetic decaying force with a nonzero deformation->gap mapping
    ForceModel decaying = [](double gap) { return 14.0 / (1.0 + gap / 0.2e-3); };
    ConnectorGeometry g = geom();
    g.deformation_gap_ratio = 1.0;
    auto s = spring(730.0, 0.4, 2000.0);
    double x = max_axial_extension(s, g, decaying);
    // root of F(x) = k x, bracketed by construction
    double resid = decaying(x) - s.axial_stiffness_N_m * x;
    CHECK(std::abs(resid) < 0.5); // within one bisection step of the balance
    double margin_in = decaying(x - 0.05e-3) - s.axial_stiffness_N_m * (x - 0.05e-3);
    double margin_out = decaying(x + 0.05e-3) - s.axial_stiffness_N_m * (x + 0.05e-3);
    CHECK(margin_in > 0);
    CHECK(margin_out < 0);
}

TEST_CASE("spring and geometry invariants") {
    auto s = spring(700.0, 0.4, 2000.0);
    CHECK_NOTHROW(s.validate());
    s.max_travel_m = s.free_length_m + 1e-3;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    SpringSpec conical = spring(700.0, 0.6, 2000.0);
    conical.kind = SpringKind::Compression;
    CHECK_THROWS_AS(fluidic_angular_tolerance_deg(conical, geom(), constant_force(10.0)),
                    ValidationError);
}
