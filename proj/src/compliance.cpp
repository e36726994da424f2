#include "epm/compliance.hpp"

#include <cmath>

#include "epm/errors.hpp"

namespace epm::compliance {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;
constexpr double kSmallAngleRad = 10.0 * kDeg;
constexpr double kMaxBendRad = 85.0 * kDeg;
constexpr double kLengthTol = 0.01e-3;
constexpr int kMaxBisect = 60;
} // namespace

void SpringSpec::validate() const {
    if (!(axial_stiffness_N_m > 0 && bending_stiffness_Nm_rad > 0 && lateral_stiffness_N_m > 0))
        throw ValidationError("spring stiffnesses must be > 0");
    if (!(free_length_m > 0)) throw ValidationError("spring free length must be > 0");
    if (!(max_travel_m > 0 && max_travel_m <= free_length_m))
        throw ValidationError("max travel must be in (0, free_length]");
}

void ConnectorGeometry::validate() const {
    if (!(body_length_m > 0)) throw ValidationError("body length must be > 0");
    if (!(face_area_m2 > 0)) throw ValidationError("face area must be > 0");
    if (!(moment_arm_m > 0)) throw ValidationError("moment arm must be > 0");
    if (deformation_gap_ratio < 0) throw ValidationError("gap ratio must be >= 0");
}

double bend_lever_factor(double angle_rad) {
    double a = std::abs(angle_rad);
    if (a <= kSmallAngleRad) return 1.0;
    return std::cos(a) / std::cos(kSmallAngleRad);
}

namespace {

double axial_margin(double x, const SpringSpec& s, const ConnectorGeometry& g, const ForceModel& f) {
    return f(g.deformation_gap_ratio * x) - s.axial_stiffness_N_m * x;
}

double bend_margin(double theta, const SpringSpec& s, const ConnectorGeometry& g,
                   const ForceModel& f) {
    double gap = g.deformation_gap_ratio * g.moment_arm_m * std::sin(theta);
    double closing = f(gap) * g.moment_arm_m * bend_lever_factor(theta);
    return closing - s.bending_stiffness_Nm_rad * theta;
}

double lateral_margin(double d, const SpringSpec& s, const ConnectorGeometry& g,
                      const ForceModel& f) {
    return f(g.deformation_gap_ratio * d) - s.lateral_stiffness_N_m * d;
}

// largest argument in [0, hi] where margin >= 0 (margin positive at 0)
template <typename Fn>
double bisect_limit(Fn margin, double hi, double tol) {
    if (margin(hi) >= 0) return hi; // capped by travel, not by the balance
    double lo = 0;
    for (int i = 0; i < kMaxBisect && (hi - lo) > tol; ++i) {
        double mid = 0.5 * (lo + hi);
        if (margin(mid) >= 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

bool coupling_retained(double extension_m, double bend_deg, double lateral_m,
                       const SpringSpec& spring, const ConnectorGeometry& geom,
                       const ForceModel& force) {
    spring.validate();
    geom.validate();
    if (extension_m < 0 || lateral_m < 0 || bend_deg < 0)
        throw ValidationError("deformations must be >= 0");
    if (extension_m > spring.max_travel_m || lateral_m > spring.max_travel_m)
        throw OutOfTravelError("deformation beyond spring travel");
    double theta = bend_deg * kDeg;
    if (theta > kMaxBendRad) throw OutOfTravelError("bend angle beyond geometric validity");

    // combined demand: axial + lateral forces plus the bend torque resolved
    // through the moment arm, against the attraction at the implied gap
    double gap = geom.deformation_gap_ratio *
                 (extension_m + lateral_m + geom.moment_arm_m * std::sin(theta));
    double demand = spring.axial_stiffness_N_m * extension_m +
                    spring.lateral_stiffness_N_m * lateral_m +
                    spring.bending_stiffness_Nm_rad * theta /
                        (geom.moment_arm_m * bend_lever_factor(theta));
    return force(gap) >= demand;
}

double max_axial_extension(const SpringSpec& spring, const ConnectorGeometry& geom,
                           const ForceModel& force) {
    spring.validate();
    geom.validate();
    return bisect_limit([&](double x) { return axial_margin(x, spring, geom, force); },
                        spring.max_travel_m, kLengthTol);
}

double max_bend_angle_deg(const SpringSpec& spring, const ConnectorGeometry& geom,
                          const ForceModel& force) {
    spring.validate();
    geom.validate();
    double rad = bisect_limit([&](double t) { return bend_margin(t, spring, geom, force); },
                              kMaxBendRad, 1e-5);
    return rad / kDeg;
}

double max_lateral_offset(const SpringSpec& spring, const ConnectorGeometry& geom,
                          const ForceModel& force) {
    spring.validate();
    geom.validate();
    return bisect_limit([&](double d) { return lateral_margin(d, spring, geom, force); },
                        spring.max_travel_m, kLengthTol);
}

double max_connection_distance(const SpringSpec& spring_a, const ConnectorGeometry& geom_a,
                               const SpringSpec& spring_b, const ConnectorGeometry& geom_b,
                               const ForceModel& force) {
    return geom_a.body_length_m + geom_b.body_length_m +
           max_axial_extension(spring_a, geom_a, force) +
           max_axial_extension(spring_b, geom_b, force);
}

double fluidic_angular_tolerance_deg(const SpringSpec& conical_spring,
                                     const ConnectorGeometry& geom, const ForceModel& force) {
    if (conical_spring.kind != SpringKind::Conical)
        throw ValidationError("angular tolerance is defined for the conical spring");
    return max_bend_angle_deg(conical_spring, geom, force);
}

CalibratedFlex calibrate_springs(const FlexTargets& t, const ForceModel& force) {
    CalibratedFlex out;
    out.geometry.deformation_gap_ratio = 0.0; // faces stay seated while the spring deforms
    out.geometry.body_length_m = (t.connection_distance_m - 2.0 * t.axial_extension_m) / 2.0;
    out.geometry.validate();

    const double f0 = force(0.0);
    const double theta_b = t.bend_angle_deg * kDeg;
    const double theta_f = t.fluidic_angular_deg * kDeg;

    out.compression.kind = SpringKind::Compression;
    out.compression.axial_stiffness_N_m = f0 / t.axial_extension_m;
    out.compression.bending_stiffness_Nm_rad =
        f0 * out.geometry.moment_arm_m * bend_lever_factor(theta_b) / theta_b;
    out.compression.lateral_stiffness_N_m = f0 / t.lateral_offset_m;
    out.compression.free_length_m = 40e-3;
    out.compression.max_travel_m = 30e-3;
    out.compression.validate();

    out.conical = out.compression;
    out.conical.kind = SpringKind::Conical;
    out.conical.bending_stiffness_Nm_rad =
        f0 * out.geometry.moment_arm_m * bend_lever_factor(theta_f) / theta_f;
    out.conical.free_length_m = 25e-3;
    out.conical.max_travel_m = 20e-3;
    out.conical.validate();
    return out;
}

FlexLimits flex_limits(const CalibratedFlex& calib, const ForceModel& force) {
    FlexLimits lim;
    lim.axial_extension_m = max_axial_extension(calib.compression, calib.geometry, force);
    lim.bend_angle_deg = max_bend_angle_deg(calib.compression, calib.geometry, force);
    lim.lateral_offset_m = max_lateral_offset(calib.compression, calib.geometry, force);
    lim.connection_distance_m = max_connection_distance(calib.compression, calib.geometry,
                                                        calib.compression, calib.geometry, force);
    lim.fluidic_angular_tolerance_deg =
        fluidic_angular_tolerance_deg(calib.conical, calib.geometry, force);
    return lim;
}

} // namespace epm::compliance
