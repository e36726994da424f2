// Spring/EPM interplay: mechanical-flexibility envelope of the connector
// (max axial extension, bend angle, lateral offset, connection distance).
#pragma once

#include <functional>

namespace epm::compliance {

enum class SpringKind { Conical, Compression };

struct SpringSpec {
    SpringKind kind = SpringKind::Compression;
    double axial_stiffness_N_m = 0;
    double bending_stiffness_Nm_rad = 0;
    double lateral_stiffness_N_m = 0;
    double free_length_m = 0;
    double max_travel_m = 0;

    void validate() const;
};

struct ConnectorGeometry {
    double body_length_m = 0;
    double face_area_m2 = 48.85e-6;
    double moment_arm_m = 16e-3;       // lever arm of the EPM closing torque
    // declared deformation -> internal face-gap mapping (linear); the EPM
    // faces stay seated while the spring deforms, so the default ratio is 0
    double deformation_gap_ratio = 0.0;

    void validate() const;
};

struct FlexLimits {
    double axial_extension_m = 0;
    double bend_angle_deg = 0;
    double lateral_offset_m = 0;
    double connection_distance_m = 0;
    double fluidic_angular_tolerance_deg = 0;
};

// Calibrated force-gap curve: newtons as a function of face gap (m).
using ForceModel = std::function<double(double)>;

// Torque lever factor: small-angle linearization below 10 degrees, full
// cos-law balance above (continuous at the joint).
double bend_lever_factor(double angle_rad);

// True iff the EPM attraction at the face gap implied by the deformation
// balances the spring restoring demands of all three axes together.
bool coupling_retained(double extension_m, double bend_deg, double lateral_m,
                       const SpringSpec& spring, const ConnectorGeometry& geom,
                       const ForceModel& force);

// Largest x with F(gap(x)) >= k_ax * x, bisected to 0.01 mm.
double max_axial_extension(const SpringSpec& spring, const ConnectorGeometry& geom,
                           const ForceModel& force);

// Largest bend angle with F*arm*lever(theta) >= k_b * theta.
double max_bend_angle_deg(const SpringSpec& spring, const ConnectorGeometry& geom,
                          const ForceModel& force);

double max_lateral_offset(const SpringSpec& spring, const ConnectorGeometry& geom,
                          const ForceModel& force);

// Two body lengths plus each half's maximum axial extension.
double max_connection_distance(const SpringSpec& spring_a, const ConnectorGeometry& geom_a,
                               const SpringSpec& spring_b, const ConnectorGeometry& geom_b,
                               const ForceModel& force);

// Angular tolerance of the fluidic connector's conical spring.
double fluidic_angular_tolerance_deg(const SpringSpec& conical_spring,
                                     const ConnectorGeometry& geom, const ForceModel& force);

struct FlexTargets {
    double axial_extension_m = 20e-3;
    double bend_angle_deg = 30.0;
    double lateral_offset_m = 6e-3;
    double connection_distance_m = 132e-3;
    double fluidic_angular_deg = 20.0;
};

struct CalibratedFlex {
    SpringSpec compression;
    SpringSpec conical;
    ConnectorGeometry geometry;
};

// Solves the spring stiffnesses and body length that meet the targets
// simultaneously under the given force model.
CalibratedFlex calibrate_springs(const FlexTargets& targets, const ForceModel& force);

FlexLimits flex_limits(const CalibratedFlex& calib, const ForceModel& force);

} // namespace epm::compliance
