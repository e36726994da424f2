// Holding-force model: Maxwell stress at the pole faces driven by the
// saturation-limited remanent circuit flux, with a two-parameter calibration
// (leakage fraction, residual/fringing gap) fitted to force-gap measurements.
#pragma once

#include <utility>
#include <vector>

#include "epm/errors.hpp"
#include "epm/magnetics.hpp"

namespace epm::force {

struct ForceCalibration {
    double leakage_fraction = 0.3;      // fraction of circuit flux bypassing the gaps
    double residual_gap_m = 0.05e-3;    // surface roughness / fringing length
    double effective_area_m2 = 48.85e-6;
    double residual_force_floor_N = 0.0; // force reported in the demagnetized state

    void validate() const;
};

struct ForceMeasurement {
    double gap_m = 0;
    double force_N = 0;
};

// Maxwell stress pull across the two pole faces of the circuit:
//   F = 2 * B^2 A / (2 mu0)
double holding_force(double b_gap_T, double area_m2);

// Remanent-state holding force at an air gap `gap_m`:
//  - f_rem from the magnet stack, B evaluated at (gap + residual_gap) with the
//    saturation clamp (the magnets cap the circuit flux),
//  - flux scaled by (1 - leakage_fraction),
//  - Maxwell stress applied over the fringing-spread effective area
//    A_eff = A * (1 + gap/residual_gap), which spreads the constant pole flux
//    as the gap opens and gives the measured slow force tail.
// A demagnetized assembly returns the configured residual floor.
double predict_force(const magnetics::EPMAssembly& assembly, double gap_m,
                     const ForceCalibration& calib);

struct FitReport {
    ForceCalibration calibration;
    double rmse_N = 0;
    int iterations = 0;
};

// Carries the best-so-far fit when the iteration cap is exhausted.
struct FitConvergenceError : Error {
    FitConvergenceError(const std::string& msg, FitReport best_so_far)
        : Error(msg), best(std::move(best_so_far)) {}
    FitReport best;
};

// Damped Gauss-Newton least-squares fit of (leakage_fraction, residual_gap);
// fixed initialization (0.3, 0.05 mm), at most 200 iterations, deterministic.
FitReport calibrate_force_model(const std::vector<ForceMeasurement>& data,
                                const magnetics::EPMAssembly& assembly);

// Pointwise predict_force over ascending gaps.
std::vector<std::pair<double, double>> force_gap_curve(const magnetics::EPMAssembly& assembly,
                                                       const std::vector<double>& gaps_m,
                                                       const ForceCalibration& calib);

} // namespace epm::force
