#include "epm/force.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace epm::force {

using magnetics::kMu0;

void ForceCalibration::validate() const {
    if (!(leakage_fraction >= 0 && leakage_fraction < 1))
        throw ValidationError("leakage_fraction must be in [0,1)");
    if (residual_gap_m < 0) throw ValidationError("residual_gap must be >= 0");
    if (!(effective_area_m2 > 0)) throw ValidationError("effective_area must be > 0");
    if (residual_force_floor_N < 0) throw ValidationError("residual force floor must be >= 0");
}

double holding_force(double b_gap_T, double area_m2) {
    if (b_gap_T < 0) throw ValidationError("flux density must be >= 0");
    return b_gap_T * b_gap_T * area_m2 / kMu0;
}

double predict_force(const magnetics::EPMAssembly& assembly, double gap_m,
                     const ForceCalibration& calib) {
    calib.validate();
    if (gap_m < 0) throw ValidationError("gap must be >= 0");
    if (assembly.alnico.polarization == magnetics::Polarization::Opposed)
        return calib.residual_force_floor_N;

    const double f_rem = magnetics::remanent_effective_mmf(assembly);
    const double c = calib.residual_gap_m;
    const magnetics::AirGapSpec gap_spec{gap_m + c, calib.effective_area_m2};
    const double b_raw = magnetics::gap_flux_density(f_rem, gap_spec, assembly.saturation_flux_T);
    const double b_pole = (1.0 - calib.leakage_fraction) * std::max(b_raw, 0.0);

    // fringing: the pole flux spreads over A*(1 + gap/c) as the gap opens
    const double a_eff = c > 0 ? calib.effective_area_m2 * (1.0 + gap_m / c)
                               : calib.effective_area_m2;
    const double phi = b_pole * calib.effective_area_m2;
    return holding_force(phi / a_eff, a_eff);
}

namespace {

struct Residuals {
    std::vector<double> r;
    double sse = 0;
};

Residuals eval_residuals(const std::vector<ForceMeasurement>& data,
                         const magnetics::EPMAssembly& assembly, const ForceCalibration& c) {
    Residuals out;
    out.r.reserve(data.size());
    for (const auto& m : data) {
        double v = predict_force(assembly, m.gap_m, c) - m.force_N;
        out.r.push_back(v);
        out.sse += v * v;
    }
    return out;
}

ForceCalibration clamp_params(ForceCalibration c) {
    c.leakage_fraction = std::clamp(c.leakage_fraction, 0.0, 1.0 - 1e-9);
    c.residual_gap_m = std::max(c.residual_gap_m, 1e-9);
    return c;
}

} // namespace

FitReport calibrate_force_model(const std::vector<ForceMeasurement>& data,
                                const magnetics::EPMAssembly& assembly) {
    std::set<double> gaps;
    for (const auto& m : data) gaps.insert(m.gap_m);
    if (gaps.size() < 3)
        throw UnderdeterminedFitError("force calibration needs >= 3 distinct gaps, got " +
                                      std::to_string(gaps.size()));

    ForceCalibration c;
    c.leakage_fraction = 0.3;
    c.residual_gap_m = 0.05e-3;

    constexpr int kMaxIter = 200;
    const double n = static_cast<double>(data.size());
    Residuals cur = eval_residuals(data, assembly, c);
    int it = 0;
    bool converged = false;
    for (; it < kMaxIter; ++it) {
        // forward-difference Jacobian in (leakage, residual_gap)
        const double h_lam = 1e-7;
        const double h_c = 1e-10;
        ForceCalibration cl = clamp_params({c.leakage_fraction + h_lam, c.residual_gap_m,
                                            c.effective_area_m2, c.residual_force_floor_N});
        ForceCalibration cc = clamp_params({c.leakage_fraction, c.residual_gap_m + h_c,
                                            c.effective_area_m2, c.residual_force_floor_N});
        Residuals rl = eval_residuals(data, assembly, cl);
        Residuals rc = eval_residuals(data, assembly, cc);

        double jtj[2][2] = {{0, 0}, {0, 0}};
        double jtr[2] = {0, 0};
        for (size_t i = 0; i < data.size(); ++i) {
            double j0 = (rl.r[i] - cur.r[i]) / h_lam;
            double j1 = (rc.r[i] - cur.r[i]) / h_c;
            jtj[0][0] += j0 * j0;
            jtj[0][1] += j0 * j1;
            jtj[1][1] += j1 * j1;
            jtr[0] += j0 * cur.r[i];
            jtr[1] += j1 * cur.r[i];
        }
        jtj[1][0] = jtj[0][1];

        // damped Gauss-Newton: inflate the diagonal until the step reduces SSE
        double damping = 0;
        bool stepped = false;
        for (int attempt = 0; attempt < 24; ++attempt) {
            double a00 = jtj[0][0] * (1 + damping);
            double a11 = jtj[1][1] * (1 + damping);
            double det = a00 * a11 - jtj[0][1] * jtj[1][0];
            if (std::abs(det) < 1e-300) break;
            double d0 = (-jtr[0] * a11 + jtr[1] * jtj[0][1]) / det;
            double d1 = (jtr[0] * jtj[1][0] - jtr[1] * a00) / det;
            ForceCalibration trial = clamp_params({c.leakage_fraction + d0, c.residual_gap_m + d1,
                                                   c.effective_area_m2, c.residual_force_floor_N});
            Residuals rt = eval_residuals(data, assembly, trial);
            if (rt.sse <= cur.sse) {
                double rel_step = std::abs(d0) + std::abs(d1) / std::max(c.residual_gap_m, 1e-12);
                double improvement = cur.sse - rt.sse;
                c = trial;
                cur = rt;
                stepped = true;
                if (rel_step < 1e-10 || improvement < 1e-18) converged = true;
                break;
            }
            damping = damping == 0 ? 1.0 : damping * 4.0;
        }
        if (!stepped || converged) {
            converged = true;
            ++it;
            break;
        }
    }

    FitReport report{c, std::sqrt(cur.sse / n), it};
    if (!converged)
        throw FitConvergenceError("force calibration did not converge in 200 iterations", report);
    return report;
}

std::vector<std::pair<double, double>> force_gap_curve(const magnetics::EPMAssembly& assembly,
                                                       const std::vector<double>& gaps_m,
                                                       const ForceCalibration& calib) {
    if (!std::is_sorted(gaps_m.begin(), gaps_m.end()))
        throw ValidationError("gaps must be sorted ascending");
    std::vector<std::pair<double, double>> curve;
    curve.reserve(gaps_m.size());
    for (double g : gaps_m) curve.emplace_back(g, predict_force(assembly, g, calib));
    return curve;
}

} // namespace epm::force
