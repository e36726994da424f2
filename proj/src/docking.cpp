#include "epm/docking.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "epm/errors.hpp"
#include "epm/magnetics.hpp"

namespace epm::docking {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;
constexpr double kMu0 = magnetics::kMu0;
} // namespace

void DockGeometry::validate() const {
    if (dipoles_per_arc < 2) throw ValidationError("need >= 2 dipoles per arc");
    if (!(arc_radius_m > 0 && face_radius_m > 0)) throw ValidationError("radii must be > 0");
    if (!(arc_moment_A_m2 > 0 && epm_moment_A_m2 > 0)) throw ValidationError("moments must be > 0");
    if (!(arc_half_span_deg > 0 && arc_half_span_deg <= 90))
        throw ValidationError("arc half-span must be in (0, 90] deg");
    if (arc_recess_m < 0 || epm_recess_m < 0) throw ValidationError("recess must be >= 0");
    if (bend_arm_m < 0) throw ValidationError("bend arm must be >= 0");
}

void ArcMagnetLayout::validate() const {
    if (dipole_positions.size() != dipole_moments.size())
        throw ValidationError("positions/moments size mismatch");
    int north = 0, south = 0;
    for (const auto& m : dipole_moments) {
        if (m.norm2() <= 0) throw ValidationError("dipole moments must be nonzero");
        (m.z >= 0 ? north : south)++;
    }
    if (north < 2 || south < 2)
        throw ValidationError("layout needs two opposite-pole arcs with >= 2 dipoles each");
    if (epm_moment.norm2() <= 0) throw ValidationError("EPM moment must be nonzero");
}

ArcMagnetLayout ArcMagnetLayout::build(const DockGeometry& g) {
    g.validate();
    ArcMagnetLayout l;
    const double half = g.arc_half_span_deg * kDeg;
    const double m_each = g.arc_moment_A_m2 / g.dipoles_per_arc;
    // arc 1 centered on +x (north up), arc 2 on -x (south up); midpoint sampling
    for (double center : {0.0, kPi}) {
        double sign = center == 0.0 ? +1.0 : -1.0;
        for (int i = 0; i < g.dipoles_per_arc; ++i) {
            double phi = center - half + (i + 0.5) * (2 * half / g.dipoles_per_arc);
            l.dipole_positions.push_back(
                {g.arc_radius_m * std::cos(phi), g.arc_radius_m * std::sin(phi), -g.arc_recess_m});
            l.dipole_moments.push_back({0, 0, sign * m_each});
        }
    }
    l.epm_position = {0, 0, -g.epm_recess_m};
    l.epm_moment = {0, 0, g.epm_moment_A_m2};
    l.face_radius_m = g.face_radius_m;
    l.bend_arm_m = g.bend_arm_m;
    l.validate();
    return l;
}

void DockingScenario::validate() const {
    if (!(tilt_alpha_deg >= 0 && tilt_alpha_deg < 90))
        throw ValidationError("tilt must be in [0, 90) deg");
    if (!(start_height_m > 0)) throw ValidationError("start height must be > 0");
    if (approach_speed_m_s < 0) throw ValidationError("approach speed must be >= 0");
}

void DockingParams::validate() const {
    if (!(rotor_damping > 0)) throw ValidationError("rotor damping must be > 0");
    if (bearing_friction_torque_Nm < 0 || gravity_load_N < 0 || spring_restoring_N_m < 0)
        throw ValidationError("loads must be >= 0");
    if (!(capture_threshold_m > 0)) throw ValidationError("capture threshold must be > 0");
    if (!(descent_step_m > 0)) throw ValidationError("descent step must be > 0");
    if (relax_max_iters < 1 || slide_steps < 1) throw ValidationError("iteration counts must be >= 1");
    if (mating_orientations_deg.empty()) throw ValidationError("need at least one mating orientation");
}

namespace {

struct DipoleSet {
    std::vector<Vec3> pos;
    std::vector<Vec3> mom;
};

DipoleSet world_set(const ArcMagnetLayout& layout, const RigidPose& pose, bool mirror_recess) {
    DipoleSet s;
    const size_t n = layout.dipole_positions.size() + 1;
    s.pos.reserve(n);
    s.mom.reserve(n);
    const double zs = mirror_recess ? -1.0 : 1.0;
    auto add = [&](Vec3 p, Vec3 m) {
        p.z *= zs;
        s.pos.push_back(pose.rotation * p + pose.translation);
        s.mom.push_back(pose.rotation * m);
    };
    for (size_t i = 0; i < layout.dipole_positions.size(); ++i)
        add(layout.dipole_positions[i], layout.dipole_moments[i]);
    add(layout.epm_position, layout.epm_moment);
    return s;
}

// force on dipole 2 and field of dipole 1 at dipole 2
inline void dipole_pair(const Vec3& p1, const Vec3& m1, const Vec3& p2, const Vec3& m2,
                        Vec3& force, Vec3& field) {
    Vec3 r = p2 - p1;
    double rn2 = r.norm2();
    if (rn2 < 1e-18) throw SingularSeparationError("coincident dipole positions");
    double rn = std::sqrt(rn2);
    Vec3 rh = r / rn;
    double m1r = m1.dot(rh), m2r = m2.dot(rh), m12 = m1.dot(m2);
    double pref = 3.0 * kMu0 / (4.0 * kPi * rn2 * rn2);
    force = pref * (rh * m12 + m1 * m2r + m2 * m1r - 5.0 * rh * (m1r * m2r));
    field = (kMu0 / (4.0 * kPi * rn2 * rn)) * (3.0 * rh * m1r - m1);
}

MagneticReaction interact(const DipoleSet& fixed, const DipoleSet& free_side,
                          const Vec3& axis_point, const Vec3& axis_dir) {
    MagneticReaction out;
    Vec3 torque_sum{0, 0, 0};
    for (size_t j = 0; j < free_side.pos.size(); ++j) {
        Vec3 f_j{0, 0, 0}, b_j{0, 0, 0};
        for (size_t i = 0; i < fixed.pos.size(); ++i) {
            Vec3 f, b;
            dipole_pair(fixed.pos[i], fixed.mom[i], free_side.pos[j], free_side.mom[j], f, b);
            f_j += f;
            b_j += b;
        }
        out.force_N += f_j;
        torque_sum += (free_side.pos[j] - axis_point).cross(f_j) + free_side.mom[j].cross(b_j);
    }
    out.axial_torque_Nm = torque_sum.dot(axis_dir);
    return out;
}

} // namespace

MagneticReaction magnetic_interaction(const RigidPose& pose_fixed, const RigidPose& pose_free,
                                      const ArcMagnetLayout& layout) {
    layout.validate();
    DipoleSet fixed = world_set(layout, pose_fixed, false);
    DipoleSet free_side = world_set(layout, pose_free, true);
    Vec3 axis = (pose_free.rotation * layout.rotor_axis).normalized();
    return interact(fixed, free_side, pose_free.translation, axis);
}

namespace {

struct SimContext {
    const ArcMagnetLayout* layout;
    DipoleSet fixed;
    Vec3 n1;   // fixed face normal
    Vec3 axis; // free rotor axis (vertical descent keeps it unrotated)
};

SimContext make_context(const ArcMagnetLayout& layout, double tilt_deg) {
    SimContext ctx;
    ctx.layout = &layout;
    RigidPose fixed_pose{Mat3::rot_y(tilt_deg * kDeg), {0, 0, 0}};
    ctx.fixed = world_set(layout, fixed_pose, false);
    ctx.n1 = fixed_pose.rotation * Vec3{0, 0, 1};
    ctx.axis = layout.rotor_axis.normalized();
    return ctx;
}

MagneticReaction eval_pose(const SimContext& ctx, const Vec3& center, double theta) {
    RigidPose free_pose{Mat3::rot_z(theta), center};
    DipoleSet free_side = world_set(*ctx.layout, free_pose, true);
    return interact(ctx.fixed, free_side, center, ctx.axis);
}

double torque_at(const SimContext& ctx, const Vec3& center, double theta) {
    return eval_pose(ctx, center, theta).axial_torque_Nm;
}

// damped quasi-static settling of the rotor angle: a slope-informed step
// toward the local torque equilibrium, capped per iteration by the damping
// proxy, with a fixed crawl step across slope-degenerate stretches. Stops
// inside the bearing friction deadband.
double relax_rotor(const SimContext& ctx, const Vec3& center, double theta,
                   const DockingParams& p, double* out_tau = nullptr) {
    const double dth = 1e-3;
    const double max_step = 25.0 * p.rotor_damping; // 0.25 rad at the default damping
    const double crawl = max_step / 5.0;
    double tau = torque_at(ctx, center, theta);
    for (int it = 0; it < p.relax_max_iters; ++it) {
        if (std::abs(tau) < p.bearing_friction_torque_Nm) break;
        double slope = (torque_at(ctx, center, theta + dth) - tau) / dth;
        double step = slope < -1e-12 ? tau / std::max(-slope, 1e-12)
                                     : (tau > 0 ? crawl : -crawl);
        step = std::clamp(step, -max_step, max_step);
        if (std::abs(step) < p.relax_tol_rad) break;
        theta += step;
        tau = torque_at(ctx, center, theta);
    }
    if (out_tau) *out_tau = tau;
    return theta;
}

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2 * kPi);
    if (a < 0) a += 2 * kPi;
    return a - kPi;
}

double misalign_deg_vs_mating(double theta_rad, const std::vector<double>& orientations_deg) {
    double best = 1e18;
    for (double o : orientations_deg)
        best = std::min(best, std::abs(wrap_angle(theta_rad - o * kDeg)));
    return best / kDeg;
}

} // namespace

DockTrace simulate_docking(const DockingScenario& sc, const DockingParams& p,
                           const ArcMagnetLayout& layout) {
    sc.validate();
    p.validate();
    layout.validate();

    SimContext ctx = make_context(layout, sc.tilt_alpha_deg);
    const double alpha = sc.tilt_alpha_deg * kDeg;
    const Vec3 n1 = ctx.n1;

    // capture once the face discs come within the threshold clearance; the
    // tilted rim touches first, lifting the center by face_radius*sin(alpha)
    const double h_cap = (p.capture_threshold_m + layout.face_radius_m * std::sin(alpha) -
                          n1.x * sc.x_offset_m - n1.y * sc.y_offset_m) /
                         n1.z;

    double theta = p.initial_rotor_angle_deg * kDeg;
    double max_step_tau = 0;
    for (double h = sc.start_height_m; h > 0; h -= p.descent_step_m) {
        Vec3 c{sc.x_offset_m, sc.y_offset_m, std::max(h, h_cap)};
        double tau_step = 0;
        theta = relax_rotor(ctx, c, theta, p, &tau_step);
        max_step_tau = std::max(max_step_tau, std::abs(tau_step));
    }
    const Vec3 c_cap{sc.x_offset_m, sc.y_offset_m, h_cap};
    double tau_cap = 0;
    theta = relax_rotor(ctx, c_cap, theta, p, &tau_cap);
    max_step_tau = std::max(max_step_tau, std::abs(tau_cap));

    MagneticReaction r = eval_pose(ctx, c_cap, theta);

    DockTrace tr;
    tr.relaxed_torque_Nm = tau_cap;
    tr.max_step_torque_Nm = max_step_tau;
    const Vec3 seat_closed = n1 * p.capture_threshold_m;
    Vec3 dvec = seat_closed - c_cap;
    Vec3 dhat = dvec.norm() > 1e-9 ? dvec.normalized() : -n1;
    tr.pull_to_seat_N = r.force_N.dot(dhat);

    const double snorm = c_cap.dot(n1);
    Vec3 lat = c_cap - n1 * snorm;
    tr.lateral_offset_m = lat.norm();
    tr.seat_deflection_m = tr.lateral_offset_m + layout.bend_arm_m * alpha * alpha;
    tr.required_force_N = p.gravity_load_N + p.spring_restoring_N_m * tr.seat_deflection_m;

    // quasi-static pull-in: slide the center to the seat line, rotor tracking
    const Vec3 seat_proj = n1 * snorm;
    for (int k = 1; k <= p.slide_steps; ++k) {
        double frac = static_cast<double>(k) / p.slide_steps;
        Vec3 c = c_cap * (1.0 - frac) + seat_proj * frac;
        theta = relax_rotor(ctx, c, theta, p);
    }
    tr.misalign_deg = misalign_deg_vs_mating(theta, p.mating_orientations_deg);

    const bool force_ok = tr.pull_to_seat_N >= tr.required_force_N;
    const bool angle_ok = tr.misalign_deg <= p.alignment_tolerance_deg;
    tr.outcome = force_ok && angle_ok ? DockOutcome::Success : DockOutcome::Fail;
    return tr;
}

int SuccessMap::success_count() const {
    int n = 0;
    for (const auto& row : grid)
        for (bool v : row) n += v ? 1 : 0;
    return n;
}

SuccessMap sweep_grid(double spacing_m, double tilt_deg, const DockingParams& params,
                      const ArcMagnetLayout& layout, int workers) {
    if (!(spacing_m > 0)) throw ValidationError("grid spacing must be > 0");
    SuccessMap map;
    map.spacing_m = spacing_m;
    map.tilt_alpha_deg = tilt_deg;

    auto run_point = [&](int ix, int iy) {
        DockingScenario sc;
        sc.x_offset_m = ix * spacing_m;
        sc.y_offset_m = iy * spacing_m;
        sc.tilt_alpha_deg = tilt_deg;
        return simulate_docking(sc, params, layout).outcome == DockOutcome::Success;
    };

    if (workers <= 1) {
        for (int ix = 0; ix < 7; ++ix)
            for (int iy = 0; iy < 7; ++iy) map.grid[ix][iy] = run_point(ix, iy);
        return map;
    }

    // grid points are independent; fixed placement keeps any worker count
    // byte-identical
    std::vector<std::thread> pool;
    std::array<bool, 49> flat{};
    const int n_workers = std::min(workers, 49);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int idx = w; idx < 49; idx += n_workers)
                flat[idx] = run_point(idx / 7, idx % 7);
        });
    }
    for (auto& t : pool) t.join();
    for (int idx = 0; idx < 49; ++idx) map.grid[idx / 7][idx % 7] = flat[idx];
    return map;
}

double success_rate(const SuccessMap& map) { return map.success_count() / 49.0; }

namespace {

struct PointField {
    double pull, d_lat, mis_deg;
};

bool monotone_axis(const std::array<std::array<bool, 7>, 7>& g) {
    auto check = [](auto get) {
        bool seen_fail = false;
        for (int i = 0; i < 7; ++i) {
            if (!get(i)) seen_fail = true;
            else if (seen_fail) return false;
        }
        return true;
    };
    return check([&](int i) { return g[i][0]; }) && check([&](int i) { return g[0][i]; });
}

} // namespace

DockCalibrationReport calibrate_dock(const ArcMagnetLayout& layout, const DockingParams& base,
                                     const std::array<int, 3>& target_counts, int workers) {
    const std::array<double, 3> tilts = {0.0, 10.0, 20.0};

    // the load parameters only gate the outcome, so the field of each grid
    // point is computed once per tilt and the (G, k) scan reuses it
    std::array<std::array<PointField, 49>, 3> fields;
    for (int t = 0; t < 3; ++t) {
        const double alpha = tilts[t] * kDeg;
        auto run_point = [&](int idx) {
            DockingScenario sc;
            sc.x_offset_m = (idx / 7) * 5e-3;
            sc.y_offset_m = (idx % 7) * 5e-3;
            sc.tilt_alpha_deg = tilts[t];
            DockTrace tr = simulate_docking(sc, base, layout);
            fields[t][idx] = {tr.pull_to_seat_N,
                              tr.seat_deflection_m - layout.bend_arm_m * alpha * alpha,
                              tr.misalign_deg};
        };
        if (workers <= 1) {
            for (int idx = 0; idx < 49; ++idx) run_point(idx);
        } else {
            std::vector<std::thread> pool;
            const int n_workers = std::min(workers, 49);
            for (int w = 0; w < n_workers; ++w)
                pool.emplace_back([&, w]() {
                    for (int idx = w; idx < 49; idx += n_workers) run_point(idx);
                });
            for (auto& th : pool) th.join();
        }
    }

    auto counts_for = [&](double G, double k, std::array<std::array<bool, 7>, 7>* maps,
                          double* min_margin) {
        std::array<int, 3> counts{};
        double mm = 1e18;
        for (int t = 0; t < 3; ++t) {
            const double alpha = tilts[t] * kDeg;
            for (int idx = 0; idx < 49; ++idx) {
                const PointField& f = fields[t][idx];
                double thr = G + k * (f.d_lat + layout.bend_arm_m * alpha * alpha);
                bool ok = f.pull >= thr && f.mis_deg <= base.alignment_tolerance_deg;
                maps[t][idx / 7][idx % 7] = ok;
                counts[t] += ok ? 1 : 0;
                mm = std::min(mm, std::abs(f.pull - thr));
            }
        }
        if (min_margin) *min_margin = mm;
        return counts;
    };

    DockCalibrationReport best;
    best.targets = target_counts;
    int best_score = 1 << 20;
    double best_margin = -1;
    for (int gi = 0; gi <= 120; ++gi) {
        double G = 1e-4 + gi * (0.02 - 1e-4) / 120.0;
        for (int ki = 0; ki <= 150; ++ki) {
            double k = ki * 1.5 / 150.0;
            std::array<std::array<std::array<bool, 7>, 7>, 3> maps;
            double margin = 0;
            auto counts = counts_for(G, k, maps.data(), &margin);
            if (!(counts[0] >= counts[1] && counts[1] >= counts[2])) continue;
            bool feasible = maps[0][0][0] && maps[1][0][0] && maps[2][0][0] && // origin capture
                            !maps[2][0][4];                                   // (0, 20 mm) fails at 20 deg
            for (int t = 0; t < 3 && feasible; ++t) feasible = monotone_axis(maps[t]);
            if (!feasible) continue;
            int score = 0;
            for (int t = 0; t < 3; ++t) score += std::abs(counts[t] - target_counts[t]);
            if (score < best_score || (score == best_score && margin > best_margin)) {
                best_score = score;
                best_margin = margin;
                best.params = base;
                best.params.gravity_load_N = G;
                best.params.spring_restoring_N_m = k;
                best.counts = counts;
                best.min_margin_N = margin;
                best.exact = score == 0;
            }
        }
    }
    if (best_margin < 0) throw Error("dock calibration found no feasible load parameters");
    return best;
}

} // namespace epm::docking
