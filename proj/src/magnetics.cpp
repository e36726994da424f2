#include "epm/magnetics.hpp"

#include <algorithm>
#include <cmath>

#include "epm/errors.hpp"

namespace epm::magnetics {

void MaterialProps::validate() const {
    if (!(coercivity_A_per_m > 0)) throw ValidationError(name + ": coercivity must be > 0");
    if (!(remanence_T > 0)) throw ValidationError(name + ": remanence must be > 0");
    if (!(recoil_permeability >= 1)) throw ValidationError(name + ": recoil permeability must be >= 1");
}

void MagnetSegment::validate() const {
    material.validate();
    if (!(length_m > 0)) throw ValidationError("magnet segment length must be > 0");
    if (!(cross_section_m2 > 0)) throw ValidationError("magnet cross-section must be > 0");
}

void CoilSpec::validate() const {
    if (turns < 1) throw ValidationError("coil needs at least one turn");
    if (!(resistance_ohm > 0)) throw InvalidCoilError("coil resistance must be > 0");
    if (wire_diameter_m < 0) throw ValidationError("wire diameter must be >= 0");
}

void AirGapSpec::validate() const {
    if (thickness_m < 0) throw ValidationError("air-gap thickness must be >= 0");
    if (!(area_m2 > 0)) throw ValidationError("air-gap area must be > 0");
}

void EPMAssembly::validate() const {
    alnico.validate();
    ndfeb.validate();
    coil.validate();
    for (const auto& g : gaps) g.validate();
    if (!(saturation_flux_T > 0)) throw ValidationError("saturation flux must be > 0");
}

void PulseSpec::validate() const {
    if (voltage_V < 0 || current_A < 0) throw ValidationError("pulse voltage/current must be >= 0");
    if (duration_s < 0) throw ValidationError("pulse duration must be >= 0");
}

double coil_current(double voltage_V, const CoilSpec& coil) {
    if (voltage_V < 0) throw ValidationError("voltage must be >= 0");
    if (!(coil.resistance_ohm > 0)) throw InvalidCoilError("coil resistance must be > 0");
    return voltage_V / coil.resistance_ohm;
}

bool opposes_drive(const MagnetSegment& segment, PulsePolarity polarity) {
    return (polarity == PulsePolarity::Magnetize && segment.polarization == Polarization::Opposed) ||
           (polarity == PulsePolarity::Demagnetize && segment.polarization == Polarization::Aligned);
}

namespace {

// rectangular hysteresis: a driven opposing segment consumes its full
// coercive MMF; an aligned segment (or an undriven circuit) consumes none
double switching_drop(const MagnetSegment& seg, double drive_At, PulsePolarity polarity) {
    if (drive_At <= 0) return 0.0;
    return opposes_drive(seg, polarity) ? seg.coercive_mmf_A() : 0.0;
}

} // namespace

double effective_mmf(const EPMAssembly& assembly, double drive_At, Winding winding,
                     PulsePolarity polarity) {
    if (drive_At < 0) throw ValidationError("drive must be >= 0");
    double f = drive_At - switching_drop(assembly.alnico, drive_At, polarity);
    if (winding == Winding::Both)
        f -= switching_drop(assembly.ndfeb, drive_At, polarity);
    return f;
}

double mmf_balance(const EPMAssembly& assembly, double drive_At) {
    const double g0 = assembly.gaps[0].thickness_m;
    const double g1 = assembly.gaps[1].thickness_m;
    if (std::abs(g0 - g1) > 1e-12)
        throw ValidationError("mmf_balance expects equal gap thicknesses");
    double net = drive_At;
    for (const MagnetSegment* seg : {&assembly.alnico, &assembly.ndfeb})
        net -= seg->sign_factor() * seg->coercive_mmf_A();
    if (g0 <= 0) {
        if (net != 0) throw SingularGapError("zero gap with nonzero net MMF");
        return 0.0;
    }
    return net / (2.0 * g0);
}

double gap_flux_density(double f_eff_At, const AirGapSpec& gap, double saturation_T) {
    if (!(gap.thickness_m > 0)) throw SingularGapError("gap thickness must be > 0");
    double b = kMu0 * f_eff_At / (2.0 * gap.thickness_m);
    return std::min(b, saturation_T);
}

double remanent_effective_mmf(const EPMAssembly& assembly) {
    double f = 0;
    for (const MagnetSegment* seg : {&assembly.alnico, &assembly.ndfeb})
        f += -seg->sign_factor() * seg->coercive_mmf_A();
    return f;
}

EPMAssembly apply_pulse(const EPMAssembly& assembly, const PulseSpec& pulse) {
    pulse.validate();
    EPMAssembly next = assembly;
    const double drive_At = assembly.coil.turns * pulse.current_A;
    const double h_coil = drive_At / assembly.alnico.length_m; // solenoid approximation
    if (h_coil > assembly.alnico.material.coercivity_A_per_m) {
        next.alnico.polarization = pulse.polarity == PulsePolarity::Magnetize
                                       ? Polarization::Aligned
                                       : Polarization::Opposed;
    }
    return next;
}

double pulse_energy(const PulseSpec& pulse) {
    return pulse.voltage_V * pulse.current_A * pulse.duration_s;
}

WindingCurves compare_windings(const EPMAssembly& assembly, const std::vector<double>& voltages) {
    // both-consuming stroke: drive opposing the NdFeB with the AlNiCo aligned
    EPMAssembly stroke = assembly;
    stroke.alnico.polarization = Polarization::Aligned;
    stroke.ndfeb.polarization = Polarization::Aligned;

    WindingCurves curves;
    curves.voltage_V.reserve(voltages.size());
    for (double v : voltages) {
        const double ni = assembly.coil.turns * coil_current(v, assembly.coil);
        const double fa = effective_mmf(stroke, ni, Winding::AlnicoOnly, PulsePolarity::Demagnetize);
        const double fb = effective_mmf(stroke, ni, Winding::Both, PulsePolarity::Demagnetize);
        curves.voltage_V.push_back(v);
        curves.b_alnico_only_T.push_back(gap_flux_density(fa, assembly.gaps[0], assembly.saturation_flux_T));
        curves.b_both_T.push_back(gap_flux_density(fb, assembly.gaps[0], assembly.saturation_flux_T));
    }
    return curves;
}

EPMAssembly make_default_assembly() {
    EPMAssembly a;
    a.alnico.material = {"AlNiCo-5", 48e3, 1.26, 3.0};
    a.alnico.length_m = 7e-3;
    a.alnico.cross_section_m2 = kPi * 2.5e-3 * 2.5e-3; // 5 mm rod
    a.alnico.polarization = Polarization::Aligned;
    a.ndfeb.material = {"NdFeB-N35", 870e3, 1.17, 1.05};
    a.ndfeb.length_m = 7e-3;
    a.ndfeb.cross_section_m2 = kPi * 2.5e-3 * 2.5e-3;
    a.ndfeb.polarization = Polarization::Aligned;
    a.coil = {120, 0.15e-3, 3.0, Winding::AlnicoOnly};
    a.gaps = {AirGapSpec{0.5e-3, 48.85e-6}, AirGapSpec{0.5e-3, 48.85e-6}};
    a.saturation_flux_T = a.alnico.material.remanence_T;
    a.validate();
    return a;
}

} // namespace epm::magnetics
