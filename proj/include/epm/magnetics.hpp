// Lumped magnetic-circuit model of an electro-permanent magnet: MMF balance,
// effective MMF per winding configuration, gap flux density, polarization
// switching and pulse energy.
#pragma once

#include <array>
#include <string>
#include <vector>

namespace epm::magnetics {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kMu0 = 4e-7 * kPi; // H/m

struct MaterialProps {
    std::string name;
    double coercivity_A_per_m = 0;
    double remanence_T = 0;
    double recoil_permeability = 1.0;

    void validate() const;
};

// Polarization relative to the circuit reference direction (the NdFeB
// magnetization, which never switches at modeled drive levels).
enum class Polarization { Aligned, Opposed };

enum class Winding { AlnicoOnly, Both };

enum class PulsePolarity { Magnetize, Demagnetize };

struct MagnetSegment {
    MaterialProps material;
    double length_m = 0;
    double cross_section_m2 = 0;
    Polarization polarization = Polarization::Aligned;

    // Balance sign convention: sigma=+1 demagnetizing (Opposed), -1 magnetizing
    // (Aligned). Derived from the polarization so the two cannot disagree.
    int sign_factor() const { return polarization == Polarization::Opposed ? +1 : -1; }
    double coercive_mmf_A() const { return material.coercivity_A_per_m * length_m; }

    void validate() const;
};

struct CoilSpec {
    int turns = 0;
    double wire_diameter_m = 0;
    double resistance_ohm = 0;
    Winding winding = Winding::AlnicoOnly;

    void validate() const;
};

struct AirGapSpec {
    double thickness_m = 0;
    double area_m2 = 0;

    void validate() const;
};

struct EPMAssembly {
    MagnetSegment alnico;
    MagnetSegment ndfeb;
    CoilSpec coil;
    std::array<AirGapSpec, 2> gaps;
    double saturation_flux_T = 0; // defaults to the AlNiCo remanence in make_default

    void validate() const;
};

struct PulseSpec {
    double voltage_V = 0;
    double current_A = 0;
    double duration_s = 0;
    PulsePolarity polarity = PulsePolarity::Magnetize;

    void validate() const;
};

// Ohm's law feeding the coil drive NI.
double coil_current(double voltage_V, const CoilSpec& coil);

// Does `segment` oppose a drive of the given polarity? (Opposing segments are
// the MMF consumers of the switching stroke.)
bool opposes_drive(const MagnetSegment& segment, PulsePolarity polarity);

// Effective MMF delivered to the air gaps during a switching stroke:
//   AlnicoOnly:  NI - H_Al*L_Al
//   Both:        NI - H_Al*L_Al - H_Nd*L_Nd
// Operating intensities follow the rectangular hysteresis idealization:
// full coercivity for a driven segment that opposes the drive, zero for an
// aligned one (and zero at zero drive). May be negative; callers interpret.
double effective_mmf(const EPMAssembly& assembly, double drive_At, Winding winding,
                     PulsePolarity polarity = PulsePolarity::Magnetize);

// Gap field intensity H_g from the full MMF balance
//   NI = 2*H_g*g + sum_i sigma_i*H_i*L_i
// with every segment at its coercive operating point, signed by polarization.
// Requires both gaps at equal thickness g.
double mmf_balance(const EPMAssembly& assembly, double drive_At);

// B_g = mu0 * f_eff / (2g), clamped above at `saturation_T`.
double gap_flux_density(double f_eff_At, const AirGapSpec& gap, double saturation_T);

// Effective MMF available at the gaps from the magnets alone (zero drive);
// positive in the fully aligned (ON) state.
double remanent_effective_mmf(const EPMAssembly& assembly);

// Re-polarizes the AlNiCo segment when the coil field NI/L_Al exceeds its
// coercivity; the NdFeB never switches. Pure: returns the new assembly.
EPMAssembly apply_pulse(const EPMAssembly& assembly, const PulseSpec& pulse);

double pulse_energy(const PulseSpec& pulse);

struct WindingCurves {
    std::vector<double> voltage_V;
    std::vector<double> b_alnico_only_T;
    std::vector<double> b_both_T;
};

// Matched-NI comparison of the two winding configurations, evaluated for the
// switching stroke in which both magnet segments consume MMF (the worst case
// the single-winding design avoids paying for).
WindingCurves compare_windings(const EPMAssembly& assembly, const std::vector<double>& voltages);

// Assembly defaults: AlNiCo-5 + N35/N40-grade NdFeB rods (7 mm), 120-turn
// 3-ohm coil, 48.85 mm^2 end-cap gaps.
EPMAssembly make_default_assembly();

} // namespace epm::magnetics
