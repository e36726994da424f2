// Hydraulic-resistance network of the coupled connector pair in the three
// transfer modes, with pressure-driven leak shunts at the mating interfaces.
#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace epm::fluidics {

enum class TransferMode { ParallelUnidirectional, DualChannelCounterflow, SingleLoop };

std::string to_string(TransferMode mode);
TransferMode mode_from_string(const std::string& name); // "parallel" | "dual" | "loop"

enum class ElementKind { TankPath, RotaryJoint, SiliconeTube, MatingPort, LeakShunt };

struct HydraulicElement {
    std::string id;
    double resistance = 0;   // Pa.s/m^3
    ElementKind kind = ElementKind::SiliconeTube;
    int from_node = -1;
    int to_node = -1;        // kAmbientNode discharges to the reference pressure
    int channel = 0;         // 1 or 2; 0 for shared/leak elements
};

inline constexpr int kAmbientNode = -1;

struct FluidGeometry {
    double tube_inner_diameter_m = 2e-3;   // silicone tube, 3 mm OD / 2 mm ID
    double tube_length_m = 0.15;           // per connector half
    double tank_equivalent_length_m = 0.05;
    double rotary_equivalent_length_m = 0.02;
    double port_half_equivalent_length_m = 0.01;
    double water_viscosity_Pa_s = 1.0016e-3; // water at 20 C

    double poiseuille_resistance(double length_m) const;
};

struct LossParams {
    double leak_conductance_loop = 0;  // m^3/s per Pa, shared by both loop crossings
    double leak_conductance_dual = 0;  // shared by the dual-mode crossings
};

struct FluidNetwork {
    TransferMode mode = TransferMode::SingleLoop;
    int node_count = 0;
    std::vector<HydraulicElement> elements;
    // per channel: node the pump feeds and the element id measured as outlet
    std::vector<std::pair<int, std::string>> channel_inlets; // (node, outlet element id)
};

struct FlowResult {
    double inlet_ml_min = 0;
    double outlet_ml_min = 0;
    double efficiency = 1.0;                 // outlet/inlet; 1 by convention at zero inflow
    std::map<std::string, double> per_edge_ml_min;
    double total_in_ml_min = 0;              // all injections
    double total_out_ml_min = 0;             // all channel outlets
    double total_leak_ml_min = 0;            // all leak shunts
};

FluidNetwork build_network(TransferMode mode, const FluidGeometry& geometry,
                           const LossParams& losses);

// Solves the linear resistance network with `inlet_ml_min` injected at every
// channel inlet; reports the channel-1 outlet and efficiency.
FlowResult solve_flow(const FluidNetwork& network, double inlet_ml_min);

// Fits the two leak conductances (single-loop crossings share one value, the
// dual-mode crossings the other) to (mode, inlet, outlet) measurements.
LossParams calibrate_losses(
    const std::vector<std::tuple<TransferMode, double, double>>& measurements_ml_min,
    const FluidGeometry& geometry);

// True iff a tracer at the channel's inlet reaches only that channel's outlet,
// following solved flow directions. Single-loop networks are one circuit by
// design and are rejected.
bool isolation_check(const FluidNetwork& network, int tracer_channel);

double ml_min_to_m3_s(double ml_min);
double m3_s_to_ml_min(double m3_s);

} // namespace epm::fluidics
