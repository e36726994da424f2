#include "epm/fluidics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "epm/errors.hpp"
#include "epm/magnetics.hpp"

namespace epm::fluidics {

std::string to_string(TransferMode mode) {
    switch (mode) {
        case TransferMode::ParallelUnidirectional: return "parallel";
        case TransferMode::DualChannelCounterflow: return "dual";
        case TransferMode::SingleLoop: return "loop";
    }
    return "?";
}

TransferMode mode_from_string(const std::string& name) {
    if (name == "parallel") return TransferMode::ParallelUnidirectional;
    if (name == "dual") return TransferMode::DualChannelCounterflow;
    if (name == "loop") return TransferMode::SingleLoop;
    throw InvalidModeError("unknown transfer mode: " + name);
}

double ml_min_to_m3_s(double ml_min) { return ml_min * 1e-6 / 60.0; }
double m3_s_to_ml_min(double m3_s) { return m3_s * 60.0 * 1e6; }

double FluidGeometry::poiseuille_resistance(double length_m) const {
    const double r = tube_inner_diameter_m / 2.0;
    return 8.0 * water_viscosity_Pa_s * length_m / (magnetics::kPi * r * r * r * r);
}

namespace {

// One connector-half path: tank inlet -> rotary joint -> silicone tube.
// Appends elements from `from` and returns the exit node.
int append_half_path(FluidNetwork& net, const FluidGeometry& g, const std::string& tag,
                     int channel, int from) {
    int n1 = net.node_count++;
    int n2 = net.node_count++;
    net.elements.push_back({tag + ".tank", g.poiseuille_resistance(g.tank_equivalent_length_m),
                            ElementKind::TankPath, from, n1, channel});
    net.elements.push_back({tag + ".rotary", g.poiseuille_resistance(g.rotary_equivalent_length_m),
                            ElementKind::RotaryJoint, n1, n2, channel});
    int n3 = net.node_count++;
    net.elements.push_back({tag + ".tube", g.poiseuille_resistance(g.tube_length_m),
                            ElementKind::SiliconeTube, n2, n3, channel});
    return n3;
}

// Mating-port crossing: two port halves around a mid node that carries the
// pressure-driven leak shunt to ambient. Returns the exit node.
int append_crossing(FluidNetwork& net, const FluidGeometry& g, const std::string& tag,
                    int channel, int from, double leak_conductance) {
    int mid = net.node_count++;
    int out = net.node_count++;
    double r_half = g.poiseuille_resistance(g.port_half_equivalent_length_m);
    net.elements.push_back({tag + ".port_a", r_half, ElementKind::MatingPort, from, mid, channel});
    if (leak_conductance > 0)
        net.elements.push_back({tag + ".leak", 1.0 / leak_conductance, ElementKind::LeakShunt,
                                mid, kAmbientNode, 0});
    net.elements.push_back({tag + ".port_b", r_half, ElementKind::MatingPort, mid, out, channel});
    return out;
}

} // namespace

FluidNetwork build_network(TransferMode mode, const FluidGeometry& geometry,
                           const LossParams& losses) {
    FluidNetwork net;
    net.mode = mode;
    switch (mode) {
        case TransferMode::SingleLoop: {
            // c1 in-path -> crossing -> through c2 and back -> crossing -> c1
            // out-path: the fluid traverses the tank+channel chain of both
            // connectors twice, so the series resistance doubles a
            // dual-channel path exactly.
            int inlet = net.node_count++;
            int n = append_half_path(net, geometry, "c1.ch1", 1, inlet);
            n = append_crossing(net, geometry, "x1", 1, n, losses.leak_conductance_loop);
            n = append_half_path(net, geometry, "c2.ch1", 1, n);
            n = append_half_path(net, geometry, "c2.ch2", 1, n);
            n = append_crossing(net, geometry, "x2", 1, n, losses.leak_conductance_loop);
            int n1 = net.node_count++;
            int n2 = net.node_count++;
            net.elements.push_back({"c1.ch2.tube", geometry.poiseuille_resistance(geometry.tube_length_m),
                                    ElementKind::SiliconeTube, n, n1, 1});
            net.elements.push_back({"c1.ch2.rotary", geometry.poiseuille_resistance(geometry.rotary_equivalent_length_m),
                                    ElementKind::RotaryJoint, n1, n2, 1});
            net.elements.push_back({"c1.ch2.tank", geometry.poiseuille_resistance(geometry.tank_equivalent_length_m),
                                    ElementKind::TankPath, n2, kAmbientNode, 1});
            net.channel_inlets = {{inlet, "c1.ch2.tank"}};
            break;
        }
        case TransferMode::ParallelUnidirectional:
        case TransferMode::DualChannelCounterflow: {
            for (int ch : {1, 2}) {
                std::string side_in = "c1", side_out = "c2";
                if (mode == TransferMode::DualChannelCounterflow && ch == 2)
                    std::swap(side_in, side_out); // channel 2 runs the opposite way
                int inlet = net.node_count++;
                std::string tag_in = side_in + ".ch" + std::to_string(ch);
                std::string tag_out = side_out + ".ch" + std::to_string(ch);
                int n = append_half_path(net, geometry, tag_in, ch, inlet);
                n = append_crossing(net, geometry, "x" + std::to_string(ch), ch, n,
                                    losses.leak_conductance_dual);
                int n1 = net.node_count++;
                int n2 = net.node_count++;
                net.elements.push_back({tag_out + ".tube", geometry.poiseuille_resistance(geometry.tube_length_m),
                                        ElementKind::SiliconeTube, n, n1, ch});
                net.elements.push_back({tag_out + ".rotary", geometry.poiseuille_resistance(geometry.rotary_equivalent_length_m),
                                        ElementKind::RotaryJoint, n1, n2, ch});
                net.elements.push_back({tag_out + ".tank", geometry.poiseuille_resistance(geometry.tank_equivalent_length_m),
                                        ElementKind::TankPath, n2, kAmbientNode, ch});
                net.channel_inlets.emplace_back(inlet, tag_out + ".tank");
            }
            break;
        }
        default:
            throw InvalidModeError("unknown transfer mode");
    }
    return net;
}

namespace {

// Node-potential solve: conductance Laplacian over internal nodes, ambient
// grounded at zero pressure. Dense Gaussian elimination with partial
// pivoting; these networks have a dozen nodes.
std::vector<double> solve_pressures(const FluidNetwork& net, const std::vector<double>& injection) {
    const int n = net.node_count;
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i < n; ++i) a[i][n] = injection[i];
    for (const auto& e : net.elements) {
        if (!(e.resistance > 0)) throw ValidationError("element " + e.id + " needs resistance > 0");
        double g = 1.0 / e.resistance;
        if (e.from_node >= 0) a[e.from_node][e.from_node] += g;
        if (e.to_node >= 0) a[e.to_node][e.to_node] += g;
        if (e.from_node >= 0 && e.to_node >= 0) {
            a[e.from_node][e.to_node] -= g;
            a[e.to_node][e.from_node] -= g;
        }
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-30)
            throw NoPathError("fluid network is disconnected from ambient");
        std::swap(a[piv], a[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            if (f == 0) continue;
            for (int c2 = col; c2 <= n; ++c2) a[r][c2] -= f * a[col][c2];
        }
    }
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = a[i][n] / a[i][i];
    return p;
}

} // namespace

FlowResult solve_flow(const FluidNetwork& network, double inlet_ml_min) {
    if (inlet_ml_min < 0) throw ValidationError("inlet rate must be >= 0");
    FlowResult res;
    res.inlet_ml_min = inlet_ml_min;
    if (network.channel_inlets.empty()) throw NoPathError("network has no inlets");

    const double q_in = ml_min_to_m3_s(inlet_ml_min);
    std::vector<double> injection(network.node_count, 0.0);
    for (const auto& [node, outlet] : network.channel_inlets) injection[node] += q_in;

    std::vector<double> p = solve_pressures(network, injection);
    auto pressure = [&p](int node) { return node >= 0 ? p[node] : 0.0; };

    double total_out = 0, total_leak = 0;
    for (const auto& e : network.elements) {
        double q = (pressure(e.from_node) - pressure(e.to_node)) / e.resistance;
        res.per_edge_ml_min[e.id] = m3_s_to_ml_min(q);
        if (e.kind == ElementKind::LeakShunt) total_leak += q;
    }
    for (const auto& [node, outlet_id] : network.channel_inlets)
        total_out += ml_min_to_m3_s(res.per_edge_ml_min.at(outlet_id));

    res.total_in_ml_min = m3_s_to_ml_min(q_in * network.channel_inlets.size());
    res.total_out_ml_min = m3_s_to_ml_min(total_out);
    res.total_leak_ml_min = m3_s_to_ml_min(total_leak);
    res.outlet_ml_min = res.per_edge_ml_min.at(network.channel_inlets.front().second);
    res.efficiency = inlet_ml_min > 0 ? res.outlet_ml_min / inlet_ml_min : 1.0;
    return res;
}

namespace {

double efficiency_at(TransferMode mode, const FluidGeometry& g, double leak_conductance) {
    LossParams lp;
    if (mode == TransferMode::SingleLoop)
        lp.leak_conductance_loop = leak_conductance;
    else
        lp.leak_conductance_dual = leak_conductance;
    return solve_flow(build_network(mode, g, lp), 100.0).efficiency;
}

// The linear network's efficiency is rate-independent, so the least-squares
// outlet fit reduces to matching eta* = sum(q_in*q_out)/sum(q_in^2); the leak
// conductance then follows by bisection on the monotone eta(G).
double fit_conductance(TransferMode mode, const FluidGeometry& g, double eta_target) {
    if (eta_target >= 1.0) return 0.0;
    double lo = 0.0, hi = 1e-9;
    while (efficiency_at(mode, g, hi) > eta_target) {
        hi *= 2;
        if (hi > 1e3) throw Error("leak conductance fit failed to bracket");
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (efficiency_at(mode, g, mid) > eta_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

LossParams calibrate_losses(
    const std::vector<std::tuple<TransferMode, double, double>>& measurements_ml_min,
    const FluidGeometry& geometry) {
    if (measurements_ml_min.size() < 2)
        throw UnderdeterminedFitError(
            "loss calibration fits two conductances and needs >= 2 measurements");
    double num_loop = 0, den_loop = 0, num_dual = 0, den_dual = 0;
    for (const auto& [mode, q_in, q_out] : measurements_ml_min) {
        if (q_in <= 0) throw ValidationError("measurement inlet rates must be > 0");
        if (mode == TransferMode::SingleLoop) {
            num_loop += q_in * q_out;
            den_loop += q_in * q_in;
        } else {
            num_dual += q_in * q_out;
            den_dual += q_in * q_in;
        }
    }
    LossParams out;
    if (den_loop > 0)
        out.leak_conductance_loop =
            fit_conductance(TransferMode::SingleLoop, geometry, num_loop / den_loop);
    if (den_dual > 0)
        out.leak_conductance_dual =
            fit_conductance(TransferMode::DualChannelCounterflow, geometry, num_dual / den_dual);
    return out;
}

bool isolation_check(const FluidNetwork& network, int tracer_channel) {
    if (network.mode == TransferMode::SingleLoop)
        throw InvalidModeError("isolation check applies to dual-channel modes only");
    if (tracer_channel != 1 && tracer_channel != 2)
        throw ValidationError("tracer channel must be 1 or 2");

    FlowResult sol = solve_flow(network, 100.0);
    constexpr double kEps = 1e-12;

    // follow solved flow directions from the tracer inlet
    std::set<int> reached;
    std::queue<int> frontier;
    frontier.push(network.channel_inlets[tracer_channel - 1].first);
    reached.insert(frontier.front());
    std::set<std::string> reached_outlets;
    while (!frontier.empty()) {
        int node = frontier.front();
        frontier.pop();
        for (const auto& e : network.elements) {
            double q = sol.per_edge_ml_min.at(e.id);
            int src = q >= kEps ? e.from_node : (q <= -kEps ? e.to_node : -2);
            int dst = q >= kEps ? e.to_node : e.from_node;
            if (src != node) continue;
            for (const auto& [in_node, outlet_id] : network.channel_inlets)
                if (outlet_id == e.id) reached_outlets.insert(outlet_id);
            if (dst >= 0 && reached.insert(dst).second) frontier.push(dst);
        }
    }
    const std::string own_outlet = network.channel_inlets[tracer_channel - 1].second;
    for (const auto& id : reached_outlets)
        if (id != own_outlet) return false;
    return true;
}

} // namespace epm::fluidics
