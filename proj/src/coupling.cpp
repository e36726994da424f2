#include "epm/coupling.hpp"

#include <cmath>
#include <sstream>

#include "epm/errors.hpp"

namespace epm::coupling {

std::string to_string(ConnectorState s) {
    switch (s) {
        case ConnectorState::Disconnected: return "Disconnected";
        case ConnectorState::Approaching: return "Approaching";
        case ConnectorState::Aligned: return "Aligned";
        case ConnectorState::Coupled: return "Coupled";
        case ConnectorState::LinkUp: return "LinkUp";
        case ConnectorState::Demagnetizing: return "Demagnetizing";
    }
    return "?";
}

std::string to_string(EventType e) {
    switch (e) {
        case EventType::ProximityReached: return "ProximityReached";
        case EventType::AlignmentConverged: return "AlignmentConverged";
        case EventType::MagnetizePulse: return "MagnetizePulse";
        case EventType::DemagnetizePulse: return "DemagnetizePulse";
        case EventType::SendFrame: return "SendFrame";
        case EventType::LinkProbeOk: return "LinkProbeOk";
        case EventType::Timeout: return "Timeout";
    }
    return "?";
}

std::string to_string(Pin p) {
    switch (p) {
        case Pin::VCC: return "VCC";
        case Pin::GND: return "GND";
        case Pin::TX: return "TX";
        case Pin::RX: return "RX";
    }
    return "?";
}

StepResult step(ConnectorState state, const Event& event) {
    using S = ConnectorState;
    using E = EventType;
    auto noop = [&](const char* why) {
        return StepResult{state, {Action{Action::Kind::RejectedEvent, why}}};
    };

    switch (event.type) {
        case E::ProximityReached:
            if (state == S::Disconnected) return {S::Approaching, {}};
            return noop("proximity event outside Disconnected");
        case E::AlignmentConverged:
            if (state == S::Approaching) return {S::Aligned, {}};
            return noop("alignment event outside Approaching");
        case E::MagnetizePulse:
            if (state == S::Aligned)
                return {S::Coupled, {Action{Action::Kind::SetGreenSolid, "coupled"}}};
            return noop("magnetize pulse outside Aligned");
        case E::LinkProbeOk:
            if (state == S::Coupled) return {S::LinkUp, {}};
            return noop("link probe outside Coupled");
        case E::DemagnetizePulse:
            if (state == S::Coupled || state == S::LinkUp)
                return {S::Demagnetizing, {Action{Action::Kind::LedsOff, "demagnetizing"}}};
            if (state == S::Demagnetizing) return {S::Disconnected, {}};
            return noop("demagnetize pulse outside a coupled state");
        case E::Timeout:
            if (state == S::Demagnetizing) return {S::Disconnected, {}};
            return noop("timeout has no effect here");
        case E::SendFrame:
            if (state == S::LinkUp)
                return {S::LinkUp, {Action{Action::Kind::TransmitFrame, "frame queued"}}};
            return noop("no physical link");
    }
    return noop("unknown event");
}

bool PinMap::is_bijection() const {
    bool seen[4] = {false, false, false, false};
    for (Pin p : mapping) {
        int i = static_cast<int>(p);
        if (seen[i]) return false;
        seen[i] = true;
    }
    return true;
}

std::optional<PinMap> mate_pins(double relative_orientation_deg,
                                const std::vector<double>& mating_orientations_deg) {
    if (relative_orientation_deg < 0 || relative_orientation_deg >= 360.0)
        throw ValidationError("orientation must be in [0, 360)");
    constexpr double kTol = 1e-6;
    for (double o : mating_orientations_deg) {
        if (std::abs(relative_orientation_deg - o) <= kTol) {
            // the symmetric pad layout pairs like-for-like power and crossed data
            PinMap m;
            m.mapping[static_cast<int>(Pin::VCC)] = Pin::VCC;
            m.mapping[static_cast<int>(Pin::GND)] = Pin::GND;
            m.mapping[static_cast<int>(Pin::TX)] = Pin::RX;
            m.mapping[static_cast<int>(Pin::RX)] = Pin::TX;
            return m;
        }
    }
    return std::nullopt;
}

TransferResult transfer(const Frame& frame, ConnectorState endpoint_a, ConnectorState endpoint_b,
                        const PinMap& pinmap, std::size_t mtu) {
    TransferResult res;
    if (!pinmap.is_bijection()) throw ValidationError("pin map is not a bijection");
    if (frame.payload.size() > mtu)
        throw ValidationError("frame exceeds MTU");
    const bool a_up = endpoint_a == ConnectorState::LinkUp;
    const bool b_up = endpoint_b == ConnectorState::LinkUp;
    if (a_up && b_up) {
        res.delivered = true;
        res.led_a = led_status(endpoint_a, true);
        res.led_b = led_status(endpoint_b, true);
    } else {
        res.delivered = false;
        res.reason = !a_up ? "endpoint A not in LinkUp" : "endpoint B not in LinkUp";
        res.led_a = led_status(endpoint_a, false);
        res.led_b = led_status(endpoint_b, false);
    }
    return res;
}

LedState led_status(ConnectorState state, bool transmitting) {
    LedState led;
    if (state == ConnectorState::Coupled || state == ConnectorState::LinkUp)
        led.green = GreenLed::Solid;
    // red marks active frame transfer, which only happens with a link up
    if (transmitting && state == ConnectorState::LinkUp) led.red = RedLed::Blink;
    return led;
}

PairSimulator::PairSimulator() {
    states_["A"] = ConnectorState::Disconnected;
    states_["B"] = ConnectorState::Disconnected;
    next_seq_["A"] = 0;
    next_seq_["B"] = 0;
}

ConnectorState PairSimulator::state(const std::string& id) const { return states_.at(id); }

namespace {

Event parse_event(const std::string& token, const std::string& connector, std::uint64_t seq,
                  long lineno) {
    Event ev;
    if (token == "proximity") ev.type = EventType::ProximityReached;
    else if (token == "aligned") ev.type = EventType::AlignmentConverged;
    else if (token == "magnetize") ev.type = EventType::MagnetizePulse;
    else if (token == "demagnetize") ev.type = EventType::DemagnetizePulse;
    else if (token == "probe_ok") ev.type = EventType::LinkProbeOk;
    else if (token == "timeout") ev.type = EventType::Timeout;
    else if (token.rfind("send:", 0) == 0) {
        ev.type = EventType::SendFrame;
        Frame f;
        std::string body = token.substr(5);
        f.payload.assign(body.begin(), body.end());
        f.source = connector;
        f.seq = seq;
        ev.frame = f;
    } else {
        throw DataFormatError("unknown event token: " + token, lineno);
    }
    return ev;
}

std::string led_json(const LedState& led) {
    std::string s = "{\"green\":\"";
    s += led.green == GreenLed::Solid ? "solid" : "off";
    s += "\",\"red\":\"";
    s += led.red == RedLed::Blink ? "blink" : "off";
    s += "\"}";
    return s;
}

} // namespace

std::string PairSimulator::apply_line(const std::string& line, long lineno) {
    std::istringstream in(line);
    long time_ms;
    std::string id, token;
    if (!(in >> time_ms >> id >> token))
        throw DataFormatError("expected '<time_ms> <connector> <event>'", lineno);
    if (!states_.count(id)) throw DataFormatError("unknown connector id: " + id, lineno);

    Event ev = parse_event(token, id, next_seq_[id], lineno);
    ConnectorState before = states_[id];
    StepResult r = step(before, ev);
    states_[id] = r.next;

    bool transmitting = false;
    std::string frame_note;
    if (ev.type == EventType::SendFrame) {
        const std::string other = id == "A" ? "B" : "A";
        PinMap pm = *mate_pins(0.0);
        TransferResult tr = transfer(*ev.frame, states_[id], states_[other], pm);
        transmitting = tr.delivered;
        std::ostringstream fn;
        fn << ",\"seq\":" << ev.frame->seq << ",\"delivered\":" << (tr.delivered ? "true" : "false");
        frame_note = fn.str();
        if (tr.delivered) next_seq_[id] = ev.frame->seq + 1; // strictly increasing per source
    }

    std::ostringstream out;
    out << "{\"time_ms\":" << time_ms << ",\"connector\":\"" << id << "\",\"state_before\":\""
        << to_string(before) << "\",\"event\":\"" << to_string(ev.type) << "\",\"state_after\":\""
        << to_string(r.next) << "\",\"leds\":" << led_json(led_status(r.next, transmitting))
        << frame_note;
    for (const auto& a : r.actions)
        if (a.kind == Action::Kind::RejectedEvent)
            out << ",\"rejected\":\"" << a.detail << "\"";
    out << "}";
    return out.str();
}

std::vector<std::string> PairSimulator::run_script(const std::string& script_text) {
    std::vector<std::string> trace;
    std::istringstream in(script_text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        trace.push_back(apply_line(line, lineno));
    }
    return trace;
}

} // namespace epm::coupling
