// Connector-pair lifecycle state machine with pogo-pin mapping, framed
// data-link simulation and LED status semantics.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epm::coupling {

enum class ConnectorState { Disconnected, Approaching, Aligned, Coupled, LinkUp, Demagnetizing };

constexpr std::array<ConnectorState, 6> kAllStates = {
    ConnectorState::Disconnected, ConnectorState::Approaching, ConnectorState::Aligned,
    ConnectorState::Coupled,      ConnectorState::LinkUp,      ConnectorState::Demagnetizing};

std::string to_string(ConnectorState s);

enum class EventType {
    ProximityReached,
    AlignmentConverged,
    MagnetizePulse,
    DemagnetizePulse,
    SendFrame,
    LinkProbeOk,
    Timeout,
};

constexpr std::array<EventType, 7> kAllEvents = {
    EventType::ProximityReached, EventType::AlignmentConverged, EventType::MagnetizePulse,
    EventType::DemagnetizePulse, EventType::SendFrame,          EventType::LinkProbeOk,
    EventType::Timeout};

std::string to_string(EventType e);

struct Frame {
    std::vector<std::uint8_t> payload;
    std::string source;   // connector id
    std::uint64_t seq = 0;
};

inline constexpr std::size_t kDefaultMtu = 256;

struct Event {
    EventType type = EventType::Timeout;
    std::optional<Frame> frame; // present for SendFrame
};

enum class GreenLed { Off, Solid };
enum class RedLed { Off, Blink };

struct LedState {
    GreenLed green = GreenLed::Off;
    RedLed red = RedLed::Off;
};

struct Action {
    enum class Kind { SetGreenSolid, LedsOff, TransmitFrame, RejectedEvent };
    Kind kind;
    std::string detail;
};

struct StepResult {
    ConnectorState next;
    std::vector<Action> actions;
};

// Total transition function; undefined state/event pairs are explicit no-ops
// carrying a RejectedEvent action, never failures.
StepResult step(ConnectorState state, const Event& event);

enum class Pin { VCC, GND, TX, RX };

std::string to_string(Pin p);

struct PinMap {
    // mapping[pin] = peer pin
    std::array<Pin, 4> mapping;

    Pin peer(Pin p) const { return mapping[static_cast<int>(p)]; }
    bool is_bijection() const;
};

// Returns the crossed one-to-one map (VCC-VCC, GND-GND, TX-RX, RX-TX) for
// every orientation at which the symmetric pin pattern self-coincides
// (default {0, 180} degrees), no-mate otherwise.
std::optional<PinMap> mate_pins(double relative_orientation_deg,
                                const std::vector<double>& mating_orientations_deg = {0.0, 180.0});

struct TransferResult {
    bool delivered = false;
    std::string reason;
    LedState led_a;
    LedState led_b;
};

// Frame delivery gate: both endpoints must be in LinkUp; red LEDs blink on
// both sides for the frame duration when delivery happens.
TransferResult transfer(const Frame& frame, ConnectorState endpoint_a, ConnectorState endpoint_b,
                        const PinMap& pinmap, std::size_t mtu = kDefaultMtu);

LedState led_status(ConnectorState state, bool transmitting);

// Scripted two-connector simulation. Script lines: "<time_ms> <A|B> <event>",
// where <event> is one of proximity, aligned, magnetize, demagnetize,
// probe_ok, timeout, send:<payload>. Emits one JSON object per step.
class PairSimulator {
  public:
    PairSimulator();
    // runs one scripted event; returns the JSON trace line
    std::string apply_line(const std::string& line, long lineno);
    std::vector<std::string> run_script(const std::string& script_text);

    ConnectorState state(const std::string& id) const;

  private:
    std::map<std::string, ConnectorState> states_;
    std::map<std::string, std::uint64_t> next_seq_;
};

} // namespace epm::coupling
