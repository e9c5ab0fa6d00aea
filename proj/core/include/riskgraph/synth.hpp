#pragma once

#include "riskgraph/rng.hpp"
#include "riskgraph/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace riskgraph::synth {

/// Scalar scenario parameter: fixed value or uniform draw from [lo, hi].
struct Param {
    double lo = 0.0;
    double hi = 0.0;
    Param() = default;
    Param(double v) : lo(v), hi(v) {} // NOLINT: implicit by design
    Param(double l, double h) : lo(l), hi(h) {}
    double sample(Rng& rng) const { return lo == hi ? lo : uniform(rng, lo, hi); }
};

enum class EventType { cut_in, braking_lead, free_flow };

/// How a context vehicle's lane is chosen relative to the event.
enum class LaneSel : int {
    lane1 = 1,
    lane2 = 2,
    lane3 = 3,
    source = 10,  ///< the cutter's origin lane
    opposite = 11 ///< mirror of the cutter's origin lane
};

/// Passive vehicle scripted alongside an event. `dy` is its longitudinal
/// offset from the host at the event trigger time.
struct ContextVehicleSpec {
    LaneSel lane = LaneSel::lane2;
    Param dy{30.0};
    Param rel_speed{0.0};    ///< own speed minus host cruise speed
    bool match_cutter = false; ///< take the cutter's own speed instead
};

/// One scripted traffic event, optionally repeated `count` times spaced
/// `period` seconds apart with parameters re-drawn per instance.
/// t_start is the maneuver trigger: cut-in boundary crossing or lead
/// brake onset; for free_flow it only anchors the context vehicles.
struct EventSpec {
    EventType type = EventType::cut_in;
    double t_start = 8.4;
    int count = 1;
    double period = 8.0;
    int from_lane = 0;        ///< cut_in origin: 1 or 3; 0 = random pick
    Param gap{12.0};          ///< maneuver vehicle dy at trigger, m
    Param rel_speed{0.0};     ///< maneuver vehicle dvy at trigger, m/s
    Param severity{0.5};      ///< scene severity in [0,1] driving the response
    Param lead_decel{3.0};    ///< braking_lead deceleration, m/s^2
    double lead_brake_time = 2.0;
    double cut_duration = 1.6; ///< lateral maneuver time, s
    std::vector<ContextVehicleSpec> context;
};

/// Driver response rule: `delay` seconds after an event trigger the host's
/// ax follows a first-order lag (time constant tau) toward
/// -max_decel*severity, holds for brake_time seconds, then the host
/// recovers at +recover_ax until back at cruise speed. severity = 0 events
/// provoke no response.
struct ResponseRule {
    double delay = 0.4;
    double tau = 0.25;
    double max_decel = 6.0;
    double brake_time = 1.6;
    double recover_ax = 1.2;
};

struct NoiseSpec {
    double lane = 0.005; ///< sigma on lane-line offsets, m
    double ax = 0.0;     ///< sigma on recorded host ax, m/s^2
    double ay = 0.002;
    double steer = 0.002;
    double track = 0.0;  ///< sigma on track dx/dy observations, m
};

struct ScenarioSpec {
    double duration = 60.0;
    double dt = 0.04;
    double host_speed = 16.7; ///< cruise, m/s (60 km/h)
    double lane_width = 3.5;
    NoiseSpec noise;
    ResponseRule response;
    std::vector<EventSpec> events;
};

/// Parse a scenario description from JSON text. Throws SpecError on
/// structural or semantic problems.
ScenarioSpec parse_scenario(const std::string& json_text);

/// Simulate the scenario into a 25 Hz (1/dt) log. Pure function of
/// (spec, seed); throws SpecError for infeasible scripts (vehicle outside
/// the three lanes, same-lane spawn closer than 4 m, event past the end).
std::vector<DriverLogRecord> generate_synthetic(const ScenarioSpec& spec, std::uint64_t seed);

} // namespace riskgraph::synth
