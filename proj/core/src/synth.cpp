#include "riskgraph/synth.hpp"

#include "riskgraph/errors.hpp"
#include "riskgraph/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace riskgraph::synth {

using nlohmann::json;

namespace {

constexpr double kMinVehicleSpeed = 2.0; // braking leads never reverse
constexpr double kSpawnClearance = 4.0;  // same-lane minimum separation, m
constexpr double kLeadIn = 3.0;          // vehicle appears this long before its trigger
constexpr double kLeadOut = 4.5;         // and disappears this long after

double lane_center(int lane, double width) { return (lane - 2) * width; }

// C1 lateral profile for lane changes; s(1/2) = 1/2 puts the boundary
// crossing exactly at the maneuver midpoint.
double sstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

double sstep_rate(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 6.0 * u * (1.0 - u);
}

struct ResolvedContext {
    int lane = 2;
    double dy = 0.0;
    double rel = 0.0;
    bool match_cutter = false;
};

struct Instance {
    EventType type = EventType::free_flow;
    double trigger = 0.0;
    int from_lane = 3;
    double gap = 0.0;
    double rel = 0.0;
    double severity = 0.0;
    double lead_a = 0.0;
    double lead_tb = 0.0;
    double cut_T = 1.6;
    std::vector<ResolvedContext> ctx;
};

/// Scripted world trajectory of one surrounding vehicle. Longitudinal
/// speed is constant except for an optional single braking ramp; lateral
/// position is constant except for an optional smoothstep lane change.
struct VehicleScript {
    int id = 0;
    double t_on = 0.0, t_off = 0.0;
    double x_from = 0.0, x_to = 0.0;
    double t_lat0 = 0.0, t_lat = 0.0; // t_lat <= 0: laterally static
    double v0 = 0.0;                  // own speed before braking
    double t_ref = 0.0, y_ref = 0.0;  // world y anchored at the trigger
    double brake_t0 = 0.0, brake_t1 = 0.0, brake_a = 0.0;

    double speed_at(double t) const {
        if (brake_a <= 0.0) return v0;
        return v0 - brake_a * (std::clamp(t, brake_t0, brake_t1) - brake_t0);
    }

    double y_at(double t) const {
        double y = y_ref + v0 * (t - t_ref);
        if (brake_a > 0.0 && t > brake_t0) {
            const double tb = std::min(t, brake_t1) - brake_t0;
            y -= 0.5 * brake_a * tb * tb;
            if (t > brake_t1) y -= brake_a * (brake_t1 - brake_t0) * (t - brake_t1);
        }
        return y;
    }

    double x_at(double t) const {
        if (t_lat <= 0.0) return x_from;
        return x_from + (x_to - x_from) * sstep((t - t_lat0) / t_lat);
    }

    double vx_at(double t) const {
        if (t_lat <= 0.0) return 0.0;
        return (x_to - x_from) * sstep_rate((t - t_lat0) / t_lat) / t_lat;
    }
};

Param param_from_json(const json& j, const char* name) {
    if (j.is_number()) return Param(j.get<double>());
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        Param p(j[0].get<double>(), j[1].get<double>());
        if (p.lo > p.hi)
            throw SpecError(std::string(name) + ": range [lo,hi] requires lo <= hi");
        return p;
    }
    throw SpecError(std::string(name) + ": expected number or [lo,hi]");
}

void check(bool cond, const std::string& what) {
    if (!cond) throw SpecError(what);
}

} // namespace

ScenarioSpec parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SpecError(std::string("scenario JSON parse error: ") + e.what());
    }
    check(j.is_object(), "scenario must be a JSON object");

    ScenarioSpec s;
    auto num = [&](const json& obj, const char* key, double& field) {
        if (auto it = obj.find(key); it != obj.end()) field = it->get<double>();
    };
    num(j, "duration", s.duration);
    num(j, "dt", s.dt);
    num(j, "host_speed", s.host_speed);
    num(j, "lane_width", s.lane_width);
    if (auto it = j.find("noise"); it != j.end()) {
        num(*it, "lane", s.noise.lane);
        num(*it, "ax", s.noise.ax);
        num(*it, "ay", s.noise.ay);
        num(*it, "steer", s.noise.steer);
        num(*it, "track", s.noise.track);
    }
    if (auto it = j.find("response"); it != j.end()) {
        num(*it, "delay", s.response.delay);
        num(*it, "tau", s.response.tau);
        num(*it, "max_decel", s.response.max_decel);
        num(*it, "brake_time", s.response.brake_time);
        num(*it, "recover_ax", s.response.recover_ax);
    }
    if (auto it = j.find("events"); it != j.end()) {
        check(it->is_array(), "events must be an array");
        for (const json& ej : *it) {
            EventSpec ev;
            const std::string type = ej.at("type").get<std::string>();
            if (type == "cut_in")
                ev.type = EventType::cut_in;
            else if (type == "braking_lead")
                ev.type = EventType::braking_lead;
            else if (type == "free_flow")
                ev.type = EventType::free_flow;
            else
                throw SpecError("unknown event type: " + type);
            num(ej, "t_start", ev.t_start);
            if (auto c = ej.find("count"); c != ej.end()) ev.count = c->get<int>();
            num(ej, "period", ev.period);
            if (auto f = ej.find("from_lane"); f != ej.end()) {
                if (f->is_string() && f->get<std::string>() == "random")
                    ev.from_lane = 0;
                else
                    ev.from_lane = f->get<int>();
            }
            if (auto g = ej.find("gap"); g != ej.end()) ev.gap = param_from_json(*g, "gap");
            if (auto r = ej.find("rel_speed"); r != ej.end())
                ev.rel_speed = param_from_json(*r, "rel_speed");
            if (auto sv = ej.find("severity"); sv != ej.end())
                ev.severity = param_from_json(*sv, "severity");
            if (auto d = ej.find("lead_decel"); d != ej.end())
                ev.lead_decel = param_from_json(*d, "lead_decel");
            num(ej, "lead_brake_time", ev.lead_brake_time);
            num(ej, "cut_duration", ev.cut_duration);
            if (auto cs = ej.find("context"); cs != ej.end()) {
                check(cs->is_array(), "context must be an array");
                for (const json& cj : *cs) {
                    ContextVehicleSpec cv;
                    const json& lane = cj.at("lane");
                    if (lane.is_string()) {
                        const std::string ls = lane.get<std::string>();
                        if (ls == "source")
                            cv.lane = LaneSel::source;
                        else if (ls == "opposite")
                            cv.lane = LaneSel::opposite;
                        else
                            throw SpecError("context lane: expected 1..3, 'source' or 'opposite'");
                    } else {
                        cv.lane = static_cast<LaneSel>(lane.get<int>());
                    }
                    cv.dy = param_from_json(cj.at("dy"), "context dy");
                    if (auto r = cj.find("rel_speed"); r != cj.end()) {
                        if (r->is_string() && r->get<std::string>() == "cutter")
                            cv.match_cutter = true;
                        else
                            cv.rel_speed = param_from_json(*r, "context rel_speed");
                    }
                    ev.context.push_back(cv);
                }
            }
            s.events.push_back(std::move(ev));
        }
    }
    return s;
}

std::vector<DriverLogRecord> generate_synthetic(const ScenarioSpec& spec, std::uint64_t seed) {
    check(spec.duration > 0.0 && spec.duration <= 36000.0, "duration must be in (0, 36000] s");
    check(spec.dt > 0.0 && spec.dt <= 1.0, "dt must be in (0, 1] s");
    check(spec.host_speed > kMinVehicleSpeed, "host_speed too low");
    check(spec.lane_width > 1.0, "lane_width too small");
    check(spec.response.tau > 0.0 && spec.response.max_decel > 0.0 &&
              spec.response.brake_time > 0.0 && spec.response.recover_ax > 0.0,
          "response rule parameters must be positive");

    const double dt = spec.dt;
    const double cruise = spec.host_speed;
    const double w = spec.lane_width;
    const std::size_t n = static_cast<std::size_t>(std::floor(spec.duration / dt));
    check(n >= 2, "duration shorter than two samples");

    // --- expand events, sampling per-instance parameters -----------------
    Rng ev_rng(derive_seed(seed, 0));
    std::vector<Instance> instances;
    for (const EventSpec& ev : spec.events) {
        check(ev.count >= 1, "event count must be >= 1");
        check(ev.count == 1 || ev.period > 0.0, "repeated event needs period > 0");
        if (ev.type == EventType::cut_in)
            check(ev.from_lane == 0 || ev.from_lane == 1 || ev.from_lane == 3,
                  "cut-in from_lane must be 1, 3 or random");
        for (const ContextVehicleSpec& cv : ev.context) {
            const bool relative =
                cv.lane == LaneSel::source || cv.lane == LaneSel::opposite;
            check(!relative || ev.type == EventType::cut_in,
                  "context lane source/opposite only applies to cut_in events");
            if (!relative) {
                const int l = static_cast<int>(cv.lane);
                check(l >= 1 && l <= 3, "context vehicle outside the three lanes");
            }
        }
        for (int i = 0; i < ev.count; ++i) {
            Instance in;
            in.type = ev.type;
            in.trigger = ev.t_start + static_cast<double>(i) * ev.period;
            check(in.trigger > 0.0 && in.trigger + 2.0 * dt < spec.duration,
                  "event at t=" + io::format_double(in.trigger) + " falls outside the log");
            in.gap = ev.gap.sample(ev_rng);
            in.rel = ev.rel_speed.sample(ev_rng);
            in.severity = ev.severity.sample(ev_rng);
            check(in.severity >= 0.0 && in.severity <= 1.0, "severity must be in [0,1]");
            in.cut_T = ev.cut_duration;
            check(in.cut_T > 0.0, "cut_duration must be positive");
            if (ev.type == EventType::cut_in) {
                in.from_lane = ev.from_lane != 0 ? ev.from_lane
                               : (uniform_index(ev_rng, 2) == 0 ? 1 : 3);
            }
            if (ev.type == EventType::braking_lead) {
                in.lead_a = ev.lead_decel.sample(ev_rng);
                check(in.lead_a > 0.0, "lead_decel must be positive");
                const double v0 = cruise + in.rel;
                in.lead_tb = std::min(ev.lead_brake_time, (v0 - kMinVehicleSpeed) / in.lead_a);
                check(in.lead_tb > 0.0, "braking lead would stop immediately");
            }
            for (const ContextVehicleSpec& cv : ev.context) {
                ResolvedContext rc;
                rc.lane = cv.lane == LaneSel::source     ? in.from_lane
                          : cv.lane == LaneSel::opposite ? 4 - in.from_lane
                                                         : static_cast<int>(cv.lane);
                rc.dy = cv.dy.sample(ev_rng);
                rc.match_cutter = cv.match_cutter;
                rc.rel = cv.match_cutter ? in.rel : cv.rel_speed.sample(ev_rng);
                in.ctx.push_back(rc);
            }
            instances.push_back(std::move(in));
        }
    }

    // --- pass 1: host trajectory under the response rule -----------------
    struct Episode {
        double t0, t1, target;
    };
    std::vector<Episode> episodes;
    for (const Instance& in : instances) {
        if (in.type == EventType::free_flow || in.severity <= 0.0) continue;
        const double t0 = in.trigger + spec.response.delay;
        episodes.push_back({t0, t0 + spec.response.brake_time,
                            -spec.response.max_decel * in.severity});
    }

    std::vector<double> h_ax(n), h_v(n), h_y(n);
    const double lag = 1.0 - std::exp(-dt / spec.response.tau);
    double ax = 0.0, v = cruise, y = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        double target = 0.0;
        bool active = false;
        for (const Episode& e : episodes) {
            if (t >= e.t0 && t < e.t1) {
                target = active ? std::min(target, e.target) : e.target;
                active = true;
            }
        }
        if (!active) target = (v < cruise - 1e-9) ? spec.response.recover_ax : 0.0;
        ax += (target - ax) * lag;
        h_ax[k] = ax;
        h_v[k] = v;
        h_y[k] = y;
        y += v * dt;
        v += ax * dt;
        if (!active && v > cruise) v = cruise;
    }
    auto host_y_at = [&](double t) {
        const double s = std::clamp(t / dt, 0.0, static_cast<double>(n - 1));
        const std::size_t k = static_cast<std::size_t>(s);
        if (k + 1 >= n) return h_y[n - 1];
        const double f = s - static_cast<double>(k);
        return h_y[k] * (1.0 - f) + h_y[k + 1] * f;
    };

    // --- pass 2: vehicle scripts anchored on the host trajectory ---------
    std::vector<VehicleScript> scripts;
    int next_id = 1;
    for (const Instance& in : instances) {
        const double t_on = std::max(0.0, in.trigger - kLeadIn);
        const double t_off = std::min(spec.duration, in.trigger + kLeadOut);
        double cutter_v0 = cruise + in.rel;
        if (in.type == EventType::cut_in) {
            VehicleScript c;
            c.id = next_id++;
            c.t_on = t_on;
            c.t_off = t_off;
            c.x_from = lane_center(in.from_lane, w);
            c.x_to = lane_center(2, w);
            c.t_lat0 = in.trigger - in.cut_T / 2.0;
            c.t_lat = in.cut_T;
            c.v0 = cutter_v0;
            c.t_ref = in.trigger;
            c.y_ref = host_y_at(in.trigger) + in.gap;
            scripts.push_back(c);
        } else if (in.type == EventType::braking_lead) {
            VehicleScript l;
            l.id = next_id++;
            l.t_on = t_on;
            l.t_off = t_off;
            l.x_from = l.x_to = lane_center(2, w);
            l.v0 = cruise + in.rel;
            l.t_ref = in.trigger;
            l.y_ref = host_y_at(in.trigger) + in.gap;
            l.brake_t0 = in.trigger;
            l.brake_t1 = in.trigger + in.lead_tb;
            l.brake_a = in.lead_a;
            scripts.push_back(l);
        }
        for (const ResolvedContext& rc : in.ctx) {
            VehicleScript cx;
            cx.id = next_id++;
            cx.t_on = t_on;
            cx.t_off = t_off;
            cx.x_from = cx.x_to = lane_center(rc.lane, w);
            cx.v0 = rc.match_cutter ? cutter_v0 : cruise + rc.rel;
            cx.t_ref = in.trigger;
            cx.y_ref = host_y_at(in.trigger) + rc.dy;
            scripts.push_back(cx);
        }
    }

    // --- emit records -----------------------------------------------------
    Rng nz(derive_seed(seed, 1));
    auto noise = [&](double sigma) { return sigma > 0.0 ? sigma * normal(nz) : 0.0; };

    std::vector<DriverLogRecord> records;
    records.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        DriverLogRecord r;
        r.timestamp = t;
        const double ctrl_ax = h_ax[k];
        r.ax = ctrl_ax + noise(spec.noise.ax);
        r.ay = noise(spec.noise.ay);
        r.steer = noise(spec.noise.steer);
        r.vx = h_v[k];
        r.vy = 0.0;
        if (ctrl_ax < -0.02) {
            r.brake = std::clamp(-ctrl_ax / spec.response.max_decel, 0.0, 1.0);
            r.throttle = 0.0;
        } else {
            r.brake = 0.0;
            r.throttle = std::clamp(0.15 + ctrl_ax / 8.0, 0.0, 1.0);
        }
        r.lane_offsets.left = -1.5 * w + noise(spec.noise.lane);
        r.lane_offsets.center_left = -0.5 * w + noise(spec.noise.lane);
        r.lane_offsets.center_right = 0.5 * w + noise(spec.noise.lane);

        for (const VehicleScript& sc : scripts) {
            if (t < sc.t_on || t >= sc.t_off) continue;
            double dy = sc.y_at(t) - h_y[k] + noise(spec.noise.track);
            if (dy < -30.0 || dy > 100.0) continue; // outside the sensing window
            TrackObservation obs;
            obs.track_id = sc.id;
            obs.dx = sc.x_at(t) + noise(spec.noise.track);
            obs.dy = dy;
            obs.dvx = sc.vx_at(t);
            obs.dvy = sc.speed_at(t) - h_v[k];
            r.tracks.push_back(obs);
        }

        // Feasibility: no two same-lane vehicles (host included) closer
        // than the spawn clearance.
        for (std::size_t a = 0; a < r.tracks.size(); ++a) {
            const auto& ta = r.tracks[a];
            if (std::abs(ta.dx) < w / 2.0 && std::abs(ta.dy) < kSpawnClearance)
                throw SpecError("vehicle " + std::to_string(ta.track_id) +
                                " overlaps the host at t=" + io::format_double(t));
            for (std::size_t b = a + 1; b < r.tracks.size(); ++b) {
                const auto& tb = r.tracks[b];
                if (std::abs(ta.dx - tb.dx) < w / 2.0 &&
                    std::abs(ta.dy - tb.dy) < kSpawnClearance)
                    throw SpecError("vehicles " + std::to_string(ta.track_id) + " and " +
                                    std::to_string(tb.track_id) +
                                    " overlap at t=" + io::format_double(t));
            }
        }

        double best_dy = std::numeric_limits<double>::infinity();
        for (const auto& obs : r.tracks) {
            if (obs.dy > 0.0 && std::abs(obs.dx) <= w / 2.0 && obs.dy < best_dy) {
                best_dy = obs.dy;
                r.cipv_id = obs.track_id;
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace riskgraph::synth
