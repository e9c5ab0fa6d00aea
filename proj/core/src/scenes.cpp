#include "riskgraph/scenes.hpp"

#include "riskgraph/errors.hpp"
#include "riskgraph/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace riskgraph::scenes {

using nlohmann::json;

std::vector<WorldPoint> integrate_trajectory(const std::vector<double>& vx_seq,
                                             const std::vector<double>& vy_seq, double dt) {
    if (vx_seq.empty() || vy_seq.empty())
        throw ParameterError("integrate_trajectory: empty velocity sequence");
    if (vx_seq.size() != vy_seq.size())
        throw ParameterError("integrate_trajectory: vx/vy length mismatch");
    if (!(dt > 0.0)) throw ParameterError("integrate_trajectory: dt must be positive");

    std::vector<WorldPoint> out(vx_seq.size());
    out[0] = {0.0, 0.0};
    for (std::size_t i = 1; i < vx_seq.size(); ++i) {
        out[i].y = out[i - 1].y + 0.5 * (vx_seq[i - 1] + vx_seq[i]) * dt;
        out[i].x = out[i - 1].x + 0.5 * (vy_seq[i - 1] + vy_seq[i]) * dt;
    }
    return out;
}

SceneFrame to_birds_eye(const DriverLogRecord& r) {
    SceneFrame f;
    f.t = r.timestamp;
    f.host_speed = std::hypot(r.vx, r.vy);
    f.host_ax = r.ax;
    f.host_ay = r.ay;
    f.host_steer = r.steer;
    f.host_brake = r.brake;
    f.host_throttle = r.throttle;
    f.lane_offsets = r.lane_offsets;
    f.usable = r.lane_offsets.detected_count() >= 2;
    if (!f.usable) return f;

    // Reconstruct a missing lane line assuming equal lane widths, then lay
    // out the four lane boundaries left-to-right.
    double l = r.lane_offsets.left;
    double cl = r.lane_offsets.center_left;
    double cr = r.lane_offsets.center_right;
    double width;
    if (std::isnan(l)) {
        width = cr - cl;
        l = cl - width;
    } else if (std::isnan(cl)) {
        width = (cr - l) / 2.0;
        cl = l + width;
    } else if (std::isnan(cr)) {
        width = cl - l;
        cr = cl + width;
    } else {
        width = cr - cl;
    }
    const double b0 = l, b1 = cl, b2 = cr, b3 = cr + width;
    if (!(b0 < b1 && b1 < b2 && b2 < b3)) {
        f.usable = false; // degenerate lane geometry
        return f;
    }

    for (const TrackObservation& obs : r.tracks) {
        if (obs.dy < 0.0 || obs.dy >= 100.0) continue; // behind or beyond sensing
        if (obs.dx < b0 || obs.dx >= b3) continue;     // outside the mapped lanes
        FrameTrack ft;
        ft.obs = obs;
        ft.lane_index = obs.dx < b1 ? 1 : (obs.dx < b2 ? 2 : 3);
        f.tracks.push_back(ft);
    }
    return f;
}

namespace {

struct LaneChange {
    std::size_t frame = 0; ///< window-relative index of the first changed frame
    int track_id = 0;
};

/// First persistent lane change of any track within the window, earliest
/// frame first, ties to the smaller track id.
std::optional<LaneChange> find_lane_change(const std::vector<SceneFrame>& frames,
                                           std::size_t start, std::size_t window,
                                           std::size_t persistence) {
    struct Obs {
        std::size_t frame;
        int lane;
    };
    std::map<int, std::vector<Obs>> per_track;
    for (std::size_t i = 0; i < window; ++i)
        for (const FrameTrack& ft : frames[start + i].tracks)
            per_track[ft.obs.track_id].push_back({i, ft.lane_index});

    std::optional<LaneChange> best;
    for (const auto& [id, obs] : per_track) {
        const int baseline = obs.front().lane;
        for (std::size_t j = 1; j < obs.size(); ++j) {
            if (obs[j].lane == baseline) continue;
            // candidate change: the new lane must hold for `persistence`
            // consecutive observations of this track
            const int new_lane = obs[j].lane;
            std::size_t held = 0;
            for (std::size_t m = j; m < obs.size() && obs[m].lane == new_lane; ++m) ++held;
            if (held >= persistence) {
                if (!best || obs[j].frame < best->frame ||
                    (obs[j].frame == best->frame && id < best->track_id))
                    best = LaneChange{obs[j].frame, id};
                break; // first qualifying change of this track
            }
            // skip past the non-persistent stretch
            while (j + 1 < obs.size() && obs[j + 1].lane == new_lane) ++j;
        }
    }
    return best;
}

} // namespace

std::vector<Scene> extract_scenes(const std::vector<SceneFrame>& frames,
                                  const ExtractParams& params, const std::string& source) {
    if (params.window < 2) throw ParameterError("extract window must be >= 2 frames");

    std::vector<Scene> scenes;
    const std::size_t n = frames.size();
    // frame period, for converting the response horizon into frames
    const double dt = n >= 2 ? (frames[1].t - frames[0].t) : 0.04;

    for (std::size_t start = 0; start + params.window <= n; start += params.window) {
        bool ok = true;
        for (std::size_t i = 0; i < params.window && ok; ++i) {
            const SceneFrame& f = frames[start + i];
            if (!f.usable || std::abs(f.host_steer) >= params.straight_tol) ok = false;
        }
        if (!ok) continue;

        const auto change = find_lane_change(frames, start, params.window, params.persistence);
        if (!change) continue;

        const std::size_t anchor_abs = start + change->frame;
        if (frames[anchor_abs].tracks.size() < 2) continue; // needs >= 2 vehicles at anchor

        // Braking response: minimum host ax from the anchor over the
        // horizon, which may run past the window into later frames.
        const std::size_t horizon =
            dt > 0.0 ? static_cast<std::size_t>(std::floor(params.response_horizon / dt)) : 0;
        const std::size_t last = std::min(n - 1, anchor_abs + horizon);
        std::size_t min_at = anchor_abs;
        for (std::size_t i = anchor_abs; i <= last; ++i)
            if (frames[i].host_ax < frames[min_at].host_ax) min_at = i;

        Scene s;
        s.scene_ref = source + "#" + std::to_string(start);
        s.frames.assign(frames.begin() + static_cast<std::ptrdiff_t>(start),
                        frames.begin() + static_cast<std::ptrdiff_t>(start + params.window));
        s.anchor = static_cast<int>(change->frame);
        s.lane_change_track = change->track_id;
        s.response_ax = frames[min_at].host_ax;
        s.op = OpFeature{frames[min_at].host_ax, frames[min_at].host_ay,
                         frames[min_at].host_steer, frames[min_at].host_brake,
                         frames[min_at].host_throttle};
        scenes.push_back(std::move(s));
    }
    return scenes;
}

VrmFeature vrm_feature(const Scene& scene) {
    for (const FrameTrack& ft : scene.anchor_frame().tracks)
        if (ft.obs.track_id == scene.lane_change_track)
            return VrmFeature{ft.obs.dx, ft.obs.dy, ft.obs.dvx, ft.obs.dvy};
    throw ExtractionError("lane-change track " + std::to_string(scene.lane_change_track) +
                          " not visible at the anchor of " + scene.scene_ref);
}

namespace {

json lane_to_json(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double lane_from_json(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json frame_to_json(const SceneFrame& f) {
    json tracks = json::array();
    for (const FrameTrack& ft : f.tracks) {
        tracks.push_back({{"track_id", ft.obs.track_id},
                          {"dx", ft.obs.dx},
                          {"dy", ft.obs.dy},
                          {"dvx", ft.obs.dvx},
                          {"dvy", ft.obs.dvy},
                          {"lane_index", ft.lane_index}});
    }
    return json{{"t", f.t},
                {"host_speed", f.host_speed},
                {"host_ax", f.host_ax},
                {"host_ay", f.host_ay},
                {"host_steer", f.host_steer},
                {"host_brake", f.host_brake},
                {"host_throttle", f.host_throttle},
                {"lane_offsets",
                 {{"left", lane_to_json(f.lane_offsets.left)},
                  {"center_left", lane_to_json(f.lane_offsets.center_left)},
                  {"center_right", lane_to_json(f.lane_offsets.center_right)}}},
                {"tracks", std::move(tracks)}};
}

SceneFrame frame_from_json(const json& j) {
    SceneFrame f;
    f.t = j.at("t").get<double>();
    f.host_speed = j.at("host_speed").get<double>();
    f.host_ax = j.at("host_ax").get<double>();
    f.host_ay = j.at("host_ay").get<double>();
    f.host_steer = j.at("host_steer").get<double>();
    f.host_brake = j.at("host_brake").get<double>();
    f.host_throttle = j.at("host_throttle").get<double>();
    const json& lo = j.at("lane_offsets");
    f.lane_offsets.left = lane_from_json(lo.at("left"));
    f.lane_offsets.center_left = lane_from_json(lo.at("center_left"));
    f.lane_offsets.center_right = lane_from_json(lo.at("center_right"));
    for (const json& t : j.at("tracks")) {
        FrameTrack ft;
        ft.obs.track_id = t.at("track_id").get<int>();
        ft.obs.dx = t.at("dx").get<double>();
        ft.obs.dy = t.at("dy").get<double>();
        ft.obs.dvx = t.at("dvx").get<double>();
        ft.obs.dvy = t.at("dvy").get<double>();
        ft.lane_index = t.at("lane_index").get<int>();
        f.tracks.push_back(ft);
    }
    f.usable = true;
    return f;
}

void validate_scene(const Scene& s) {
    const SceneFrame& a = s.anchor_frame();
    std::set<int> ids;
    for (const FrameTrack& ft : a.tracks) {
        if (ft.lane_index < 1 || ft.lane_index > 3)
            throw ValidationError(s.scene_ref + ": track lane index outside 1..3");
        if (ft.obs.dy < 0.0 || ft.obs.dy >= 100.0)
            throw ValidationError(s.scene_ref + ": track dy outside [0,100)");
        if (!ids.insert(ft.obs.track_id).second)
            throw ValidationError(s.scene_ref + ": duplicate track id at anchor");
    }
    if (a.tracks.size() < 2)
        throw ValidationError(s.scene_ref + ": fewer than 2 surrounding vehicles at anchor");
    if (ids.find(s.lane_change_track) == ids.end())
        throw ValidationError(s.scene_ref + ": lane-change track missing at anchor");
}

} // namespace

std::string write_scenes_jsonl(const std::vector<Scene>& scenes, const std::string& digest) {
    std::string out = json{{"kind", "scenes"}, {"digest", digest}}.dump();
    out += '\n';
    for (const Scene& s : scenes) {
        json j{{"scene_ref", s.scene_ref},
               {"anchor", frame_to_json(s.anchor_frame())},
               {"lane_change_track", s.lane_change_track},
               {"response_ax", s.response_ax},
               {"op_feature",
                {{"ax", s.op.ax},
                 {"ay", s.op.ay},
                 {"steer", s.op.steer},
                 {"brake", s.op.brake},
                 {"throttle", s.op.throttle}}}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Scene> read_scenes_jsonl(const std::string& text) {
    std::vector<Scene> scenes;
    bool seen_header = false;
    for (const auto& line : io::split_lines(text)) {
        if (line.empty()) continue;
        if (!seen_header) {
            seen_header = true;
            try {
                const json h = json::parse(line);
                if (h.at("kind").get<std::string>() != "scenes")
                    throw SchemaError("JSONL header kind is not \"scenes\"");
            } catch (const json::exception& e) {
                throw SchemaError(std::string("missing or bad JSONL header line: ") + e.what());
            }
            continue;
        }
        Scene s;
        try {
            const json j = json::parse(line);
            s.scene_ref = j.at("scene_ref").get<std::string>();
            s.frames.push_back(frame_from_json(j.at("anchor")));
            s.anchor = 0;
            s.lane_change_track = j.at("lane_change_track").get<int>();
            s.response_ax = j.at("response_ax").get<double>();
            const json& op = j.at("op_feature");
            s.op = OpFeature{op.at("ax").get<double>(), op.at("ay").get<double>(),
                             op.at("steer").get<double>(), op.at("brake").get<double>(),
                             op.at("throttle").get<double>()};
        } catch (const json::exception& e) {
            throw SchemaError(std::string("bad scene record: ") + e.what());
        }
        validate_scene(s);
        scenes.push_back(std::move(s));
    }
    if (scenes.empty()) throw EmptyInputError("no scenes in input");
    return scenes;
}

} // namespace riskgraph::scenes
