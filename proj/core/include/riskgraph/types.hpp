#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace riskgraph {

/// One radar/camera track of a surrounding vehicle, host frame:
/// dx lateral (rightward positive), dy longitudinal (forward positive).
struct TrackObservation {
    int track_id = 0;
    double dx = 0.0;
    double dy = 0.0;
    double dvx = 0.0;
    double dvy = 0.0;
};

/// Lateral positions of the three detected lane lines, host frame.
/// NaN marks a line the sensing stack did not detect in this sample.
struct LaneOffsets {
    double left = std::numeric_limits<double>::quiet_NaN();
    double center_left = std::numeric_limits<double>::quiet_NaN();
    double center_right = std::numeric_limits<double>::quiet_NaN();

    int detected_count() const {
        return (std::isnan(left) ? 0 : 1) + (std::isnan(center_left) ? 0 : 1) +
               (std::isnan(center_right) ? 0 : 1);
    }
};

/// One 25 Hz sample of host CAN signals plus tracked surrounding vehicles.
struct DriverLogRecord {
    double timestamp = 0.0; ///< seconds, strictly increasing within a log
    double ax = 0.0;        ///< longitudinal acceleration, m/s^2
    double ay = 0.0;        ///< lateral acceleration, m/s^2
    double steer = 0.0;     ///< front-wheel angle, rad
    double brake = 0.0;     ///< brake signal in [0,1]
    double throttle = 0.0;  ///< throttle opening in [0,1]
    double vx = 0.0;        ///< host longitudinal velocity, m/s
    double vy = 0.0;        ///< host lateral velocity, m/s
    LaneOffsets lane_offsets;
    std::vector<TrackObservation> tracks;
    std::optional<int> cipv_id; ///< closest-in-path vehicle, if tagged
};

/// Track retained in a bird's-eye frame, with its derived lane index.
struct FrameTrack {
    TrackObservation obs;
    int lane_index = 0; ///< 1..3, left to right
};

/// Host-centric bird's-eye snapshot. Host sits at the origin, centered at
/// the bottom of the view; tracks are restricted to dy in [0, 100) and to
/// the three mapped lanes.
struct SceneFrame {
    double t = 0.0;
    double host_speed = 0.0;   ///< m/s
    double host_ax = 0.0;      ///< m/s^2, smoothed upstream
    double host_ay = 0.0;      ///< m/s^2
    double host_steer = 0.0;   ///< rad
    double host_brake = 0.0;   ///< [0,1]
    double host_throttle = 0.0;///< [0,1]
    LaneOffsets lane_offsets;
    std::vector<FrameTrack> tracks;
    bool usable = true; ///< false when fewer than 2 lane lines were detected
};

/// Per-scene operation feature of the host driver: the five CAN channels
/// sampled at the hardest-braking frame of the response horizon.
/// Feature One uses ax alone; Feature Two uses all five.
struct OpFeature {
    double ax = 0.0;
    double ay = 0.0;
    double steer = 0.0;
    double brake = 0.0;
    double throttle = 0.0;
};

/// A qualifying interactive scene: a straight-driving window with >= 2
/// surrounding vehicles in which some track changes lane.
///
/// `frames` holds the full extraction window in memory. Serialization keeps
/// only the anchor frame plus the derived summaries; a reloaded Scene has
/// frames = {anchor frame} and anchor = 0.
struct Scene {
    std::string scene_ref;         ///< stable identifier "<source>#<start frame>"
    std::vector<SceneFrame> frames;
    int anchor = 0;                ///< index into frames of the representative frame
    int lane_change_track = 0;     ///< track_id whose lane index changes
    double response_ax = 0.0;      ///< min host ax over the response horizon, m/s^2
    OpFeature op;                  ///< host channels at the response_ax frame

    const SceneFrame& anchor_frame() const { return frames[static_cast<std::size_t>(anchor)]; }
};

/// Relative state of the lane-changing vehicle at the anchor frame
/// (the vector representation baseline).
struct VrmFeature {
    double dx = 0.0;
    double dy = 0.0;
    double dvx = 0.0;
    double dvy = 0.0;
};

/// Occupancy grid over the forward view: `lanes` columns of `rows` cells,
/// each `cell_length` meters long, covering `range` meters ahead.
struct GridSpec {
    int lanes = 3;
    int rows = 10;
    double cell_length = 10.0;
    double range = 100.0;

    int label_count() const { return lanes * rows; }
    bool consistent() const {
        return lanes >= 1 && rows >= 1 && cell_length > 0.0 &&
               static_cast<double>(rows) * cell_length == range;
    }
};

struct SceneGraphNode {
    int id = 0;
    int label = 0;    ///< grid cell, 1..lanes*rows
    bool host = false;
};

/// Labeled undirected scene graph. Edges are unordered id pairs stored with
/// first < second, sorted and duplicate-free; every edge carries the
/// implicit label 1. Exactly one node is the host; non-host nodes are never
/// isolated (free-node removal happens at construction).
struct SceneGraph {
    std::string scene_ref;
    std::vector<SceneGraphNode> nodes;
    std::vector<std::pair<int, int>> edges;

    std::size_t size() const { return nodes.size(); }
};

} // namespace riskgraph
