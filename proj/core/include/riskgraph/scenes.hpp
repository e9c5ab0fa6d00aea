#pragma once

#include "riskgraph/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace riskgraph::scenes {

struct WorldPoint {
    double x = 0.0; ///< lateral, m
    double y = 0.0; ///< longitudinal, m
};

/// Trapezoidal integration of host velocity into world positions.
/// vx (forward) accumulates into y, vy (lateral) into x; position[0] is
/// the origin and the output length equals the input length.
std::vector<WorldPoint> integrate_trajectory(const std::vector<double>& vx_seq,
                                             const std::vector<double>& vy_seq, double dt);

/// Transform one record into a host-centric bird's-eye frame. Tracks
/// behind the host (dy < 0), at or beyond 100 m, or laterally outside the
/// three mapped lanes are dropped; every retained track gets a lane index.
/// A frame with fewer than two detected lane lines is flagged unusable and
/// keeps no tracks. The third lane-line position is reconstructed from the
/// two detected ones assuming equal lane widths.
SceneFrame to_birds_eye(const DriverLogRecord& record);

struct ExtractParams {
    std::size_t window = 50;      ///< frames per candidate scene (2 s at 25 Hz)
    double straight_tol = 0.02;   ///< rad; max |steer| for "driving straight"
    double response_horizon = 1.5;///< s after the anchor scanned for the braking response
    std::size_t persistence = 5;  ///< frames a lane change must hold to count
};

/// Scan non-overlapping windows (stride = window) and keep those where the
/// host drives straight, at least two surrounding vehicles are visible at
/// the anchor, and some track's lane index changes persistently. The
/// anchor is the first frame at which the changing track's lane differs
/// from its window-initial value. response_ax is the minimum host ax over
/// the response horizon starting at the anchor (the horizon may run past
/// the window end); the scene's op feature samples the host channels at
/// that minimum.
std::vector<Scene> extract_scenes(const std::vector<SceneFrame>& frames,
                                  const ExtractParams& params,
                                  const std::string& source = "log");

/// The lane-changing vehicle's relative state at the anchor frame.
/// Throws ExtractionError if that track is not visible there.
VrmFeature vrm_feature(const Scene& scene);

/// JSON-Lines persistence behind a {"kind":"scenes","digest":...} header
/// line. Only the anchor frame plus the derived summaries are written; a
/// reloaded Scene holds exactly that frame. read validates frame and scene
/// invariants and throws ValidationError.
std::string write_scenes_jsonl(const std::vector<Scene>& scenes, const std::string& digest = "");
std::vector<Scene> read_scenes_jsonl(const std::string& text);

} // namespace riskgraph::scenes
