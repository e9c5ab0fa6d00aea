#pragma once

#include "riskgraph/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace riskgraph::graphs {

/// Grid-cell label for a vehicle at (lane_index, dy): row-major from the
/// host row, left to right, starting at 1:
///   label = lanes * floor(dy / cell_length) + lane_index.
/// Out-of-grid positions (dy outside [0, range), lane outside 1..lanes)
/// yield nullopt and the caller drops the vehicle.
std::optional<int> assign_cell(int lane_index, double dy, const GridSpec& grid);

/// Build the labeled undirected scene graph of one frame: the host (always
/// node 0, cell = its own row-0 center-lane cell) plus every in-grid
/// track, edges between nodes at Chebyshev distance <= 1 in (lane, row).
/// Non-host nodes left without edges are removed (free nodes); the host
/// stays even when isolated. Node order is canonical: host, then tracks by
/// ascending track_id; ids are re-packed to 0..n-1 after removal.
SceneGraph build_graph(const SceneFrame& frame, const GridSpec& grid,
                       const std::string& scene_ref);

/// JSON persistence: top-level {"digest", "grid", "graphs"} where graphs
/// is an array of
///   {"scene_ref": ..., "nodes": [{"id":0,"label":2,"host":true},...],
///    "edges": [[0,1],...]}.
/// read validates graph invariants (single host, packed ids, label range,
/// no self loops or duplicates, no isolated non-host node) and throws
/// ValidationError on violation.
std::string write_graphs_json(const std::vector<SceneGraph>& graphs, const GridSpec& grid,
                              const std::string& digest = "");
std::vector<SceneGraph> read_graphs_json(const std::string& text);

} // namespace riskgraph::graphs
