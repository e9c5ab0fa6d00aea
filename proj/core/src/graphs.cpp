#include "riskgraph/graphs.hpp"

#include "riskgraph/errors.hpp"
#include "riskgraph/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace riskgraph::graphs {

using nlohmann::json;

std::optional<int> assign_cell(int lane_index, double dy, const GridSpec& grid) {
    if (lane_index < 1 || lane_index > grid.lanes) return std::nullopt;
    if (!(dy >= 0.0) || dy >= grid.range) return std::nullopt;
    const int row = static_cast<int>(std::floor(dy / grid.cell_length));
    return grid.lanes * row + lane_index;
}

SceneGraph build_graph(const SceneFrame& frame, const GridSpec& grid,
                       const std::string& scene_ref) {
    if (!grid.consistent()) throw ParameterError("inconsistent grid spec");

    struct Cell {
        int lane, row, label;
        bool host;
    };
    std::vector<Cell> cells;
    const int host_lane = (grid.lanes + 1) / 2; // center lane; 2 for the 3-lane grid
    cells.push_back({host_lane, 0, grid.lanes * 0 + host_lane, true});

    std::vector<FrameTrack> tracks = frame.tracks;
    std::sort(tracks.begin(), tracks.end(), [](const FrameTrack& a, const FrameTrack& b) {
        return a.obs.track_id < b.obs.track_id;
    });
    for (const FrameTrack& ft : tracks) {
        const auto label = assign_cell(ft.lane_index, ft.obs.dy, grid);
        if (!label) continue; // out of grid
        const int row = static_cast<int>(std::floor(ft.obs.dy / grid.cell_length));
        cells.push_back({ft.lane_index, row, *label, false});
    }

    // proximity edges: Chebyshev distance <= 1 in (lane, row)
    const std::size_t n = cells.size();
    std::vector<std::pair<std::size_t, std::size_t>> raw_edges;
    std::vector<std::size_t> degree(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const int dl = std::abs(cells[u].lane - cells[v].lane);
            const int dr = std::abs(cells[u].row - cells[v].row);
            if (std::max(dl, dr) <= 1) {
                raw_edges.emplace_back(u, v);
                ++degree[u];
                ++degree[v];
            }
        }
    }

    // free-node removal (host exempt), then id re-packing
    std::vector<int> new_id(n, -1);
    SceneGraph g;
    g.scene_ref = scene_ref;
    for (std::size_t u = 0; u < n; ++u) {
        if (!cells[u].host && degree[u] == 0) continue;
        new_id[u] = static_cast<int>(g.nodes.size());
        g.nodes.push_back({new_id[u], cells[u].label, cells[u].host});
    }
    for (const auto& [u, v] : raw_edges)
        g.edges.emplace_back(new_id[u], new_id[v]);
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

namespace {

void validate_graph(const SceneGraph& g) {
    const int n = static_cast<int>(g.nodes.size());
    if (n == 0) throw ValidationError(g.scene_ref + ": empty graph");
    int hosts = 0;
    for (int i = 0; i < n; ++i) {
        const SceneGraphNode& node = g.nodes[static_cast<std::size_t>(i)];
        if (node.id != i) throw ValidationError(g.scene_ref + ": node ids not packed 0..n-1");
        if (node.label < 1) throw ValidationError(g.scene_ref + ": node label below 1");
        hosts += node.host ? 1 : 0;
    }
    if (hosts != 1) throw ValidationError(g.scene_ref + ": graph must have exactly one host");

    std::set<std::pair<int, int>> seen;
    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    for (const auto& [u, v] : g.edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw ValidationError(g.scene_ref + ": edge references unknown node");
        if (u == v) throw ValidationError(g.scene_ref + ": self loop");
        if (u > v) throw ValidationError(g.scene_ref + ": edge not stored as (min,max)");
        if (!seen.insert({u, v}).second)
            throw ValidationError(g.scene_ref + ": duplicate edge");
        ++degree[static_cast<std::size_t>(u)];
        ++degree[static_cast<std::size_t>(v)];
    }
    for (int i = 0; i < n; ++i)
        if (!g.nodes[static_cast<std::size_t>(i)].host && degree[static_cast<std::size_t>(i)] == 0)
            throw ValidationError(g.scene_ref + ": isolated non-host node");
}

json graph_to_json(const SceneGraph& g) {
    json nodes = json::array();
    for (const SceneGraphNode& node : g.nodes)
        nodes.push_back({{"id", node.id}, {"label", node.label}, {"host", node.host}});
    json edges = json::array();
    for (const auto& [u, v] : g.edges) edges.push_back(json::array({u, v}));
    return json{{"scene_ref", g.scene_ref}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

SceneGraph graph_from_json(const json& j) {
    SceneGraph g;
    g.scene_ref = j.at("scene_ref").get<std::string>();
    for (const json& nj : j.at("nodes"))
        g.nodes.push_back({nj.at("id").get<int>(), nj.at("label").get<int>(),
                           nj.at("host").get<bool>()});
    for (const json& ej : j.at("edges")) {
        if (!ej.is_array() || ej.size() != 2) throw SchemaError("edge must be a pair");
        g.edges.emplace_back(ej[0].get<int>(), ej[1].get<int>());
    }
    return g;
}

} // namespace

std::string write_graphs_json(const std::vector<SceneGraph>& graphs, const GridSpec& grid,
                              const std::string& digest) {
    json arr = json::array();
    for (const SceneGraph& g : graphs) arr.push_back(graph_to_json(g));
    json out{{"digest", digest},
             {"grid",
              {{"lanes", grid.lanes},
               {"rows", grid.rows},
               {"cell_length", grid.cell_length},
               {"range", grid.range}}},
             {"graphs", std::move(arr)}};
    return out.dump(2) + "\n";
}

std::vector<SceneGraph> read_graphs_json(const std::string& text) {
    std::vector<SceneGraph> graphs;
    int max_label = 0;
    try {
        const json j = json::parse(text);
        if (auto it = j.find("grid"); it != j.end())
            max_label = it->at("lanes").get<int>() * it->at("rows").get<int>();
        for (const json& gj : j.at("graphs")) graphs.push_back(graph_from_json(gj));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad graphs JSON: ") + e.what());
    }
    for (const SceneGraph& g : graphs) {
        validate_graph(g);
        if (max_label > 0)
            for (const SceneGraphNode& node : g.nodes)
                if (node.label > max_label)
                    throw ValidationError(g.scene_ref + ": node label exceeds the grid");
    }
    if (graphs.empty()) throw EmptyInputError("no graphs in input");
    return graphs;
}

} // namespace riskgraph::graphs
