#pragma once

#include <optional>
#include <vector>

#include "lookaround/explored_map.hpp"

namespace lookaround {

// 8-connected grid graph over the currently-known free cells. Diagonal moves
// require both adjacent axis cells free (no corner cutting).
struct NavGraph {
    int nx = 0, ny = 0;
    std::vector<uint8_t> free_cell;  // nx*ny

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * nx + x; }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < nx && y < ny; }
    bool is_node(int x, int y) const { return in_bounds(x, y) && free_cell[idx(x, y)] != 0; }

    // neighbors with edge costs (1 or sqrt 2)
    std::vector<std::pair<Vec2i, double>> neighbors(const Vec2i& c) const;
    size_t node_count() const;
    size_t edge_count() const;  // undirected edges
};

NavGraph build_nav_graph(const ExploredMap& M);

// cells reachable from start (8-connected, no corner cutting)
std::vector<uint8_t> reachable_from(const NavGraph& g, const Vec2i& start);

// among nodes reachable from start, the one closest (Euclidean) to the goal;
// ties resolved to the lowest (x, y)
Vec2i snap_goal(const NavGraph& g, double goal_x, double goal_y, const Vec2i& start);

struct PathResult {
    std::vector<Vec2i> nodes;
    double cost = 0;
};

// A* with octile heuristic; throws if start/goal are disconnected
PathResult astar(const NavGraph& g, const Vec2i& start, const Vec2i& goal);

struct FollowResult {
    AgentPose pose;
    std::vector<FrameObservation> frames;
    bool replan = false;  // a waypoint turned out to be blocked
};

// Executes up to n_steps waypoints of the path, raycasting one frame per
// step. frame ids start at first_frame_id.
FollowResult follow(const Scene& scene, const AgentPose& pose, const std::vector<Vec2i>& path,
                    int n_steps, const CameraModel& cam, int first_frame_id);

double octile_distance(const Vec2i& a, const Vec2i& b);

}  // namespace lookaround
