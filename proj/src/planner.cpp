#include "lookaround/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

namespace lookaround {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

double octile_distance(const Vec2i& a, const Vec2i& b) {
    int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
    int lo = std::min(dx, dy), hi = std::max(dx, dy);
    return kSqrt2 * lo + (hi - lo);
}

std::vector<std::pair<Vec2i, double>> NavGraph::neighbors(const Vec2i& c) const {
    std::vector<std::pair<Vec2i, double>> out;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx_ = c.x + dx, ny_ = c.y + dy;
            if (!is_node(nx_, ny_)) continue;
            if (dx != 0 && dy != 0) {
                // no corner cutting
                if (!is_node(c.x + dx, c.y) || !is_node(c.x, c.y + dy)) continue;
                out.push_back({{nx_, ny_}, kSqrt2});
            } else {
                out.push_back({{nx_, ny_}, 1.0});
            }
        }
    }
    return out;
}

size_t NavGraph::node_count() const {
    size_t n = 0;
    for (uint8_t f : free_cell) n += f;
    return n;
}

size_t NavGraph::edge_count() const {
    size_t twice = 0;
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            if (is_node(x, y)) twice += neighbors({x, y}).size();
        }
    }
    return twice / 2;
}

NavGraph build_nav_graph(const ExploredMap& M) {
    NavGraph g;
    g.nx = M.nx;
    g.ny = M.ny;
    g.free_cell.assign(static_cast<size_t>(M.nx) * M.ny, 0);
    bool any = false;
    for (int y = 0; y < M.ny; ++y) {
        for (int x = 0; x < M.nx; ++x) {
            if (M.at(x, y) == CellState::Free) {
                g.free_cell[g.idx(x, y)] = 1;
                any = true;
            }
        }
    }
    if (!any) throw std::runtime_error("build_nav_graph: no known-free cells");
    return g;
}

std::vector<uint8_t> reachable_from(const NavGraph& g, const Vec2i& start) {
    std::vector<uint8_t> seen(g.free_cell.size(), 0);
    if (!g.is_node(start.x, start.y)) return seen;
    std::deque<Vec2i> q{start};
    seen[g.idx(start.x, start.y)] = 1;
    while (!q.empty()) {
        Vec2i c = q.front();
        q.pop_front();
        for (const auto& [n, cost] : g.neighbors(c)) {
            if (!seen[g.idx(n.x, n.y)]) {
                seen[g.idx(n.x, n.y)] = 1;
                q.push_back(n);
            }
        }
    }
    return seen;
}

Vec2i snap_goal(const NavGraph& g, double goal_x, double goal_y, const Vec2i& start) {
    if (!g.is_node(start.x, start.y)) throw std::runtime_error("snap_goal: start is not a node");
    std::vector<uint8_t> seen = reachable_from(g, start);
    Vec2i best{-1, -1};
    double best_d = std::numeric_limits<double>::infinity();
    for (int y = 0; y < g.ny; ++y) {
        for (int x = 0; x < g.nx; ++x) {
            if (!seen[g.idx(x, y)]) continue;
            double dx = x - goal_x, dy = y - goal_y;
            double d = dx * dx + dy * dy;
            if (d < best_d) {
                best_d = d;
                best = {x, y};
            }
        }
    }
    if (best.x < 0) throw std::runtime_error("snap_goal: start isolated");
    return best;
}

PathResult astar(const NavGraph& g, const Vec2i& start, const Vec2i& goal) {
    if (!g.is_node(start.x, start.y) || !g.is_node(goal.x, goal.y)) {
        throw std::runtime_error("astar: start or goal not a node");
    }
    const size_t n = g.free_cell.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    std::vector<uint8_t> closed(n, 0);

    using QItem = std::pair<double, size_t>;  // (f, cell index)
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> open;
    size_t si = g.idx(start.x, start.y), gi = g.idx(goal.x, goal.y);
    dist[si] = 0;
    open.push({octile_distance(start, goal), si});

    while (!open.empty()) {
        auto [f, ci] = open.top();
        open.pop();
        if (closed[ci]) continue;
        closed[ci] = 1;
        if (ci == gi) break;
        Vec2i c{static_cast<int>(ci % g.nx), static_cast<int>(ci / g.nx)};
        for (const auto& [nb, cost] : g.neighbors(c)) {
            size_t ni = g.idx(nb.x, nb.y);
            double nd = dist[ci] + cost;
            if (nd < dist[ni] - 1e-12) {
                dist[ni] = nd;
                parent[ni] = static_cast<int>(ci);
                open.push({nd + octile_distance(nb, goal), ni});
            }
        }
    }
    if (!closed[gi]) throw std::runtime_error("astar: no path");

    PathResult out;
    out.cost = dist[gi];
    std::vector<Vec2i> rev;
    for (int ci = static_cast<int>(gi); ci >= 0; ci = parent[ci]) {
        rev.push_back({ci % g.nx, ci / g.nx});
        if (static_cast<size_t>(ci) == si) break;
    }
    out.nodes.assign(rev.rbegin(), rev.rend());
    return out;
}

FollowResult follow(const Scene& scene, const AgentPose& pose, const std::vector<Vec2i>& path,
                    int n_steps, const CameraModel& cam, int first_frame_id) {
    FollowResult res;
    res.pose = pose;
    const double vs = scene.voxel_size;
    size_t wp = 0;
    // skip a leading waypoint equal to the current cell
    if (!path.empty()) {
        Vec2i cur{static_cast<int>(std::floor(pose.x / vs)),
                  static_cast<int>(std::floor(pose.y / vs))};
        if (path.front() == cur) wp = 1;
    }
    for (int step = 0; step < n_steps && wp < path.size(); ++step, ++wp) {
        const Vec2i& cell = path[wp];
        if (!scene.is_walkable(cell.x, cell.y)) {
            res.replan = true;
            return res;
        }
        double wx = (cell.x + 0.5) * vs, wy = (cell.y + 0.5) * vs;
        // adjacent cells are at most sqrt(2) voxels apart; the first waypoint
        // can be up to one cell off the current continuous position
        res.pose = step_agent(scene, res.pose, wx, wy, 2.5 * vs);
        FrameObservation obs = raycast_frame(scene, res.pose, cam);
        obs.frame_id = first_frame_id + static_cast<int>(res.frames.size());
        res.frames.push_back(std::move(obs));
    }
    return res;
}

}  // namespace lookaround
