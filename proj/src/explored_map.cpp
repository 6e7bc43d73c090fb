#include "lookaround/explored_map.hpp"

namespace lookaround {

void ExploredMap::update(const FrameObservation& obs) {
    for (const Vec2i& c : obs.seen_free) {
        if (!in_bounds(c.x, c.y)) continue;
        size_t i = idx(c.x, c.y);
        if (state[i] == CellState::Unknown) {
            state[i] = CellState::Free;
            last_frame[i] = obs.frame_id;
        }
    }
    for (const Vec2i& c : obs.seen_obstacle) {
        if (!in_bounds(c.x, c.y)) continue;
        size_t i = idx(c.x, c.y);
        if (state[i] != CellState::Obstacle) {
            state[i] = CellState::Obstacle;
            last_frame[i] = obs.frame_id;
        }
    }
}

bool ExploredMap::is_frontier(int x, int y) const {
    if (!is_free(x, y)) return false;
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
        int nx_ = x + dx[k], ny_ = y + dy[k];
        if (in_bounds(nx_, ny_) && at(nx_, ny_) == CellState::Unknown) return true;
    }
    return false;
}

double ExploredMap::explored_fraction() const {
    if (state.empty()) return 0.0;
    size_t known = 0;
    for (CellState s : state) {
        if (s != CellState::Unknown) ++known;
    }
    return static_cast<double>(known) / static_cast<double>(state.size());
}

}  // namespace lookaround
