#pragma once

#include <vector>

#include "lookaround/scene.hpp"

namespace lookaround {

enum class CellState : uint8_t { Unknown = 0, Free = 1, Obstacle = 2 };

// Top-down map accumulated from frame observations. Cells flip
// unknown -> {free, obstacle}; obstacle observations win and stick.
struct ExploredMap {
    int nx = 0, ny = 0;
    std::vector<CellState> state;
    std::vector<int> last_frame;  // provenance: frame that last touched the cell

    ExploredMap() = default;
    ExploredMap(int nx_, int ny_)
        : nx(nx_), ny(ny_), state(static_cast<size_t>(nx_) * ny_, CellState::Unknown),
          last_frame(static_cast<size_t>(nx_) * ny_, -1) {}

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * nx + x; }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < nx && y < ny; }
    CellState at(int x, int y) const { return state[idx(x, y)]; }
    bool is_free(int x, int y) const { return in_bounds(x, y) && at(x, y) == CellState::Free; }

    void update(const FrameObservation& obs);

    // free cell 4-adjacent to an unknown cell
    bool is_frontier(int x, int y) const;

    double explored_fraction() const;
};

}  // namespace lookaround
