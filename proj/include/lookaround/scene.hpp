#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lookaround/core.hpp"

namespace lookaround {

constexpr uint8_t kVoxFree = 0;
constexpr uint8_t kVoxWall = 1;

// label grid sentinel values; values >= 0 are gt object ids
constexpr int32_t kLabelFree = -1;
constexpr int32_t kLabelWall = -2;

struct GroundTruthObject {
    int gt_id = 0;
    int class_id = 0;
    std::vector<Vec3i> voxels;  // sorted lexicographically
    friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

struct SceneGenConfig {
    Vec3i dims{64, 64, 16};
    double voxel_size = 0.05;
    int n_classes = 8;
    int n_objects = 10;
    int n_wall_segments = 4;
    int min_object_side = 2;
    int max_object_side = 4;
    int min_object_height = 2;
    int max_object_height = 5;
    int head_voxels = 9;  // column height (in voxels) the agent needs free to stand
    int max_placement_retries = 200;
};

struct Scene {
    Vec3i dims{0, 0, 0};
    double voxel_size = 0.05;
    uint64_t seed = 0;
    int head_voxels = 9;
    std::vector<uint8_t> occupancy;  // nx*ny*nz, {kVoxFree, kVoxWall}
    std::vector<GroundTruthObject> objects;

    // derived, rebuilt by finalize()
    std::vector<int32_t> label;    // voxel -> kLabelFree / kLabelWall / gt_id
    std::vector<uint8_t> walkable; // nx*ny

    size_t vindex(int x, int y, int z) const {
        return (static_cast<size_t>(z) * dims.y + y) * dims.x + x;
    }
    size_t cindex(int x, int y) const { return static_cast<size_t>(y) * dims.x + x; }
    bool in_bounds(const Vec3i& v) const {
        return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < dims.x && v.y < dims.y && v.z < dims.z;
    }
    bool in_bounds2d(int x, int y) const { return x >= 0 && y >= 0 && x < dims.x && y < dims.y; }
    uint8_t occ(const Vec3i& v) const { return occupancy[vindex(v.x, v.y, v.z)]; }
    int32_t label_at(const Vec3i& v) const { return label[vindex(v.x, v.y, v.z)]; }
    bool is_walkable(int x, int y) const { return in_bounds2d(x, y) && walkable[cindex(x, y)] != 0; }

    // rebuild label grid and walkable map from occupancy + objects
    void finalize();

    friend bool operator==(const Scene& a, const Scene& b) {
        return a.dims == b.dims && a.voxel_size == b.voxel_size && a.seed == b.seed &&
               a.head_voxels == b.head_voxels && a.occupancy == b.occupancy &&
               a.objects == b.objects;
    }
};

struct AgentPose {
    double x = 0, y = 0;         // map coordinates in meters
    double heading = 0;          // radians, [0, 2pi), 0 = +x (east)
    double camera_height = 0.4;  // meters
};

struct CameraModel {
    int width = 64;
    int height = 48;
    double hfov = M_PI / 2.0;   // radians
    double vfov = M_PI / 3.0;
    double max_range = 5.0;     // meters
};

struct RayHit {
    double depth = -1.0;  // <0 means no hit within range
    Vec3d point;          // hit point nudged inside the hit voxel
    Vec3i voxel{0, 0, 0};
    int32_t hit_label = kLabelFree;  // kLabelWall, gt_id, or kLabelFree for misses
};

struct VisibleObjectInfo {
    int class_id = 0;
    size_t total_voxels = 0;
};

struct FrameObservation {
    int frame_id = 0;
    AgentPose pose;
    int width = 0, height = 0;
    double max_range = 0;
    std::vector<RayHit> rays;  // width*height, row-major (y*width + x)
    std::map<int, std::set<Vec3i>> visible;  // gt_id -> visible surface voxels
    std::map<int, VisibleObjectInfo> object_info;  // gt_id -> class / size, for the detector
    std::vector<Vec2i> seen_free;      // top-down cells observed traversable
    std::vector<Vec2i> seen_obstacle;  // top-down cells observed blocked

    const RayHit& ray(int px, int py) const { return rays[static_cast<size_t>(py) * width + px]; }
};

Scene generate_scene(const SceneGenConfig& config, uint64_t seed);

FrameObservation raycast_frame(const Scene& scene, const AgentPose& pose, const CameraModel& cam);

// Kinematic waypoint following. Throws if the waypoint is not walkable.
AgentPose step_agent(const Scene& scene, const AgentPose& pose, double wx, double wy,
                     double step_length);

std::string save_scene(const Scene& scene);
Scene load_scene(const std::string& bytes);

// Generic DDA walk from `origin` along unit `dir`. Calls visit(voxel, t_enter)
// for each voxel entered until it returns false, range is exceeded, or the
// ray leaves the grid.
void walk_ray(const Scene& scene, const Vec3d& origin, const Vec3d& dir, double max_range,
              const std::function<bool(const Vec3i&, double)>& visit);

// Direction of camera ray (px, py) for the given pose, matching raycast_frame.
Vec3d camera_ray_dir(const AgentPose& pose, const CameraModel& cam, int px, int py);

}  // namespace lookaround
