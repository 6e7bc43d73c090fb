#include "lookaround/scene.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <nlohmann/json.hpp>

namespace lookaround {

using json = nlohmann::json;

void Scene::finalize() {
    const size_t n = static_cast<size_t>(dims.x) * dims.y * dims.z;
    if (occupancy.size() != n) throw std::runtime_error("Scene: occupancy size mismatch");
    label.assign(n, kLabelFree);
    for (size_t i = 0; i < n; ++i) {
        if (occupancy[i] == kVoxWall) label[i] = kLabelWall;
    }
    for (const auto& obj : objects) {
        for (const auto& v : obj.voxels) {
            if (!in_bounds(v)) throw std::runtime_error("Scene: object voxel out of bounds");
            size_t idx = vindex(v.x, v.y, v.z);
            if (occupancy[idx] == kVoxWall) throw std::runtime_error("Scene: object inside wall");
            label[idx] = obj.gt_id;
        }
    }
    walkable.assign(static_cast<size_t>(dims.x) * dims.y, 0);
    const int zmax = std::min(head_voxels, dims.z);
    for (int y = 0; y < dims.y; ++y) {
        for (int x = 0; x < dims.x; ++x) {
            bool ok = true;
            for (int z = 0; z < zmax && ok; ++z) {
                ok = label[vindex(x, y, z)] == kLabelFree;
            }
            walkable[cindex(x, y)] = ok ? 1 : 0;
        }
    }
}

namespace {

// true iff all walkable cells form one 4-connected component (vacuously true
// when none exist)
bool walkable_connected(const Scene& s) {
    int start_x = -1, start_y = -1, total = 0;
    for (int y = 0; y < s.dims.y; ++y) {
        for (int x = 0; x < s.dims.x; ++x) {
            if (s.walkable[s.cindex(x, y)]) {
                ++total;
                if (start_x < 0) {
                    start_x = x;
                    start_y = y;
                }
            }
        }
    }
    if (total == 0) return true;
    std::vector<uint8_t> seen(s.walkable.size(), 0);
    std::deque<Vec2i> q{{start_x, start_y}};
    seen[s.cindex(start_x, start_y)] = 1;
    int reached = 1;
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
        Vec2i c = q.front();
        q.pop_front();
        for (int k = 0; k < 4; ++k) {
            int nx = c.x + dx[k], ny = c.y + dy[k];
            if (!s.in_bounds2d(nx, ny)) continue;
            size_t ci = s.cindex(nx, ny);
            if (s.walkable[ci] && !seen[ci]) {
                seen[ci] = 1;
                ++reached;
                q.push_back({nx, ny});
            }
        }
    }
    return reached == total;
}

void carve_walls(Scene& scene, const SceneGenConfig& cfg, Rng& rng) {
    for (int seg = 0; seg < cfg.n_wall_segments; ++seg) {
        for (int attempt = 0; attempt < 20; ++attempt) {
            Scene backup = scene;
            bool vertical = rng.u01() < 0.5;
            int span = vertical ? scene.dims.y : scene.dims.x;
            int cross = vertical ? scene.dims.x : scene.dims.y;
            if (cross < 8 || span < 8) return;
            int pos = 3 + static_cast<int>(rng.uniform_int(cross - 6));
            int door = 1 + static_cast<int>(rng.uniform_int(span - 4));
            for (int t = 1; t < span - 1; ++t) {
                if (t >= door && t < door + 3) continue;  // doorway
                int x = vertical ? pos : t;
                int y = vertical ? t : pos;
                for (int z = 0; z < scene.dims.z; ++z) {
                    scene.occupancy[scene.vindex(x, y, z)] = kVoxWall;
                }
            }
            scene.finalize();
            size_t free_cells = 0;
            for (uint8_t w : scene.walkable) free_cells += w;
            if (walkable_connected(scene) &&
                free_cells > scene.walkable.size() / 4) {
                break;  // segment accepted
            }
            scene = std::move(backup);
            scene.finalize();
        }
    }
}

bool place_object(Scene& scene, const SceneGenConfig& cfg, Rng& rng, int gt_id, int class_id) {
    for (int attempt = 0; attempt < cfg.max_placement_retries; ++attempt) {
        int sx = cfg.min_object_side +
                 static_cast<int>(rng.uniform_int(cfg.max_object_side - cfg.min_object_side + 1));
        int sy = cfg.min_object_side +
                 static_cast<int>(rng.uniform_int(cfg.max_object_side - cfg.min_object_side + 1));
        int sz = cfg.min_object_height +
                 static_cast<int>(rng.uniform_int(cfg.max_object_height - cfg.min_object_height + 1));
        sz = std::min(sz, scene.dims.z);
        if (scene.dims.x - sx - 2 <= 0 || scene.dims.y - sy - 2 <= 0) continue;
        int ox = 1 + static_cast<int>(rng.uniform_int(scene.dims.x - sx - 2));
        int oy = 1 + static_cast<int>(rng.uniform_int(scene.dims.y - sy - 2));

        bool clear = true;
        for (int x = ox; x < ox + sx && clear; ++x) {
            for (int y = oy; y < oy + sy && clear; ++y) {
                for (int z = 0; z < sz && clear; ++z) {
                    clear = scene.label_at({x, y, z}) == kLabelFree;
                }
            }
        }
        if (!clear) continue;

        GroundTruthObject obj;
        obj.gt_id = gt_id;
        obj.class_id = class_id;
        for (int x = ox; x < ox + sx; ++x) {
            for (int y = oy; y < oy + sy; ++y) {
                for (int z = 0; z < sz; ++z) {
                    obj.voxels.push_back({x, y, z});
                }
            }
        }
        std::sort(obj.voxels.begin(), obj.voxels.end());
        scene.objects.push_back(std::move(obj));
        scene.finalize();
        size_t free_cells = 0;
        for (uint8_t w : scene.walkable) free_cells += w;
        if (walkable_connected(scene) && free_cells > 0) return true;
        scene.objects.pop_back();
        scene.finalize();
    }
    return false;
}

}  // namespace

Scene generate_scene(const SceneGenConfig& config, uint64_t seed) {
    if (config.n_classes < 2) throw std::invalid_argument("generate_scene: need >= 2 classes");
    if (config.dims.x < 4 || config.dims.y < 4 || config.dims.z < 2) {
        throw std::invalid_argument("generate_scene: dims too small");
    }
    Rng rng(seed * 0x51ed2701u + 0xabcd1234u);

    Scene scene;
    scene.dims = config.dims;
    scene.voxel_size = config.voxel_size;
    scene.seed = seed;
    scene.head_voxels = config.head_voxels;
    scene.occupancy.assign(static_cast<size_t>(config.dims.x) * config.dims.y * config.dims.z,
                           kVoxFree);
    // border walls, full height
    for (int z = 0; z < scene.dims.z; ++z) {
        for (int x = 0; x < scene.dims.x; ++x) {
            scene.occupancy[scene.vindex(x, 0, z)] = kVoxWall;
            scene.occupancy[scene.vindex(x, scene.dims.y - 1, z)] = kVoxWall;
        }
        for (int y = 0; y < scene.dims.y; ++y) {
            scene.occupancy[scene.vindex(0, y, z)] = kVoxWall;
            scene.occupancy[scene.vindex(scene.dims.x - 1, y, z)] = kVoxWall;
        }
    }
    scene.finalize();

    carve_walls(scene, config, rng);

    for (int i = 0; i < config.n_objects; ++i) {
        int class_id = static_cast<int>(rng.uniform_int(config.n_classes));
        if (!place_object(scene, config, rng, i, class_id)) {
            throw std::runtime_error("generate_scene: object placement failed after " +
                                     std::to_string(config.max_placement_retries) +
                                     " retries (object " + std::to_string(i) + ")");
        }
    }
    scene.finalize();
    return scene;
}

void walk_ray(const Scene& scene, const Vec3d& origin, const Vec3d& dir, double max_range,
              const std::function<bool(const Vec3i&, double)>& visit) {
    const double vs = scene.voxel_size;
    Vec3i v{static_cast<int>(std::floor(origin.x / vs)),
            static_cast<int>(std::floor(origin.y / vs)),
            static_cast<int>(std::floor(origin.z / vs))};
    if (!scene.in_bounds(v)) return;

    const double d[3] = {dir.x, dir.y, dir.z};
    const double o[3] = {origin.x, origin.y, origin.z};
    int idx[3] = {v.x, v.y, v.z};
    int step[3];
    double t_max[3], t_delta[3];
    for (int a = 0; a < 3; ++a) {
        if (d[a] > 1e-12) {
            step[a] = 1;
            t_max[a] = ((idx[a] + 1) * vs - o[a]) / d[a];
            t_delta[a] = vs / d[a];
        } else if (d[a] < -1e-12) {
            step[a] = -1;
            t_max[a] = (idx[a] * vs - o[a]) / d[a];
            t_delta[a] = vs / -d[a];
        } else {
            step[a] = 0;
            t_max[a] = std::numeric_limits<double>::infinity();
            t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }

    double t = 0;
    if (!visit({idx[0], idx[1], idx[2]}, 0.0)) return;
    while (true) {
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        t = t_max[axis];
        if (t > max_range) return;
        idx[axis] += step[axis];
        t_max[axis] += t_delta[axis];
        Vec3i nv{idx[0], idx[1], idx[2]};
        if (!scene.in_bounds(nv)) return;
        if (!visit(nv, t)) return;
    }
}

Vec3d camera_ray_dir(const AgentPose& pose, const CameraModel& cam, int px, int py) {
    double az = pose.heading + ((px + 0.5) / cam.width - 0.5) * cam.hfov;
    double el = -((py + 0.5) / cam.height - 0.5) * cam.vfov;  // py grows downward
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

FrameObservation raycast_frame(const Scene& scene, const AgentPose& pose, const CameraModel& cam) {
    const double vs = scene.voxel_size;
    Vec3d origin{pose.x, pose.y, pose.camera_height};
    Vec3i ov{static_cast<int>(std::floor(origin.x / vs)), static_cast<int>(std::floor(origin.y / vs)),
             static_cast<int>(std::floor(origin.z / vs))};
    if (!scene.in_bounds(ov)) throw std::runtime_error("raycast_frame: pose outside grid");

    FrameObservation obs;
    obs.pose = pose;
    obs.width = cam.width;
    obs.height = cam.height;
    obs.rays.resize(static_cast<size_t>(cam.width) * cam.height);

    std::set<Vec2i> free_cells, obstacle_cells;
    free_cells.insert({ov.x, ov.y});  // agent stands here

    for (int py = 0; py < cam.height; ++py) {
        for (int px = 0; px < cam.width; ++px) {
            Vec3d dir = camera_ray_dir(pose, cam, px, py);
            RayHit& hit = obs.rays[static_cast<size_t>(py) * cam.width + px];
            walk_ray(scene, origin, dir, cam.max_range,
                     [&](const Vec3i& v, double t) {
                         int32_t lab = scene.label_at(v);
                         if (lab == kLabelFree) {
                             if (v.z < scene.head_voxels) free_cells.insert({v.x, v.y});
                             return true;
                         }
                         hit.depth = t;
                         hit.voxel = v;
                         hit.hit_label = lab;
                         // nudge the hit point into the voxel so flooring recovers it
                         double tq = t + 1e-7;
                         hit.point = {origin.x + dir.x * tq, origin.y + dir.y * tq,
                                      origin.z + dir.z * tq};
                         if (v.z < scene.head_voxels) obstacle_cells.insert({v.x, v.y});
                         if (lab >= 0) obs.visible[lab].insert(v);
                         return false;
                     });
        }
    }
    for (const auto& c : obstacle_cells) free_cells.erase(c);
    obs.seen_free.assign(free_cells.begin(), free_cells.end());
    obs.seen_obstacle.assign(obstacle_cells.begin(), obstacle_cells.end());
    obs.max_range = cam.max_range;
    for (const auto& [gt_id, vox] : obs.visible) {
        for (const auto& obj : scene.objects) {
            if (obj.gt_id == gt_id) {
                obs.object_info[gt_id] = {obj.class_id, obj.voxels.size()};
                break;
            }
        }
    }
    return obs;
}

AgentPose step_agent(const Scene& scene, const AgentPose& pose, double wx, double wy,
                     double step_length) {
    double dx = wx - pose.x, dy = wy - pose.y;
    double dist = std::hypot(dx, dy);
    if (dist > step_length + 1e-9) {
        throw std::runtime_error("step_agent: waypoint beyond step length");
    }
    int cx = static_cast<int>(std::floor(wx / scene.voxel_size));
    int cy = static_cast<int>(std::floor(wy / scene.voxel_size));
    if (!scene.is_walkable(cx, cy)) {
        throw std::runtime_error("step_agent: waypoint not walkable");
    }
    AgentPose out = pose;
    out.x = wx;
    out.y = wy;
    if (dist > 1e-12) out.heading = normalize_angle(std::atan2(dy, dx));
    return out;
}

std::string save_scene(const Scene& scene) {
    json j;
    j["version"] = 1;
    j["seed"] = scene.seed;
    j["voxel_size"] = scene.voxel_size;
    j["head_voxels"] = scene.head_voxels;
    j["dims"] = {scene.dims.x, scene.dims.y, scene.dims.z};
    json rle = json::array();
    size_t i = 0;
    while (i < scene.occupancy.size()) {
        size_t run = 1;
        while (i + run < scene.occupancy.size() && scene.occupancy[i + run] == scene.occupancy[i]) {
            ++run;
        }
        rle.push_back({scene.occupancy[i], run});
        i += run;
    }
    j["occupancy"] = std::move(rle);
    json objs = json::array();
    for (const auto& o : scene.objects) {
        json jo;
        jo["gt_id"] = o.gt_id;
        jo["class_id"] = o.class_id;
        json vox = json::array();
        for (const auto& v : o.voxels) vox.push_back({v.x, v.y, v.z});
        jo["voxels"] = std::move(vox);
        objs.push_back(std::move(jo));
    }
    j["objects"] = std::move(objs);
    return j.dump();
}

Scene load_scene(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("load_scene: parse error: ") + e.what());
    }
    try {
        Scene s;
        if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported version");
        s.seed = j.at("seed").get<uint64_t>();
        s.voxel_size = j.at("voxel_size").get<double>();
        s.head_voxels = j.at("head_voxels").get<int>();
        auto d = j.at("dims");
        s.dims = {d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
        size_t n = static_cast<size_t>(s.dims.x) * s.dims.y * s.dims.z;
        s.occupancy.reserve(n);
        for (const auto& pair : j.at("occupancy")) {
            uint8_t val = pair.at(0).get<uint8_t>();
            size_t run = pair.at(1).get<size_t>();
            s.occupancy.insert(s.occupancy.end(), run, val);
        }
        if (s.occupancy.size() != n) throw std::runtime_error("occupancy length mismatch");
        for (const auto& jo : j.at("objects")) {
            GroundTruthObject o;
            o.gt_id = jo.at("gt_id").get<int>();
            o.class_id = jo.at("class_id").get<int>();
            for (const auto& v : jo.at("voxels")) {
                o.voxels.push_back({v.at(0).get<int>(), v.at(1).get<int>(), v.at(2).get<int>()});
            }
            s.objects.push_back(std::move(o));
        }
        s.finalize();
        return s;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("load_scene: malformed document: ") + e.what());
    }
}

}  // namespace lookaround
