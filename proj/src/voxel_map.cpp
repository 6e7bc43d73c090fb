#include "lookaround/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <nlohmann/json.hpp>

namespace lookaround {

using json = nlohmann::json;

void SemanticVoxelMap::insert_detection(const Detection& det, const FrameObservation& obs) {
    for (int pix : det.mask) {
        const RayHit& hit = obs.rays.at(static_cast<size_t>(pix));
        if (hit.depth < 0) {
            ++skipped_pixels_;
            continue;
        }
        Vec3i v{static_cast<int>(std::floor(hit.point.x / voxel_size_)),
                static_cast<int>(std::floor(hit.point.y / voxel_size_)),
                static_cast<int>(std::floor(hit.point.z / voxel_size_))};
        cells_[v].entries.push_back({det.frame_id, det.logits});
    }
    dirty_ = true;
}

void SemanticVoxelMap::recompute_hard_labels() {
    for (auto& [v, cell] : cells_) {
        double best_score = -1;
        int best_class = -1, best_frame = 0;
        for (const auto& entry : cell.entries) {
            std::vector<double> p = softmax(entry.logits);
            for (int c = 0; c < static_cast<int>(p.size()); ++c) {
                // canonical tie-break: lower class index, then earlier frame
                bool better = p[c] > best_score ||
                              (p[c] == best_score &&
                               (c < best_class || (c == best_class && entry.frame_id < best_frame)));
                if (better) {
                    best_score = p[c];
                    best_class = c;
                    best_frame = entry.frame_id;
                }
            }
        }
        cell.hard_label = best_class;
        cell.owner = -1;
    }
}

void SemanticVoxelMap::resolve_instances() {
    recompute_hard_labels();
    instances_.clear();

    std::vector<Vec3i> keys;
    keys.reserve(cells_.size());
    for (const auto& [v, cell] : cells_) keys.push_back(v);
    std::sort(keys.begin(), keys.end());

    int next_u = 0;
    for (const Vec3i& seed : keys) {
        VoxelCell& seed_cell = cells_.at(seed);
        if (seed_cell.owner >= 0) continue;
        // seeding in sorted key order means `seed` is the component minimum,
        // so ids are stable across insertion orders
        int u = next_u++;
        InstanceRecord rec;
        rec.u = u;
        rec.class_id = seed_cell.hard_label;
        std::deque<Vec3i> q{seed};
        seed_cell.owner = u;
        while (!q.empty()) {
            Vec3i v = q.front();
            q.pop_front();
            rec.voxels.push_back(v);
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dz = -1; dz <= 1; ++dz) {
                        if (dx == 0 && dy == 0 && dz == 0) continue;
                        Vec3i n{v.x + dx, v.y + dy, v.z + dz};
                        auto it = cells_.find(n);
                        if (it == cells_.end()) continue;
                        if (it->second.owner >= 0 || it->second.hard_label != rec.class_id) continue;
                        it->second.owner = u;
                        q.push_back(n);
                    }
                }
            }
        }
        std::sort(rec.voxels.begin(), rec.voxels.end());
        rec.bbox_min = rec.bbox_max = rec.voxels.front();
        for (const Vec3i& v : rec.voxels) {
            rec.bbox_min.x = std::min(rec.bbox_min.x, v.x);
            rec.bbox_min.y = std::min(rec.bbox_min.y, v.y);
            rec.bbox_min.z = std::min(rec.bbox_min.z, v.z);
            rec.bbox_max.x = std::max(rec.bbox_max.x, v.x);
            rec.bbox_max.y = std::max(rec.bbox_max.y, v.y);
            rec.bbox_max.z = std::max(rec.bbox_max.z, v.z);
            for (const auto& entry : cells_.at(v).entries) {
                rec.logit_set.push_back(entry.logits);
            }
        }
        instances_.emplace(u, std::move(rec));
    }
    dirty_ = false;
}

const std::map<int, InstanceRecord>& SemanticVoxelMap::instances() const {
    if (dirty_) throw std::runtime_error("SemanticVoxelMap: instances stale, call resolve_instances");
    return instances_;
}

std::vector<double> SemanticVoxelMap::aggregated_softmax(int u) const {
    auto it = instances_.find(u);
    if (it == instances_.end()) {
        throw std::runtime_error("aggregated_softmax: unknown instance " + std::to_string(u));
    }
    const auto& Q = it->second.logit_set;
    if (Q.empty()) throw std::runtime_error("aggregated_softmax: empty logit set");
    std::vector<double> mean(Q.front().size(), 0.0);
    for (const auto& logits : Q) {
        std::vector<double> p = softmax(logits);
        for (size_t c = 0; c < mean.size(); ++c) mean[c] += p[c];
    }
    for (double& x : mean) x /= static_cast<double>(Q.size());
    return mean;
}

int SemanticVoxelMap::owner_at(const Vec3i& v) const {
    auto it = cells_.find(v);
    return it == cells_.end() ? -1 : it->second.owner;
}

std::string SemanticVoxelMap::dump_json() const {
    json j;
    j["voxel_size"] = voxel_size_;
    std::vector<Vec3i> keys;
    for (const auto& [v, cell] : cells_) keys.push_back(v);
    std::sort(keys.begin(), keys.end());
    json voxels = json::array();
    for (const Vec3i& v : keys) {
        const VoxelCell& cell = cells_.at(v);
        voxels.push_back({{"index", {v.x, v.y, v.z}},
                          {"hard_label", cell.hard_label},
                          {"n_entries", cell.entries.size()}});
    }
    j["voxels"] = std::move(voxels);
    json inst = json::array();
    for (const auto& [u, rec] : instances_) {
        inst.push_back({{"u", u},
                        {"class", rec.class_id},
                        {"n_voxels", rec.voxels.size()},
                        {"lambda_bar", aggregated_softmax(u)}});
    }
    j["instances"] = std::move(inst);
    return j.dump();
}

}  // namespace lookaround
