#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "lookaround/detector.hpp"
#include "lookaround/scene.hpp"

namespace lookaround {

struct LogitEntry {
    int frame_id = 0;
    std::vector<double> logits;
};

struct VoxelCell {
    std::vector<LogitEntry> entries;
    int hard_label = -1;  // recomputed on resolve
    int owner = -1;       // instance id, or -1 before resolve
};

struct InstanceRecord {
    int u = -1;
    int class_id = -1;
    std::vector<Vec3i> voxels;  // sorted
    std::vector<std::vector<double>> logit_set;  // Q(u)
    Vec3i bbox_min, bbox_max;
};

class SemanticVoxelMap {
public:
    explicit SemanticVoxelMap(double voxel_size = 0.05) : voxel_size_(voxel_size) {}

    double voxel_size() const { return voxel_size_; }
    bool dirty() const { return dirty_; }
    size_t n_voxels() const { return cells_.size(); }

    // Projects every masked pixel with a valid depth into its voxel and
    // appends the detection's logits there. Pixels without depth are skipped
    // and tallied.
    void insert_detection(const Detection& det, const FrameObservation& obs);

    // 26-connected components of equal hard label; assigns stable instance
    // ids (components sorted by minimal voxel index).
    void resolve_instances();

    // mean of softmax over Q(u); throws on unknown id
    std::vector<double> aggregated_softmax(int u) const;

    const std::map<int, InstanceRecord>& instances() const;
    const std::unordered_map<Vec3i, VoxelCell, Vec3iHash>& cells() const { return cells_; }
    size_t skipped_pixels() const { return skipped_pixels_; }

    // instance owning a voxel, or -1
    int owner_at(const Vec3i& v) const;

    std::string dump_json() const;

private:
    void recompute_hard_labels();

    double voxel_size_;
    std::unordered_map<Vec3i, VoxelCell, Vec3iHash> cells_;
    std::map<int, InstanceRecord> instances_;
    bool dirty_ = false;
    size_t skipped_pixels_ = 0;
};

}  // namespace lookaround
