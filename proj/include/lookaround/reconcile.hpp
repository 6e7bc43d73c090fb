#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lookaround/voxel_map.hpp"

namespace lookaround {

struct PseudoLabel {
    int frame_id = 0;
    int u = -1;
    int class_id = -1;
    std::vector<double> lambda_bar;
    std::vector<int> mask;  // pixel indices, sorted
    BBox bbox;
};

struct FramePose {
    int frame_id = 0;
    AgentPose pose;
};

struct PseudoDataset {
    std::vector<std::pair<int, std::vector<PseudoLabel>>> entries;  // frame_id -> labels
    uint64_t episode_seed = 0;
    std::string policy;
    std::string score_kind;

    std::string to_jsonl() const;
    static PseudoDataset from_jsonl(const std::string& text);
};

struct ReconcileConfig {
    int min_mask_pixels = 3;  // smaller projections are discarded
};

// Occlusion-respecting projection of instance u onto the camera at `pose`:
// a pixel belongs to the mask iff its ray reaches a voxel of u before any
// wall or other-instance voxel. nullopt when no pixel survives.
std::optional<std::pair<std::vector<int>, BBox>> project_instance(const Scene& scene,
                                                                  const SemanticVoxelMap& map,
                                                                  int u, const AgentPose& pose,
                                                                  const CameraModel& cam);

PseudoDataset reconcile(const Scene& scene, const SemanticVoxelMap& map,
                        const std::vector<FramePose>& frames, const CameraModel& cam,
                        const ReconcileConfig& cfg = {});

struct LabelRef {
    int frame_id = 0;
    int u = -1;
};

struct Triplet {
    LabelRef anchor, positive, negative;
};

// All ordered same-instance cross-frame (anchor, positive) pairs in the
// batch, each paired with one rng-chosen label of a different instance.
std::vector<Triplet> mine_triplets(const PseudoDataset& dataset, const std::vector<int>& batch,
                                   Rng& rng);

}  // namespace lookaround
