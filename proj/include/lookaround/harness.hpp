#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lookaround/detector.hpp"
#include "lookaround/disagreement.hpp"
#include "lookaround/explored_map.hpp"
#include "lookaround/finetune.hpp"
#include "lookaround/planner.hpp"
#include "lookaround/policies.hpp"
#include "lookaround/reconcile.hpp"
#include "lookaround/scene.hpp"
#include "lookaround/voxel_map.hpp"

namespace lookaround {

struct EvalConfig {
    double iou_threshold = 0.5;
    double holdout_fraction = 0.25;  // holdout scenes per training scene
    int holdout_poses = 40;          // sampled camera poses per holdout scene
};

struct RunConfig {
    SceneGenConfig scene;
    std::optional<std::string> scene_path;  // overrides generation when set
    DetectorProfile detector;
    PolicyKind policy = PolicyKind::Greedy;
    ScoreKind score = ScoreKind::Entropy;
    int steps = 300;
    int n_replanning = 40;
    int map_k = 64;        // disagreement map resolution
    int n_candidates = 64; // learned-policy candidate cells per decision
    CameraModel camera;
    ReconcileConfig reconcile;
    std::vector<uint64_t> seeds{1};
    EvalConfig eval;
    HeadHyper head;
    std::string out_dir;

    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct EpisodeDetection {
    Detection det;
    std::vector<Vec3i> hit_voxels;  // voxels the masked pixels landed in
};

struct EpisodeResult {
    Scene scene;
    SemanticVoxelMap map;
    ExploredMap explored;
    std::vector<FramePose> frames;
    std::vector<std::vector<EpisodeDetection>> detections;  // per frame
    PseudoDataset pseudo;
    std::string trajectory_log;  // JSON lines, one record per replanning decision
    double total_disagreement = 0;
    bool exploration_complete = false;
    AgentPose final_pose;

    EpisodeResult() : map(0.05) {}
};

// One seeded action-phase episode followed by reconciliation. `learned`
// supplies policy weights for PolicyKind::Learned (zero weights otherwise).
EpisodeResult run_episode(const RunConfig& config, uint64_t seed,
                          const LearnedPolicyParams* learned = nullptr);

// intersection over union with continuous box areas; two identical
// degenerate boxes count as 1, any other degenerate overlap as 0
double iou(const BBox& a, const BBox& b);

struct EvalBox {
    int frame_id = 0;
    int class_id = 0;
    BBox box;
    double score = 1.0;
};

// per-class AP by greedy score-ordered matching at the IoU threshold,
// all-point interpolation, averaged over classes present in the ground truth
double evaluate_map50(const std::vector<EvalBox>& predictions, const std::vector<EvalBox>& gt,
                      double iou_threshold = 0.5);

// projection of a ground-truth object with full scene occlusion (walls and
// other objects); shares walk_ray with the pseudo-label path
std::optional<std::pair<std::vector<int>, BBox>> project_gt_object(const Scene& scene, int gt_id,
                                                                   const AgentPose& pose,
                                                                   const CameraModel& cam);

std::vector<EvalBox> gt_boxes_for_frames(const Scene& scene, const std::vector<FramePose>& frames,
                                         const CameraModel& cam, int min_mask_pixels = 3);

// gt object whose voxels make up the majority of the instance, or -1
int match_instance_to_gt(const Scene& scene, const InstanceRecord& rec);

// majority instance owner over the detection's hit voxels, or -1
int match_detection_to_instance(const SemanticVoxelMap& map, const EpisodeDetection& det);

struct LabelAccuracy {
    double raw = 0;         // per-view detector labels vs ground truth
    double reconciled = 0;  // pseudo-label classes vs ground truth
    size_t n_raw = 0, n_reconciled = 0;
};

LabelAccuracy label_accuracy(const EpisodeResult& ep);

// reconciled targets by default; raw_mode trains on per-view detector outputs
std::vector<TrainSample> build_train_samples(const EpisodeResult& ep, bool raw_mode);

// ground-truth-labeled features from freshly generated scenes (unseen seeds)
std::vector<TrainSample> build_holdout(const RunConfig& config, uint64_t seed);

struct MetricsFragment {
    uint64_t seed = 0;
    std::string axis_value;
    std::map<std::string, double> values;
};

struct MetricsReport {
    std::vector<MetricsFragment> fragments;
    std::map<std::string, std::map<std::string, double>> aggregate_mean;    // axis value -> field -> mean
    std::map<std::string, std::map<std::string, double>> aggregate_median;

    std::string to_json_text() const;
    std::string to_csv() const;
};

// full pipeline for one seed: episode, reconciliation, head training on raw
// and reconciled targets, holdout evaluation, mAP for raw vs reconciled
MetricsFragment run_pipeline(const RunConfig& config, uint64_t seed,
                             const LearnedPolicyParams* learned = nullptr);

enum class AblationAxis { Score, Alpha, Policy };

MetricsReport ablate(const RunConfig& config, AblationAxis axis,
                     const std::vector<std::string>& values);

MetricsReport report(const std::vector<MetricsFragment>& fragments);

double median(std::vector<double> v);

}  // namespace lookaround
