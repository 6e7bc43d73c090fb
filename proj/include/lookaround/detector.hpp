#pragma once

#include <cstdint>
#include <vector>

#include "lookaround/scene.hpp"

namespace lookaround {

struct ViewNoise {
    double dist_coeff = 0.0;  // scales distance / max_range
    double frac_coeff = 0.0;  // scales (1 - visible_fraction)
};

struct DetectorProfile {
    int n_classes = 8;
    std::vector<std::vector<double>> confusion;  // C x C, row-stochastic
    double kappa = 4.0;                          // logit sharpness
    ViewNoise view_noise;
    double miss_rate = 0.0;
    int feature_dim = 16;
    std::vector<std::vector<double>> feature_means;  // C x d; generated if empty
    double feature_noise_sigma = 0.1;
    double instance_offset_sigma = 0.3;  // per-gt-id feature offset

    void validate() const;
    // identity confusion + deterministic feature means
    static DetectorProfile make_default(int n_classes, int feature_dim = 16);
    // fill feature_means deterministically when unset
    void ensure_feature_means();
};

struct BBox {
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
    int frame_id = 0;
    std::vector<int> mask;  // pixel indices (py*width + px), sorted
    BBox bbox;
    int class_id = 0;               // argmax of logits
    std::vector<double> logits;
    std::vector<double> feature;
    int hidden_gt_id = -1;  // evaluation only; never read by mapping/policy/perception
};

// One detection per visible, non-dropped object. Deterministic for a fixed
// (profile, obs, rng_seed).
std::vector<Detection> detect(const DetectorProfile& profile, const FrameObservation& obs,
                              uint64_t rng_seed);

// softmax into the simplex; throws on non-finite input
std::vector<double> normalized_logits(const std::vector<double>& logits);

BBox bbox_from_mask(const std::vector<int>& mask, int width);

}  // namespace lookaround
