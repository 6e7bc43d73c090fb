#include "lookaround/detector.hpp"

#include <algorithm>
#include <cmath>

namespace lookaround {

void DetectorProfile::validate() const {
    if (n_classes < 2) throw std::invalid_argument("DetectorProfile: n_classes < 2");
    if (confusion.size() != static_cast<size_t>(n_classes)) {
        throw std::invalid_argument("DetectorProfile: confusion row count mismatch");
    }
    for (const auto& row : confusion) {
        if (row.size() != static_cast<size_t>(n_classes)) {
            throw std::invalid_argument("DetectorProfile: confusion column count mismatch");
        }
        double sum = 0;
        for (double p : row) {
            if (p < 0) throw std::invalid_argument("DetectorProfile: negative confusion entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("DetectorProfile: confusion row does not sum to 1");
        }
    }
    if (kappa <= 0) throw std::invalid_argument("DetectorProfile: kappa must be > 0");
    if (miss_rate < 0 || miss_rate >= 1) {
        throw std::invalid_argument("DetectorProfile: miss_rate out of [0,1)");
    }
    if (feature_dim < 1) throw std::invalid_argument("DetectorProfile: feature_dim < 1");
    if (!feature_means.empty() && feature_means.size() != static_cast<size_t>(n_classes)) {
        throw std::invalid_argument("DetectorProfile: feature_means row count mismatch");
    }
}

DetectorProfile DetectorProfile::make_default(int n_classes, int feature_dim) {
    DetectorProfile p;
    p.n_classes = n_classes;
    p.feature_dim = feature_dim;
    p.confusion.assign(n_classes, std::vector<double>(n_classes, 0.0));
    for (int c = 0; c < n_classes; ++c) p.confusion[c][c] = 1.0;
    p.ensure_feature_means();
    return p;
}

void DetectorProfile::ensure_feature_means() {
    if (!feature_means.empty()) return;
    feature_means.resize(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        Rng rng(0xfeedface5eedull + 7919ull * static_cast<uint64_t>(c + 1));
        feature_means[c].resize(feature_dim);
        for (int i = 0; i < feature_dim; ++i) feature_means[c][i] = 2.0 * rng.normal();
    }
}

std::vector<double> normalized_logits(const std::vector<double>& logits) {
    return softmax(logits);  // softmax already rejects non-finite input
}

BBox bbox_from_mask(const std::vector<int>& mask, int width) {
    if (mask.empty()) throw std::invalid_argument("bbox_from_mask: empty mask");
    BBox b{INT32_MAX, INT32_MAX, INT32_MIN, INT32_MIN};
    for (int pix : mask) {
        int x = pix % width, y = pix / width;
        b.x_min = std::min(b.x_min, x);
        b.x_max = std::max(b.x_max, x);
        b.y_min = std::min(b.y_min, y);
        b.y_max = std::max(b.y_max, y);
    }
    return b;
}

std::vector<Detection> detect(const DetectorProfile& profile, const FrameObservation& obs,
                              uint64_t rng_seed) {
    profile.validate();
    const int C = profile.n_classes;
    DetectorProfile prof = profile;  // local copy so feature means can be materialized
    prof.ensure_feature_means();
    Rng rng(rng_seed ^ 0xd37ec7042ull);

    std::vector<Detection> out;
    for (const auto& [gt_id, voxels] : obs.visible) {
        // mask of pixels whose ray hit this object
        std::vector<int> mask;
        double depth_sum = 0;
        for (size_t i = 0; i < obs.rays.size(); ++i) {
            if (obs.rays[i].hit_label == gt_id) {
                mask.push_back(static_cast<int>(i));
                depth_sum += obs.rays[i].depth;
            }
        }
        if (mask.empty()) continue;
        if (prof.miss_rate > 0 && rng.u01() < prof.miss_rate) continue;

        const auto& info = obs.object_info.at(gt_id);
        double visible_fraction =
            info.total_voxels > 0
                ? static_cast<double>(voxels.size()) / static_cast<double>(info.total_voxels)
                : 0.0;
        double mean_depth = depth_sum / static_cast<double>(mask.size());
        double noise = prof.view_noise.dist_coeff * (mean_depth / std::max(obs.max_range, 1e-9)) +
                       prof.view_noise.frac_coeff * (1.0 - visible_fraction);
        double w = std::clamp(noise, 0.0, 1.0);

        // class sampled from the confusion row, washed toward uniform on bad views
        std::vector<double> row(C);
        for (int c = 0; c < C; ++c) {
            row[c] = (1.0 - w) * prof.confusion[info.class_id][c] + w / C;
        }
        int sampled = static_cast<int>(rng.discrete(row));

        Detection det;
        det.frame_id = obs.frame_id;
        det.mask = std::move(mask);
        det.bbox = bbox_from_mask(det.mask, obs.width);
        // sharpness collapses with view badness: clean views are confident
        // spikes, oblique/distant views flatten toward pure noise
        det.logits.assign(C, 0.0);
        det.logits[sampled] = prof.kappa * (1.0 - w);
        if (noise > 0) {
            for (int c = 0; c < C; ++c) det.logits[c] += noise * rng.normal();
        }
        det.class_id = argmax(det.logits);

        Rng inst_rng(0xab5e11aull + 104729ull * static_cast<uint64_t>(gt_id + 1));
        det.feature.resize(prof.feature_dim);
        for (int i = 0; i < prof.feature_dim; ++i) {
            det.feature[i] = prof.feature_means[info.class_id][i] +
                             prof.instance_offset_sigma * inst_rng.normal() +
                             prof.feature_noise_sigma * rng.normal();
        }
        det.hidden_gt_id = gt_id;
        out.push_back(std::move(det));
    }
    return out;
}

}  // namespace lookaround
