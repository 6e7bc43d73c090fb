#include "lookaround/reconcile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lookaround {

using json = nlohmann::json;

std::optional<std::pair<std::vector<int>, BBox>> project_instance(const Scene& scene,
                                                                  const SemanticVoxelMap& map,
                                                                  int u, const AgentPose& pose,
                                                                  const CameraModel& cam) {
    if (map.instances().find(u) == map.instances().end()) {
        throw std::runtime_error("project_instance: unknown instance " + std::to_string(u));
    }
    Vec3d origin{pose.x, pose.y, pose.camera_height};
    std::vector<int> mask;
    for (int py = 0; py < cam.height; ++py) {
        for (int px = 0; px < cam.width; ++px) {
            Vec3d dir = camera_ray_dir(pose, cam, px, py);
            bool hit_u = false;
            walk_ray(scene, origin, dir, cam.max_range,
                     [&](const Vec3i& v, double) {
                         if (scene.occ(v) == kVoxWall) return false;  // wall occludes
                         int owner = map.owner_at(v);
                         if (owner == u) {
                             hit_u = true;
                             return false;
                         }
                         return owner < 0;  // another instance occludes
                     });
            if (hit_u) mask.push_back(py * cam.width + px);
        }
    }
    if (mask.empty()) return std::nullopt;
    BBox box = bbox_from_mask(mask, cam.width);
    return std::make_pair(std::move(mask), box);
}

PseudoDataset reconcile(const Scene& scene, const SemanticVoxelMap& map,
                        const std::vector<FramePose>& frames, const CameraModel& cam,
                        const ReconcileConfig& cfg) {
    PseudoDataset out;
    for (const FramePose& fp : frames) {
        std::vector<PseudoLabel> labels;
        for (const auto& [u, rec] : map.instances()) {
            auto proj = project_instance(scene, map, u, fp.pose, cam);
            if (!proj) continue;
            if (static_cast<int>(proj->first.size()) < cfg.min_mask_pixels) continue;
            PseudoLabel pl;
            pl.frame_id = fp.frame_id;
            pl.u = u;
            pl.class_id = rec.class_id;
            pl.lambda_bar = map.aggregated_softmax(u);
            pl.mask = std::move(proj->first);
            pl.bbox = proj->second;
            labels.push_back(std::move(pl));
        }
        // frames with no labels stay in the dataset as pure-background samples
        out.entries.push_back({fp.frame_id, std::move(labels)});
    }
    return out;
}

std::vector<Triplet> mine_triplets(const PseudoDataset& dataset, const std::vector<int>& batch,
                                   Rng& rng) {
    std::vector<const PseudoLabel*> labels;
    for (int fid : batch) {
        for (const auto& [frame_id, frame_labels] : dataset.entries) {
            if (frame_id != fid) continue;
            for (const auto& pl : frame_labels) labels.push_back(&pl);
        }
    }
    std::vector<Triplet> out;
    for (const PseudoLabel* a : labels) {
        for (const PseudoLabel* p : labels) {
            if (a == p || a->u != p->u || a->frame_id == p->frame_id) continue;
            std::vector<const PseudoLabel*> negatives;
            for (const PseudoLabel* n : labels) {
                if (n->u != a->u) negatives.push_back(n);
            }
            if (negatives.empty()) continue;
            const PseudoLabel* n = negatives[rng.uniform_int(negatives.size())];
            out.push_back({{a->frame_id, a->u}, {p->frame_id, p->u}, {n->frame_id, n->u}});
        }
    }
    return out;
}

namespace {

json rle_encode(const std::vector<int>& sorted_pixels) {
    json rle = json::array();
    size_t i = 0;
    while (i < sorted_pixels.size()) {
        int start = sorted_pixels[i];
        int len = 1;
        while (i + len < sorted_pixels.size() &&
               sorted_pixels[i + len] == start + len) {
            ++len;
        }
        rle.push_back({start, len});
        i += static_cast<size_t>(len);
    }
    return rle;
}

std::vector<int> rle_decode(const json& rle) {
    std::vector<int> out;
    for (const auto& pair : rle) {
        int start = pair.at(0).get<int>();
        int len = pair.at(1).get<int>();
        for (int k = 0; k < len; ++k) out.push_back(start + k);
    }
    return out;
}

}  // namespace

std::string PseudoDataset::to_jsonl() const {
    std::ostringstream os;
    {
        json header;
        header["schema_version"] = 1;
        header["episode_seed"] = episode_seed;
        header["policy"] = policy;
        header["score_kind"] = score_kind;
        os << header.dump() << '\n';
    }
    for (const auto& [frame_id, labels] : entries) {
        json j;
        j["frame_id"] = frame_id;
        json jl = json::array();
        for (const auto& pl : labels) {
            jl.push_back({{"u", pl.u},
                          {"y", pl.class_id},
                          {"lambda_bar", pl.lambda_bar},
                          {"bbox", {pl.bbox.x_min, pl.bbox.y_min, pl.bbox.x_max, pl.bbox.y_max}},
                          {"mask", rle_encode(pl.mask)}});
        }
        j["labels"] = std::move(jl);
        os << j.dump() << '\n';
    }
    return os.str();
}

PseudoDataset PseudoDataset::from_jsonl(const std::string& text) {
    PseudoDataset out;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (first) {
            first = false;
            out.episode_seed = j.at("episode_seed").get<uint64_t>();
            out.policy = j.at("policy").get<std::string>();
            out.score_kind = j.at("score_kind").get<std::string>();
            continue;
        }
        std::vector<PseudoLabel> labels;
        for (const auto& jl : j.at("labels")) {
            PseudoLabel pl;
            pl.frame_id = j.at("frame_id").get<int>();
            pl.u = jl.at("u").get<int>();
            pl.class_id = jl.at("y").get<int>();
            pl.lambda_bar = jl.at("lambda_bar").get<std::vector<double>>();
            auto b = jl.at("bbox");
            pl.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
                       b.at(3).get<int>()};
            pl.mask = rle_decode(jl.at("mask"));
            labels.push_back(std::move(pl));
        }
        out.entries.push_back({j.at("frame_id").get<int>(), std::move(labels)});
    }
    return out;
}

}  // namespace lookaround
