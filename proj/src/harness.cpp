#include "lookaround/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lookaround {

using json = nlohmann::json;

namespace {

int gt_class_of(const Scene& scene, int gt_id) {
    for (const auto& obj : scene.objects) {
        if (obj.gt_id == gt_id) return obj.class_id;
    }
    return -1;
}

Vec2i start_cell(const Scene& scene) {
    // deterministic start: walkable cell nearest the scene center
    Vec2i best{-1, -1};
    double best_d = std::numeric_limits<double>::infinity();
    double cx = scene.dims.x / 2.0, cy = scene.dims.y / 2.0;
    for (int y = 0; y < scene.dims.y; ++y) {
        for (int x = 0; x < scene.dims.x; ++x) {
            if (!scene.is_walkable(x, y)) continue;
            double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            if (d < best_d) {
                best_d = d;
                best = {x, y};
            }
        }
    }
    if (best.x < 0) throw std::runtime_error("run_episode: scene has no walkable cell");
    return best;
}

}  // namespace

EpisodeResult run_episode(const RunConfig& config, uint64_t seed,
                          const LearnedPolicyParams* learned) {
    EpisodeResult ep;
    ep.scene = config.scene_path ? [&] {
        std::ifstream in(*config.scene_path);
        if (!in) throw std::runtime_error("run_episode: cannot open " + *config.scene_path);
        std::stringstream ss;
        ss << in.rdbuf();
        return load_scene(ss.str());
    }() : generate_scene(config.scene, seed);
    const Scene& scene = ep.scene;
    const double vs = scene.voxel_size;

    ep.map = SemanticVoxelMap(vs);
    ep.explored = ExploredMap(scene.dims.x, scene.dims.y);
    Rng rng(seed ^ 0xe9150deull);

    Vec2i sc = start_cell(scene);
    AgentPose pose;
    pose.x = (sc.x + 0.5) * vs;
    pose.y = (sc.y + 0.5) * vs;
    pose.heading = 0;
    pose.camera_height = (scene.head_voxels - 0.5) * vs;

    LearnedPolicyParams default_params;
    const LearnedPolicyParams& policy_params = learned ? *learned : default_params;

    int frame_id = 0;
    auto process_frame = [&](FrameObservation&& obs) {
        obs.frame_id = frame_id;
        std::vector<Detection> dets =
            detect(config.detector, obs, seed * 1000003ull + static_cast<uint64_t>(frame_id));
        std::vector<EpisodeDetection> eds;
        eds.reserve(dets.size());
        for (auto& det : dets) {
            EpisodeDetection ed;
            ed.hit_voxels.reserve(det.mask.size());
            for (int pix : det.mask) {
                const RayHit& hit = obs.rays[static_cast<size_t>(pix)];
                if (hit.depth < 0) continue;
                ed.hit_voxels.push_back({static_cast<int>(std::floor(hit.point.x / vs)),
                                         static_cast<int>(std::floor(hit.point.y / vs)),
                                         static_cast<int>(std::floor(hit.point.z / vs))});
            }
            ep.map.insert_detection(det, obs);
            ed.det = std::move(det);
            eds.push_back(std::move(ed));
        }
        ep.explored.update(obs);
        ep.frames.push_back({frame_id, obs.pose});
        ep.detections.push_back(std::move(eds));
        ++frame_id;
    };

    process_frame(raycast_frame(scene, pose, config.camera));

    std::ostringstream traj;
    const double extent = std::max(scene.dims.x, scene.dims.y) * vs;
    int executed = 0, decision = 0;
    while (executed < config.steps) {
        ep.map.resolve_instances();
        DisagreementMap H = build_disagreement_map(ep.map, config.score, config.map_k, extent);
        PolicyInput input = assemble_policy_input(H, ep.explored, pose);

        GoalAction goal;
        switch (config.policy) {
            case PolicyKind::Random:
                goal = random_goal(ep.explored, vs, rng);
                break;
            case PolicyKind::Frontier: {
                auto g = frontier_goal(ep.explored, pose, vs);
                if (!g) {
                    ep.exploration_complete = true;
                }
                if (ep.exploration_complete) break;
                goal = *g;
                break;
            }
            case PolicyKind::Greedy:
                goal = greedy_disagreement_goal(H, ep.explored, pose, vs, {}, rng);
                break;
            case PolicyKind::Learned: {
                std::vector<Vec2i> candidates =
                    sample_candidates(ep.explored, config.n_candidates, rng);
                goal = learned_goal(policy_params, input, ep.explored, candidates, vs, rng).goal;
                break;
            }
        }
        if (ep.exploration_complete) break;

        NavGraph graph = build_nav_graph(ep.explored);
        Vec2i agent{static_cast<int>(std::floor(pose.x / vs)),
                    static_cast<int>(std::floor(pose.y / vs))};
        // the agent's own cell is traversable even if a stray ray marked it
        graph.free_cell[graph.idx(agent.x, agent.y)] = 1;
        Vec2i snapped = snap_goal(graph, goal.x / vs - 0.5, goal.y / vs - 0.5, agent);
        PathResult path = astar(graph, agent, snapped);

        FollowResult fr = follow(scene, pose, path.nodes, config.n_replanning, config.camera,
                                 frame_id);
        for (auto& obs : fr.frames) process_frame(std::move(obs));
        pose = fr.pose;
        if (fr.frames.empty()) {
            // the goal was the agent's own cell (its feet can be a frontier
            // when the cells behind it are unseen): turn in place and look
            pose.heading = normalize_angle(pose.heading + M_PI / 2.0);
            process_frame(raycast_frame(scene, pose, config.camera));
        }
        executed += std::max<int>(1, static_cast<int>(fr.frames.size()));

        // disagreement mass around the chosen goal at decision time: how much
        // currently-measured disagreement the policy steered toward
        double goal_h = 0;
        {
            int hi = std::clamp(static_cast<int>(std::floor((snapped.x + 0.5) * vs / H.cell_size)),
                                0, H.K - 1);
            int hj = std::clamp(static_cast<int>(std::floor((snapped.y + 0.5) * vs / H.cell_size)),
                                0, H.K - 1);
            for (int j = std::max(0, hj - 2); j <= std::min(H.K - 1, hj + 2); ++j) {
                for (int i = std::max(0, hi - 2); i <= std::min(H.K - 1, hi + 2); ++i) {
                    goal_h += H.at(i, j);
                }
            }
        }

        json rec;
        rec["step"] = decision++;
        rec["goal"] = {goal.x, goal.y};
        rec["snapped"] = {snapped.x, snapped.y};
        rec["path_cost"] = path.cost;
        rec["replan"] = fr.replan;
        rec["goal_h"] = goal_h;
        traj << rec.dump() << '\n';
    }
    ep.trajectory_log = traj.str();
    ep.map.resolve_instances();
    ep.total_disagreement = total_score(ep.map, config.score);
    ep.final_pose = pose;

    ep.pseudo = reconcile(scene, ep.map, ep.frames, config.camera, config.reconcile);
    ep.pseudo.episode_seed = seed;
    ep.pseudo.policy = to_string(config.policy);
    ep.pseudo.score_kind = to_string(config.score);
    return ep;
}

double iou(const BBox& a, const BBox& b) {
    if (a.x_min > a.x_max || a.y_min > a.y_max || b.x_min > b.x_max || b.y_min > b.y_max) {
        throw std::invalid_argument("iou: invalid box");
    }
    double area_a = static_cast<double>(a.x_max - a.x_min) * (a.y_max - a.y_min);
    double area_b = static_cast<double>(b.x_max - b.x_min) * (b.y_max - b.y_min);
    if (area_a <= 0 && area_b <= 0) return a == b ? 1.0 : 0.0;
    double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0 || iy <= 0) return 0.0;
    double inter = ix * iy;
    return inter / (area_a + area_b - inter);
}

double evaluate_map50(const std::vector<EvalBox>& predictions, const std::vector<EvalBox>& gt,
                      double iou_threshold) {
    if (gt.empty()) throw std::runtime_error("evaluate_map50: no ground truth");
    std::vector<int> classes;
    for (const auto& g : gt) classes.push_back(g.class_id);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    double ap_sum = 0;
    for (int cls : classes) {
        std::vector<const EvalBox*> cls_gt, cls_pred;
        for (const auto& g : gt) {
            if (g.class_id == cls) cls_gt.push_back(&g);
        }
        for (const auto& p : predictions) {
            if (p.class_id == cls) cls_pred.push_back(&p);
        }
        std::stable_sort(cls_pred.begin(), cls_pred.end(),
                         [](const EvalBox* a, const EvalBox* b) { return a->score > b->score; });

        std::vector<uint8_t> gt_used(cls_gt.size(), 0);
        std::vector<uint8_t> tp(cls_pred.size(), 0);
        for (size_t i = 0; i < cls_pred.size(); ++i) {
            double best = iou_threshold;
            int best_j = -1;
            for (size_t j = 0; j < cls_gt.size(); ++j) {
                if (gt_used[j] || cls_gt[j]->frame_id != cls_pred[i]->frame_id) continue;
                double v = iou(cls_pred[i]->box, cls_gt[j]->box);
                if (v >= best && (best_j < 0 || v > best)) {
                    best = v;
                    best_j = static_cast<int>(j);
                }
            }
            if (best_j >= 0) {
                gt_used[best_j] = 1;
                tp[i] = 1;
            }
        }
        // precision-recall with all-point interpolation
        size_t cum_tp = 0;
        std::vector<double> precision(cls_pred.size()), recall(cls_pred.size());
        for (size_t i = 0; i < cls_pred.size(); ++i) {
            cum_tp += tp[i];
            precision[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
            recall[i] = static_cast<double>(cum_tp) / static_cast<double>(cls_gt.size());
        }
        for (size_t i = precision.size(); i-- > 1;) {
            precision[i - 1] = std::max(precision[i - 1], precision[i]);
        }
        double ap = 0, prev_recall = 0;
        for (size_t i = 0; i < cls_pred.size(); ++i) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
        ap_sum += ap;
    }
    return ap_sum / static_cast<double>(classes.size());
}

std::optional<std::pair<std::vector<int>, BBox>> project_gt_object(const Scene& scene, int gt_id,
                                                                   const AgentPose& pose,
                                                                   const CameraModel& cam) {
    Vec3d origin{pose.x, pose.y, pose.camera_height};
    std::vector<int> mask;
    for (int py = 0; py < cam.height; ++py) {
        for (int px = 0; px < cam.width; ++px) {
            Vec3d dir = camera_ray_dir(pose, cam, px, py);
            bool hit = false;
            walk_ray(scene, origin, dir, cam.max_range,
                     [&](const Vec3i& v, double) {
                         int32_t lab = scene.label_at(v);
                         if (lab == kLabelFree) return true;
                         hit = (lab == gt_id);
                         return false;
                     });
            if (hit) mask.push_back(py * cam.width + px);
        }
    }
    if (mask.empty()) return std::nullopt;
    BBox box = bbox_from_mask(mask, cam.width);
    return std::make_pair(std::move(mask), box);
}

std::vector<EvalBox> gt_boxes_for_frames(const Scene& scene, const std::vector<FramePose>& frames,
                                         const CameraModel& cam, int min_mask_pixels) {
    std::vector<EvalBox> out;
    for (const auto& fp : frames) {
        for (const auto& obj : scene.objects) {
            auto proj = project_gt_object(scene, obj.gt_id, fp.pose, cam);
            if (!proj || static_cast<int>(proj->first.size()) < min_mask_pixels) continue;
            out.push_back({fp.frame_id, obj.class_id, proj->second, 1.0});
        }
    }
    return out;
}

int match_instance_to_gt(const Scene& scene, const InstanceRecord& rec) {
    std::map<int, size_t> votes;
    for (const Vec3i& v : rec.voxels) {
        if (!scene.in_bounds(v)) continue;
        int32_t lab = scene.label_at(v);
        if (lab >= 0) ++votes[lab];
    }
    int best = -1;
    size_t best_n = 0;
    for (const auto& [gt, n] : votes) {
        if (n > best_n) {  // map order: ties go to the lowest gt id
            best_n = n;
            best = gt;
        }
    }
    return best;
}

int match_detection_to_instance(const SemanticVoxelMap& map, const EpisodeDetection& det) {
    std::map<int, size_t> votes;
    for (const Vec3i& v : det.hit_voxels) {
        int u = map.owner_at(v);
        if (u >= 0) ++votes[u];
    }
    int best = -1;
    size_t best_n = 0;
    for (const auto& [u, n] : votes) {
        if (n > best_n) {
            best_n = n;
            best = u;
        }
    }
    return best;
}

LabelAccuracy label_accuracy(const EpisodeResult& ep) {
    LabelAccuracy acc;
    size_t raw_correct = 0;
    for (const auto& frame : ep.detections) {
        for (const auto& ed : frame) {
            int cls = gt_class_of(ep.scene, ed.det.hidden_gt_id);
            if (cls < 0) continue;
            ++acc.n_raw;
            if (ed.det.class_id == cls) ++raw_correct;
        }
    }
    size_t rec_correct = 0;
    for (const auto& [frame_id, labels] : ep.pseudo.entries) {
        for (const auto& pl : labels) {
            ++acc.n_reconciled;
            const auto& rec = ep.map.instances().at(pl.u);
            int gt = match_instance_to_gt(ep.scene, rec);
            if (gt >= 0 && gt_class_of(ep.scene, gt) == pl.class_id) ++rec_correct;
        }
    }
    acc.raw = acc.n_raw ? static_cast<double>(raw_correct) / acc.n_raw : 0.0;
    acc.reconciled = acc.n_reconciled ? static_cast<double>(rec_correct) / acc.n_reconciled : 0.0;
    return acc;
}

std::vector<TrainSample> build_train_samples(const EpisodeResult& ep, bool raw_mode) {
    std::vector<TrainSample> out;
    for (const auto& frame : ep.detections) {
        for (const auto& ed : frame) {
            int u = match_detection_to_instance(ep.map, ed);
            if (u < 0) continue;
            TrainSample s;
            s.feature = ed.det.feature;
            s.u = u;
            if (raw_mode) {
                s.label = ed.det.class_id;
                s.soft_target = softmax(ed.det.logits);
            } else {
                s.label = ep.map.instances().at(u).class_id;
                s.soft_target = ep.map.aggregated_softmax(u);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<TrainSample> build_holdout(const RunConfig& config, uint64_t seed) {
    int n_scenes = std::max(1, static_cast<int>(std::lround(config.eval.holdout_fraction * 8)));
    std::vector<TrainSample> out;
    for (int s = 0; s < n_scenes; ++s) {
        uint64_t scene_seed = seed * 7919ull + 10007ull + static_cast<uint64_t>(s);
        Scene scene = generate_scene(config.scene, scene_seed);
        Rng rng(scene_seed ^ 0x401d0u);
        std::vector<Vec2i> cells;
        for (int y = 0; y < scene.dims.y; ++y) {
            for (int x = 0; x < scene.dims.x; ++x) {
                if (scene.is_walkable(x, y)) cells.push_back({x, y});
            }
        }
        if (cells.empty()) continue;
        for (int k = 0; k < config.eval.holdout_poses; ++k) {
            const Vec2i& c = cells[rng.uniform_int(cells.size())];
            AgentPose pose;
            pose.x = (c.x + 0.5) * scene.voxel_size;
            pose.y = (c.y + 0.5) * scene.voxel_size;
            pose.heading = rng.u01() * 2.0 * M_PI;
            pose.camera_height = (scene.head_voxels - 0.5) * scene.voxel_size;
            FrameObservation obs = raycast_frame(scene, pose, config.camera);
            obs.frame_id = k;
            std::vector<Detection> dets =
                detect(config.detector, obs, scene_seed * 31ull + static_cast<uint64_t>(k));
            for (const auto& det : dets) {
                int cls = gt_class_of(scene, det.hidden_gt_id);
                if (cls < 0) continue;
                TrainSample ts;
                ts.feature = det.feature;
                ts.label = cls;
                ts.soft_target.assign(config.detector.n_classes, 0.0);
                ts.soft_target[cls] = 1.0;
                ts.u = -1;
                out.push_back(std::move(ts));
            }
        }
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MetricsFragment run_pipeline(const RunConfig& config, uint64_t seed,
                             const LearnedPolicyParams* learned) {
    EpisodeResult ep = run_episode(config, seed, learned);
    MetricsFragment frag;
    frag.seed = seed;

    LabelAccuracy acc = label_accuracy(ep);
    frag.values["raw_label_accuracy"] = acc.raw;
    frag.values["reconciled_label_accuracy"] = acc.reconciled;
    frag.values["total_disagreement"] = ep.total_disagreement;
    frag.values["explored_fraction"] = ep.explored.explored_fraction();
    frag.values["n_frames"] = static_cast<double>(ep.frames.size());

    std::vector<EvalBox> pred_raw, pred_rec;
    size_t n_det = 0;
    for (const auto& frame : ep.detections) {
        for (const auto& ed : frame) {
            ++n_det;
            std::vector<double> p = softmax(ed.det.logits);
            pred_raw.push_back({ed.det.frame_id, ed.det.class_id, ed.det.bbox, p[argmax(p)]});
        }
    }
    size_t n_pl = 0;
    for (const auto& [frame_id, labels] : ep.pseudo.entries) {
        for (const auto& pl : labels) {
            ++n_pl;
            pred_rec.push_back(
                {frame_id, pl.class_id, pl.bbox, pl.lambda_bar[argmax(pl.lambda_bar)]});
        }
    }
    frag.values["n_detections"] = static_cast<double>(n_det);
    frag.values["n_pseudo_labels"] = static_cast<double>(n_pl);

    std::vector<EvalBox> gt = gt_boxes_for_frames(ep.scene, ep.frames, config.camera);
    if (!gt.empty()) {
        frag.values["map50_raw"] = evaluate_map50(pred_raw, gt, config.eval.iou_threshold);
        frag.values["map50_reconciled"] = evaluate_map50(pred_rec, gt, config.eval.iou_threshold);
    }

    std::vector<TrainSample> holdout = build_holdout(config, seed);
    if (!holdout.empty()) {
        HeadParams head0 = HeadParams::init(config.detector.feature_dim, config.detector.n_classes,
                                            8, seed, config.head);
        frag.values["head_accuracy_untrained"] = evaluate_head(head0, holdout).accuracy;
        std::vector<TrainSample> rec_samples = build_train_samples(ep, false);
        std::vector<TrainSample> raw_samples = build_train_samples(ep, true);
        if (!rec_samples.empty()) {
            TrainResult tr = train(head0, rec_samples);
            frag.values["head_accuracy_reconciled"] = evaluate_head(tr.params, holdout).accuracy;
        }
        if (!raw_samples.empty()) {
            TrainResult tr = train(head0, raw_samples);
            frag.values["head_accuracy_raw"] = evaluate_head(tr.params, holdout).accuracy;
        }
    }
    return frag;
}

MetricsReport ablate(const RunConfig& config, AblationAxis axis,
                     const std::vector<std::string>& values) {
    if (values.empty()) throw std::invalid_argument("ablate: no values");
    std::vector<MetricsFragment> fragments;
    for (const std::string& value : values) {
        RunConfig cfg = config;
        switch (axis) {
            case AblationAxis::Score: cfg.score = score_kind_from_string(value); break;
            case AblationAxis::Alpha: cfg.head.alpha = std::stod(value); break;
            case AblationAxis::Policy: cfg.policy = policy_kind_from_string(value); break;
        }
        for (uint64_t seed : config.seeds) {
            MetricsFragment frag;
            try {
                frag = run_pipeline(cfg, seed);
            } catch (const std::exception& e) {
                frag.seed = seed;
                frag.values["failed"] = 1.0;
            }
            frag.axis_value = value;
            fragments.push_back(std::move(frag));
        }
    }
    return report(fragments);
}

MetricsReport report(const std::vector<MetricsFragment>& fragments) {
    if (fragments.empty()) throw std::invalid_argument("report: no fragments");
    MetricsReport rep;
    rep.fragments = fragments;
    std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
    for (const auto& frag : fragments) {
        for (const auto& [k, v] : frag.values) grouped[frag.axis_value][k].push_back(v);
    }
    for (const auto& [axis, fields] : grouped) {
        for (const auto& [k, vals] : fields) {
            double mean = 0;
            for (double v : vals) mean += v;
            rep.aggregate_mean[axis][k] = mean / static_cast<double>(vals.size());
            rep.aggregate_median[axis][k] = median(vals);
        }
    }
    return rep;
}

std::string MetricsReport::to_json_text() const {
    json j;
    j["schema_version"] = 1;
    j["ap_interpolation"] = "all-point";
    json frags = json::array();
    for (const auto& f : fragments) {
        frags.push_back({{"seed", f.seed}, {"axis_value", f.axis_value}, {"values", f.values}});
    }
    j["fragments"] = std::move(frags);
    j["aggregate_mean"] = aggregate_mean;
    j["aggregate_median"] = aggregate_median;
    return j.dump(2);
}

std::string MetricsReport::to_csv() const {
    // union of field names, sorted, one row per (axis value, seed)
    std::vector<std::string> fields;
    for (const auto& f : fragments) {
        for (const auto& [k, v] : f.values) fields.push_back(k);
    }
    std::sort(fields.begin(), fields.end());
    fields.erase(std::unique(fields.begin(), fields.end()), fields.end());

    std::ostringstream os;
    os << "axis_value,seed";
    for (const auto& k : fields) os << ',' << k;
    os << '\n';
    for (const auto& f : fragments) {
        os << f.axis_value << ',' << f.seed;
        for (const auto& k : fields) {
            os << ',';
            auto it = f.values.find(k);
            if (it != f.values.end()) os << it->second;
        }
        os << '\n';
    }
    return os.str();
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunConfig c;
    if (j.contains("scene")) {
        const auto& s = j["scene"];
        if (s.contains("path")) {
            c.scene_path = s["path"].get<std::string>();
        }
        if (s.contains("dims")) {
            c.scene.dims = {s["dims"].at(0).get<int>(), s["dims"].at(1).get<int>(),
                            s["dims"].at(2).get<int>()};
        }
        if (s.contains("voxel_size")) c.scene.voxel_size = s["voxel_size"].get<double>();
        if (s.contains("n_classes")) c.scene.n_classes = s["n_classes"].get<int>();
        if (s.contains("n_objects")) c.scene.n_objects = s["n_objects"].get<int>();
        if (s.contains("n_wall_segments")) c.scene.n_wall_segments = s["n_wall_segments"].get<int>();
        if (s.contains("head_voxels")) c.scene.head_voxels = s["head_voxels"].get<int>();
    }
    c.detector = DetectorProfile::make_default(c.scene.n_classes);
    if (j.contains("detector")) {
        const auto& d = j["detector"];
        if (d.contains("n_classes")) c.detector.n_classes = d["n_classes"].get<int>();
        if (d.contains("confusion")) {
            c.detector.confusion = d["confusion"].get<std::vector<std::vector<double>>>();
        } else if (c.detector.n_classes != static_cast<int>(c.detector.confusion.size())) {
            c.detector = DetectorProfile::make_default(c.detector.n_classes);
        }
        if (d.contains("kappa")) c.detector.kappa = d["kappa"].get<double>();
        if (d.contains("miss_rate")) c.detector.miss_rate = d["miss_rate"].get<double>();
        if (d.contains("feature_dim")) {
            c.detector.feature_dim = d["feature_dim"].get<int>();
            c.detector.feature_means.clear();
        }
        if (d.contains("feature_noise_sigma")) {
            c.detector.feature_noise_sigma = d["feature_noise_sigma"].get<double>();
        }
        if (d.contains("view_noise")) {
            c.detector.view_noise.dist_coeff = d["view_noise"].value("dist_coeff", 0.0);
            c.detector.view_noise.frac_coeff = d["view_noise"].value("frac_coeff", 0.0);
        }
        c.detector.ensure_feature_means();
        c.detector.validate();
    }
    if (j.contains("policy")) c.policy = policy_kind_from_string(j["policy"].get<std::string>());
    if (j.contains("score")) c.score = score_kind_from_string(j["score"].get<std::string>());
    if (j.contains("steps")) c.steps = j["steps"].get<int>();
    if (j.contains("n_replanning")) c.n_replanning = j["n_replanning"].get<int>();
    if (j.contains("map_k")) c.map_k = j["map_k"].get<int>();
    if (j.contains("n_candidates")) c.n_candidates = j["n_candidates"].get<int>();
    if (j.contains("camera")) {
        const auto& cam = j["camera"];
        if (cam.contains("width")) c.camera.width = cam["width"].get<int>();
        if (cam.contains("height")) c.camera.height = cam["height"].get<int>();
        if (cam.contains("hfov_deg")) c.camera.hfov = cam["hfov_deg"].get<double>() * M_PI / 180.0;
        if (cam.contains("vfov_deg")) c.camera.vfov = cam["vfov_deg"].get<double>() * M_PI / 180.0;
        if (cam.contains("max_range")) c.camera.max_range = cam["max_range"].get<double>();
    }
    if (j.contains("reconcile")) {
        c.reconcile.min_mask_pixels = j["reconcile"].value("min_mask_pixels", 3);
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<uint64_t>>();
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        if (e.contains("iou_threshold")) c.eval.iou_threshold = e["iou_threshold"].get<double>();
        if (e.contains("holdout_fraction")) {
            c.eval.holdout_fraction = e["holdout_fraction"].get<double>();
        }
        if (e.contains("holdout_poses")) c.eval.holdout_poses = e["holdout_poses"].get<int>();
    }
    if (j.contains("head")) {
        const auto& h = j["head"];
        if (h.contains("alpha")) c.head.alpha = h["alpha"].get<double>();
        if (h.contains("margin")) c.head.margin = h["margin"].get<double>();
        if (h.contains("lr")) c.head.lr = h["lr"].get<double>();
        if (h.contains("momentum")) c.head.momentum = h["momentum"].get<double>();
        if (h.contains("weight_decay")) c.head.weight_decay = h["weight_decay"].get<double>();
        if (h.contains("epochs")) c.head.epochs = h["epochs"].get<int>();
        if (h.contains("batch_size")) c.head.batch_size = h["batch_size"].get<int>();
    }
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    if (c.steps <= 0) throw std::invalid_argument("RunConfig: steps must be > 0");
    if (c.eval.iou_threshold <= 0 || c.eval.iou_threshold >= 1) {
        throw std::invalid_argument("RunConfig: iou_threshold out of (0,1)");
    }
    return c;
}

std::string RunConfig::to_json_text() const {
    json j;
    j["schema_version"] = 1;
    j["scene"] = {{"dims", {scene.dims.x, scene.dims.y, scene.dims.z}},
                  {"voxel_size", scene.voxel_size},
                  {"n_classes", scene.n_classes},
                  {"n_objects", scene.n_objects},
                  {"n_wall_segments", scene.n_wall_segments},
                  {"head_voxels", scene.head_voxels}};
    if (scene_path) j["scene"]["path"] = *scene_path;
    j["detector"] = {{"n_classes", detector.n_classes},
                     {"confusion", detector.confusion},
                     {"kappa", detector.kappa},
                     {"miss_rate", detector.miss_rate},
                     {"feature_dim", detector.feature_dim},
                     {"feature_noise_sigma", detector.feature_noise_sigma},
                     {"view_noise",
                      {{"dist_coeff", detector.view_noise.dist_coeff},
                       {"frac_coeff", detector.view_noise.frac_coeff}}}};
    j["policy"] = to_string(policy);
    j["score"] = to_string(score);
    j["steps"] = steps;
    j["n_replanning"] = n_replanning;
    j["map_k"] = map_k;
    j["n_candidates"] = n_candidates;
    j["camera"] = {{"width", camera.width},
                   {"height", camera.height},
                   {"hfov_deg", camera.hfov * 180.0 / M_PI},
                   {"vfov_deg", camera.vfov * 180.0 / M_PI},
                   {"max_range", camera.max_range}};
    j["reconcile"] = {{"min_mask_pixels", reconcile.min_mask_pixels}};
    j["seeds"] = seeds;
    j["eval"] = {{"iou_threshold", eval.iou_threshold},
                 {"holdout_fraction", eval.holdout_fraction},
                 {"holdout_poses", eval.holdout_poses}};
    j["head"] = {{"alpha", head.alpha},     {"margin", head.margin},
                 {"lr", head.lr},           {"momentum", head.momentum},
                 {"weight_decay", head.weight_decay}, {"epochs", head.epochs},
                 {"batch_size", head.batch_size}};
    j["out"] = out_dir;
    return j.dump(2);
}

}  // namespace lookaround
