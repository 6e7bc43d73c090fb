// Acceptance suite for the exploration / consensus-labeling pipeline.
//
// Six end-to-end checks, each printed as a single [PASS]/[FAIL] line with the
// measured numbers. The process exits nonzero if any check fails. Oracles are
// the independent reimplementations from test_util.hpp plus local ones; none
// of them reuse the library's internal algorithms.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "test_util.hpp"

using namespace lookaround;
using namespace testutil;

namespace {

int g_failures = 0;

double now_s() { return static_cast<double>(clock()) / CLOCKS_PER_SEC; }

void verdict(bool ok, const char* name, const std::string& detail, double secs) {
    if (!ok) ++g_failures;
    std::printf("[%s] %s: %s (%.1fs)\n", ok ? "PASS" : "FAIL", name, detail.c_str(), secs);
    std::fflush(stdout);
}

// ---- shared helpers -------------------------------------------------------

FrameObservation make_obs(int frame_id, const std::vector<Vec3d>& points) {
    FrameObservation obs;
    obs.frame_id = frame_id;
    obs.width = static_cast<int>(points.size());
    obs.height = 1;
    obs.rays.resize(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        obs.rays[i].depth = 1.0;
        obs.rays[i].point = points[i];
    }
    return obs;
}

void insert_at(SemanticVoxelMap& m, int frame_id, const Vec3i& v, std::vector<double> logits) {
    Vec3d p{(v.x + 0.5) * 0.05, (v.y + 0.5) * 0.05, (v.z + 0.5) * 0.05};
    FrameObservation obs = make_obs(frame_id, {p});
    Detection d;
    d.frame_id = frame_id;
    d.mask = {0};
    d.logits = std::move(logits);
    d.class_id = static_cast<int>(argmax(d.logits));
    m.insert_detection(d, obs);
}

SemanticVoxelMap random_voxel_map(Rng& rng, int side, int n_classes, int n_inserts) {
    SemanticVoxelMap m(0.05);
    for (int i = 0; i < n_inserts; ++i) {
        Vec3i v{static_cast<int>(rng.uniform_int(side)), static_cast<int>(rng.uniform_int(side)),
                static_cast<int>(rng.uniform_int(side))};
        std::vector<double> l(n_classes);
        for (double& x : l) x = rng.normal() * 2.5;
        insert_at(m, i, v, std::move(l));
    }
    m.resolve_instances();
    return m;
}

DetectorProfile flip_profile(int C, double flip_mass, double dist_coeff, double frac_coeff,
                             double kappa, double feature_noise = 0.1) {
    DetectorProfile p = DetectorProfile::make_default(C);
    for (int c = 0; c < C; ++c) {
        for (int k = 0; k < C; ++k) {
            p.confusion[c][k] = (k == c) ? 1.0 - flip_mass : flip_mass / (C - 1);
        }
    }
    p.view_noise = {dist_coeff, frac_coeff};
    p.kappa = kappa;
    p.feature_noise_sigma = feature_noise;
    return p;
}

int class_of(const Scene& s, int gt_id) {
    for (const auto& o : s.objects) {
        if (o.gt_id == gt_id) return o.class_id;
    }
    return -1;
}

// Scripted multi-view observation protocol: per object, one close pose per
// azimuth quadrant (annulus widened if the quadrant is cramped) plus n_far
// distant poses. Poses require line of sight to the object centroid and are
// scored to prefer spots isolated from other objects, so distant incidental
// views stay low-quality. Returns a minimal episode for reconciliation and
// sample building.
EpisodeResult scripted_episode(const SceneGenConfig& sc, const DetectorProfile& prof,
                               const CameraModel& cam, int min_mask_pixels, int n_far,
                               uint64_t seed, std::map<int, int>* planned_views = nullptr) {
    const double cam_h = 0.3;
    Scene s = generate_scene(sc, seed);
    double vs = s.voxel_size;
    EpisodeResult ep;
    ep.scene = s;
    ep.map = SemanticVoxelMap(vs);

    std::vector<Vec3d> cents;
    for (const auto& obj : s.objects) {
        double cx = 0, cy = 0, cz = 0;
        for (const auto& v : obj.voxels) {
            cx += (v.x + 0.5) * vs;
            cy += (v.y + 0.5) * vs;
            cz += (v.z + 0.5) * vs;
        }
        double n = static_cast<double>(obj.voxels.size());
        cents.push_back({cx / n, cy / n, cz / n});
    }

    std::vector<AgentPose> poses;
    for (size_t oi = 0; oi < s.objects.size(); ++oi) {
        const auto& obj = s.objects[oi];
        double cx = cents[oi].x, cy = cents[oi].y, czv = cents[oi].z;
        auto los_ok = [&](double px, double py) {
            Vec3d o{px, py, cam_h};
            double len = std::sqrt((cx - px) * (cx - px) + (cy - py) * (cy - py) +
                                   (czv - cam_h) * (czv - cam_h));
            Vec3d dir{(cx - px) / len, (cy - py) / len, (czv - cam_h) / len};
            bool ok = false;
            walk_ray(s, o, dir, len + 0.2, [&](const Vec3i& v, double) {
                int32_t lab = s.label_at(v);
                if (lab == kLabelFree) return true;
                ok = (lab == obj.gt_id);
                return false;
            });
            return ok;
        };
        auto isolation = [&](double px, double py) {
            double m = 1e18;
            for (size_t k = 0; k < cents.size(); ++k) {
                if (k == oi) continue;
                m = std::min(m, std::hypot(px - cents[k].x, py - cents[k].y));
            }
            return m;
        };
        auto plant = [&](double lo, double hi, int quad_req) {
            Vec2i best{-1, -1};
            double best_score = -1;
            for (int y = 0; y < s.dims.y; ++y) {
                for (int x = 0; x < s.dims.x; ++x) {
                    if (!s.is_walkable(x, y)) continue;
                    double px = (x + 0.5) * vs, py = (y + 0.5) * vs;
                    double d = std::hypot(px - cx, py - cy);
                    if (d < lo || d > hi) continue;
                    if (quad_req >= 0) {
                        double az = std::atan2(py - cy, px - cx);
                        int quad = static_cast<int>(std::floor((az + M_PI) / (M_PI / 2.0)));
                        if (quad > 3) quad = 3;
                        if (quad != quad_req) continue;
                    }
                    double score = isolation(px, py) - 0.15 * d;
                    if (score <= best_score) continue;
                    if (los_ok(px, py)) {
                        best_score = score;
                        best = {x, y};
                    }
                }
            }
            if (best.x < 0) return false;
            AgentPose p;
            p.x = (best.x + 0.5) * vs;
            p.y = (best.y + 0.5) * vs;
            p.heading = normalize_angle(std::atan2(cy - p.y, cx - p.x));
            p.camera_height = cam_h;
            poses.push_back(p);
            if (planned_views) (*planned_views)[obj.gt_id]++;
            return true;
        };
        for (int q = 0; q < 4; ++q) {
            if (!plant(0.4, 1.0, q)) plant(0.4, 1.6, q);
        }
        const std::pair<double, double> far_buckets[9] = {
            {2.0, 2.6}, {2.6, 3.2}, {3.2, 3.8}, {1.7, 2.3}, {2.9, 3.5},
            {3.5, 4.1}, {2.3, 2.9}, {3.1, 3.7}, {1.9, 2.5}};
        for (int b = 0; b < n_far; ++b) plant(far_buckets[b].first, far_buckets[b].second, -1);
    }

    int fid = 0;
    for (const auto& pose : poses) {
        FrameObservation obs = raycast_frame(s, pose, cam);
        obs.frame_id = fid;
        std::vector<EpisodeDetection> eds;
        for (auto& d : detect(prof, obs, seed * 9176ull + fid)) {
            d.frame_id = fid;
            EpisodeDetection ed;
            for (int pix : d.mask) {
                const RayHit& hit = obs.rays[static_cast<size_t>(pix)];
                if (hit.depth < 0) continue;
                ed.hit_voxels.push_back({static_cast<int>(std::floor(hit.point.x / vs)),
                                         static_cast<int>(std::floor(hit.point.y / vs)),
                                         static_cast<int>(std::floor(hit.point.z / vs))});
            }
            ep.map.insert_detection(d, obs);
            ed.det = std::move(d);
            eds.push_back(std::move(ed));
        }
        ep.frames.push_back({fid, pose});
        ep.detections.push_back(std::move(eds));
        ++fid;
    }
    ep.map.resolve_instances();
    ReconcileConfig rc;
    rc.min_mask_pixels = min_mask_pixels;
    ep.pseudo = reconcile(s, ep.map, ep.frames, cam, rc);
    return ep;
}

// ---- criterion 1: algorithmic oracles -------------------------------------

bool criterion_oracles(std::string& detail) {
    Rng rng(42);

    // instance partition vs flood fill over the hard-label field
    int maps_ok = 0;
    for (int t = 0; t < 100; ++t) {
        int side = 6 + static_cast<int>(rng.uniform_int(15));  // up to 20 per axis
        int n_classes = 2 + static_cast<int>(rng.uniform_int(5));
        int n_inserts = 30 + static_cast<int>(rng.uniform_int(171));
        SemanticVoxelMap m = random_voxel_map(rng, side, n_classes, n_inserts);
        std::vector<std::vector<Vec3i>> parts;
        for (const auto& [u, rec] : m.instances()) parts.push_back(rec.voxels);
        std::sort(parts.begin(), parts.end());
        std::map<Vec3i, int> labels;
        for (const auto& [v, cell] : m.cells()) labels[v] = cell.hard_label;
        if (flood_fill_components(labels) == parts) ++maps_ok;
    }

    // A* vs Dijkstra on random occupancy grids, connected and disconnected
    int astar_ok = 0, n_connected = 0, n_disconnected = 0;
    for (int t = 0; t < 200; ++t) {
        int nx = 6 + static_cast<int>(rng.uniform_int(19));
        int ny = 6 + static_cast<int>(rng.uniform_int(19));
        ExploredMap M(nx, ny);
        for (auto& c : M.state) {
            double r = rng.u01();
            c = r < 0.32 ? CellState::Obstacle : (r < 0.40 ? CellState::Unknown : CellState::Free);
        }
        NavGraph g = build_nav_graph(M);
        std::vector<Vec2i> nodes;
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                if (g.is_node(x, y)) nodes.push_back({x, y});
            }
        }
        if (nodes.size() < 2) {
            --t;
            continue;
        }
        Vec2i start = nodes[rng.uniform_int(nodes.size())];
        Vec2i goal = nodes[rng.uniform_int(nodes.size())];
        double want = dijkstra_cost(g, start, goal);
        if (std::isinf(want)) {
            ++n_disconnected;
            try {
                astar(g, start, goal);
            } catch (const std::exception&) {
                ++astar_ok;
            }
        } else {
            ++n_connected;
            PathResult pr = astar(g, start, goal);
            bool ends = !pr.nodes.empty() && pr.nodes.front() == start && pr.nodes.back() == goal;
            if (ends && std::abs(pr.cost - want) <= 1e-9) ++astar_ok;
        }
    }

    // detection mAP vs the brute-force evaluator
    int map_ok = 0;
    double worst_map_err = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<EvalBox> gt, pred;
        int n_gt = 1 + static_cast<int>(rng.uniform_int(10));
        for (int i = 0; i < n_gt; ++i) {
            int x = static_cast<int>(rng.uniform_int(40));
            int y = static_cast<int>(rng.uniform_int(40));
            int w = 4 + static_cast<int>(rng.uniform_int(14));
            int h = 4 + static_cast<int>(rng.uniform_int(14));
            int cls = static_cast<int>(rng.uniform_int(3));
            gt.push_back({t, cls, {x, y, x + w, y + h}, 1.0});
            if (rng.u01() < 0.85) {
                int dx = static_cast<int>(rng.uniform_int(9)) - 4;
                int dy = static_cast<int>(rng.uniform_int(9)) - 4;
                pred.push_back({t, cls, {x + dx, y + dy, x + w + dx, y + h + dy}, rng.u01()});
            }
            if (rng.u01() < 0.3) {
                pred.push_back({t, static_cast<int>(rng.uniform_int(3)),
                                {x + 8, y + 8, x + w + 8, y + h + 8}, rng.u01()});
            }
        }
        double err = std::abs(evaluate_map50(pred, gt, 0.5) - naive_map(pred, gt, 0.5));
        worst_map_err = std::max(worst_map_err, err);
        if (err <= 1e-12) ++map_ok;
    }

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "instance partition == flood fill %d/100, A* == Dijkstra %d/200 "
                  "(%d connected, %d disconnected), mAP == brute force %d/100 (worst |err|=%.1e)",
                  maps_ok, astar_ok, n_connected, n_disconnected, map_ok, worst_map_err);
    detail = buf;
    return maps_ok == 100 && astar_ok == 200 && n_connected > 0 && n_disconnected > 0 &&
           map_ok == 100;
}

// ---- criterion 2: gradients vs finite differences, simplex invariants -----

bool criterion_gradients(std::string& detail) {
    Rng rng(7);
    const double h = 1e-6;

    // composite detection loss: analytic gradient vs central finite differences
    double worst_loss_rel = 0;
    for (int cfg = 0; cfg < 50; ++cfg) {
        int d = 3 + static_cast<int>(rng.uniform_int(4));
        int C = 3 + static_cast<int>(rng.uniform_int(3));
        int dp = 2 + static_cast<int>(rng.uniform_int(3));
        HeadHyper hy;
        HeadParams p = HeadParams::init(d, C, dp, 1000 + cfg, hy);
        for (auto& row : p.w_cls) {
            for (double& w : row) w += 0.3 * rng.normal();
        }
        for (double& b : p.b_cls) b += 0.3 * rng.normal();
        for (auto& row : p.w_proj) {
            for (double& w : row) w += 0.3 * rng.normal();
        }
        for (double& b : p.b_proj) b += 0.3 * rng.normal();

        int n = 3 + static_cast<int>(rng.uniform_int(4));
        std::vector<TrainSample> batch(n);
        for (auto& s : batch) {
            s.feature.resize(d);
            for (double& f : s.feature) f = rng.normal();
            s.label = static_cast<int>(rng.uniform_int(C));
            s.soft_target.resize(C);
            double z = 0;
            for (double& x : s.soft_target) {
                x = std::exp(rng.normal());
                z += x;
            }
            for (double& x : s.soft_target) x /= z;
            s.u = static_cast<int>(rng.uniform_int(3));
        }
        std::vector<FeatureTriplet> trips = mine_batch_triplets(batch, rng);
        double alpha = rng.u01();
        double margin = 0.1 + 0.4 * rng.u01();

        LossBreakdown bd = loss_detection(p, batch, trips, alpha, margin);
        auto fd_check = [&](double& ref, double analytic) {
            double orig = ref;
            ref = orig + h;
            double lp = loss_detection(p, batch, trips, alpha, margin).total;
            ref = orig - h;
            double lm = loss_detection(p, batch, trips, alpha, margin).total;
            ref = orig;
            double fd = (lp - lm) / (2 * h);
            double rel = std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
            worst_loss_rel = std::max(worst_loss_rel, rel);
        };
        for (int c = 0; c < C; ++c) {
            for (int i = 0; i < d; ++i) fd_check(p.w_cls[c][i], bd.grads.w_cls[c][i]);
            fd_check(p.b_cls[c], bd.grads.b_cls[c]);
        }
        for (int r = 0; r < dp; ++r) {
            for (int i = 0; i < d; ++i) fd_check(p.w_proj[r][i], bd.grads.w_proj[r][i]);
            fd_check(p.b_proj[r], bd.grads.b_proj[r]);
        }
    }

    // policy log-probability gradient vs central finite differences
    double worst_pol_rel = 0;
    for (int cfg = 0; cfg < 50; ++cfg) {
        LearnedPolicyParams p;
        for (double& w : p.weights) w = rng.normal();
        p.temperature = 0.5 + rng.u01();
        int n = 2 + static_cast<int>(rng.uniform_int(7));
        std::vector<std::array<double, kPolicyFeatureDim>> feats(n);
        for (auto& f : feats) {
            for (double& x : f) x = rng.normal();
        }
        int chosen = static_cast<int>(rng.uniform_int(n));
        std::array<double, kPolicyFeatureDim> g = grad_log_policy(p, feats, chosen);
        for (int i = 0; i < kPolicyFeatureDim; ++i) {
            LearnedPolicyParams q = p;
            q.weights[i] = p.weights[i] + h;
            double lp = std::log(candidate_probabilities(q, feats)[chosen]);
            q.weights[i] = p.weights[i] - h;
            double lm = std::log(candidate_probabilities(q, feats)[chosen]);
            double fd = (lp - lm) / (2 * h);
            double rel = std::abs(g[i] - fd) / std::max(1.0, std::abs(fd));
            worst_pol_rel = std::max(worst_pol_rel, rel);
        }
    }

    // every normalized logit vector and every aggregated softmax lies on the
    // probability simplex
    double worst_simplex = 0;
    size_t n_simplex = 0;
    for (int t = 0; t < 400; ++t) {
        int C = 2 + static_cast<int>(rng.uniform_int(9));
        std::vector<double> l(C);
        double scale = (t % 4 == 0) ? 50.0 : 3.0;  // include extreme spikes
        for (double& x : l) x = scale * rng.normal();
        std::vector<double> p = normalized_logits(l);
        double sum = 0, neg = 0;
        for (double x : p) {
            sum += x;
            neg = std::min(neg, x);
        }
        worst_simplex = std::max(worst_simplex, std::max(std::abs(sum - 1.0), -neg));
        ++n_simplex;
    }
    for (int t = 0; t < 15; ++t) {
        SemanticVoxelMap m = random_voxel_map(rng, 8, 2 + static_cast<int>(rng.uniform_int(5)),
                                              120);
        for (const auto& [u, rec] : m.instances()) {
            std::vector<double> lam = m.aggregated_softmax(u);
            double sum = 0, neg = 0;
            for (double x : lam) {
                sum += x;
                neg = std::min(neg, x);
            }
            worst_simplex = std::max(worst_simplex, std::max(std::abs(sum - 1.0), -neg));
            ++n_simplex;
        }
    }

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "loss grad worst rel err %.2e (tol 1e-4), policy grad worst rel err %.2e "
                  "(tol 1e-5), %zu simplex checks worst dev %.2e (tol 1e-9)",
                  worst_loss_rel, worst_pol_rel, n_simplex, worst_simplex);
    detail = buf;
    return worst_loss_rel <= 1e-4 && worst_pol_rel <= 1e-5 && worst_simplex <= 1e-9;
}

// ---- criterion 3: consensus pseudo-labels beat raw detections -------------

bool criterion_consensus(std::string& detail) {
    SceneGenConfig sc;
    sc.dims = {64, 64, 14};
    sc.n_objects = 10;
    sc.n_wall_segments = 2;
    DetectorProfile prof = flip_profile(8, 0.3, 1.7, 0.0, 10.0);
    CameraModel cam;
    cam.width = 48;
    cam.height = 36;
    cam.max_range = 4.5;

    std::vector<double> gaps;
    int min_views = 1 << 30;
    size_t wta_checked = 0, wta_agree = 0;
    std::vector<double> mean_consensus_acc;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        std::map<int, int> planned;
        EpisodeResult ep = scripted_episode(sc, prof, cam, 20, 6, seed, &planned);
        for (const auto& [gt, n] : planned) min_views = std::min(min_views, n);

        size_t raw_n = 0, raw_ok = 0;
        for (const auto& frame : ep.detections) {
            for (const auto& ed : frame) {
                ++raw_n;
                if (ed.det.class_id == class_of(ep.scene, ed.det.hidden_gt_id)) ++raw_ok;
            }
        }
        size_t rec_n = 0, rec_ok = 0;
        for (const auto& [fid, labels] : ep.pseudo.entries) {
            for (const auto& pl : labels) {
                ++rec_n;
                int gt = match_instance_to_gt(ep.scene, ep.map.instances().at(pl.u));
                if (gt >= 0 && class_of(ep.scene, gt) == pl.class_id) ++rec_ok;
            }
        }

        // independent consensus oracles per instance: (a) re-derive the
        // winner-take-all class from the raw logit sets and require exact
        // agreement with the library, (b) score the argmax of the mean softmax
        // as an alternative aggregation
        size_t mean_n = 0, mean_ok = 0;
        for (const auto& [u, rec] : ep.map.instances()) {
            int wta_class = -1;
            double wta_peak = -1;
            std::vector<double> mean_sm;
            for (const auto& logits : rec.logit_set) {
                std::vector<double> sm = softmax(logits);
                if (mean_sm.empty()) mean_sm.assign(sm.size(), 0.0);
                for (size_t c = 0; c < sm.size(); ++c) {
                    mean_sm[c] += sm[c];
                    if (sm[c] > wta_peak) {
                        wta_peak = sm[c];
                        wta_class = static_cast<int>(c);
                    }
                }
            }
            ++wta_checked;
            if (wta_class == rec.class_id) ++wta_agree;
            int gt = match_instance_to_gt(ep.scene, rec);
            if (gt >= 0) {
                ++mean_n;
                if (static_cast<int>(argmax(mean_sm)) == class_of(ep.scene, gt)) ++mean_ok;
            }
        }
        mean_consensus_acc.push_back(mean_n ? static_cast<double>(mean_ok) / mean_n : 0.0);

        double raw = raw_n ? static_cast<double>(raw_ok) / raw_n : 0;
        double rec = rec_n ? static_cast<double>(rec_ok) / rec_n : 0;
        gaps.push_back(rec - raw);
    }
    double med_gap = median(gaps);

    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "median accuracy gap (consensus - raw) %+.1fpp (need >= +10pp), min planned "
                  "views/object %d (need >= 3), winner-take-all re-derivation agrees %zu/%zu, "
                  "mean-softmax oracle median acc %.3f over 20 seeds",
                  100 * med_gap, min_views, wta_agree, wta_checked,
                  median(mean_consensus_acc));
    detail = buf;
    return med_gap >= 0.10 && min_views >= 3 && wta_agree == wta_checked;
}

// ---- criterion 4: disagreement-seeking exploration ------------------------

bool criterion_exploration(std::string& detail) {
    // Stage 1: contextual-bandit training of the learned policy on synthetic
    // disagreement maps with a randomly placed hot region. The probe measures
    // the probability mass the policy puts on candidates inside a canonical
    // hot region before and after training.
    const int K = 16, MN = 32;
    const double vs = 0.05;
    ExploredMap M(MN, MN);
    for (auto& c : M.state) c = CellState::Free;

    auto make_state = [&](int ri, int rj, double ax, double ay, DisagreementMap& D,
                          PolicyInput& input) {
        D.K = K;
        D.cell_size = MN * vs / K;
        D.H.assign(static_cast<size_t>(K) * K, 0.0);
        for (int j = rj; j < rj + 4; ++j) {
            for (int i = ri; i < ri + 4; ++i) D.at(i, j) = 5.0;
        }
        AgentPose pose;
        pose.x = ax;
        pose.y = ay;
        input = assemble_policy_input(D, M, pose);
    };

    std::vector<Vec2i> cands;
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) cands.push_back({4 + 8 * i, 4 + 8 * j});
    }

    DisagreementMap Dc;
    PolicyInput inc;
    make_state(12, 12, 0.2, 0.2, Dc, inc);
    std::vector<std::array<double, kPolicyFeatureDim>> probe_feats;
    for (const auto& c : cands) probe_feats.push_back(policy_features(inc, M, c, vs));
    auto p_region = [&](const LearnedPolicyParams& p) {
        std::vector<double> probs = candidate_probabilities(p, probe_feats);
        double s = 0;
        for (size_t i = 0; i < cands.size(); ++i) {
            int hi = static_cast<int>(cands[i].x * vs / Dc.cell_size);
            int hj = static_cast<int>(cands[i].y * vs / Dc.cell_size);
            if (hi >= 12 && hj >= 12) s += probs[i];
        }
        return s;
    };

    LearnedPolicyParams params;
    Rng rng(99);
    double p0 = p_region(params);
    for (int ep = 0; ep < 200; ++ep) {
        int ri = static_cast<int>(rng.uniform_int(13));
        int rj = static_cast<int>(rng.uniform_int(13));
        double ax = (0.5 + rng.uniform_int(MN)) * vs;
        double ay = (0.5 + rng.uniform_int(MN)) * vs;
        DisagreementMap D;
        PolicyInput input;
        make_state(ri, rj, ax, ay, D, input);
        std::vector<std::array<double, kPolicyFeatureDim>> feats;
        for (const auto& c : cands) feats.push_back(policy_features(input, M, c, vs));

        std::vector<DecisionRecord> traj;
        for (int d = 0; d < 8; ++d) {
            LearnedChoice ch = learned_goal(params, input, M, cands, vs, rng);
            DecisionRecord r;
            r.candidate_features = feats;
            r.chosen = ch.index;
            int hi = static_cast<int>(ch.cell.x * vs / D.cell_size);
            int hj = static_cast<int>(ch.cell.y * vs / D.cell_size);
            r.reward = input.disagreement[static_cast<size_t>(hj) * K + hi];
            traj.push_back(std::move(r));
        }
        params = reinforce_update(params, traj, 0.99, 0.1);
    }
    double rise = p_region(params) - p0;

    // Stage 2: full episodes. The per-decision trajectory log records the
    // disagreement mass around each chosen goal at decision time; a policy
    // that seeks disagreement collects more of it than uniform wandering.
    RunConfig c;
    c.scene.dims = {32, 32, 12};
    c.scene.n_objects = 6;
    c.scene.n_wall_segments = 1;
    c.scene.head_voxels = 8;
    c.detector = flip_profile(8, 0.3, 1.2, 0.3, 4.0);
    c.score = ScoreKind::Entropy;
    c.steps = 300;
    c.n_replanning = 40;
    c.map_k = 16;
    c.n_candidates = 32;
    c.camera.width = 48;
    c.camera.height = 36;
    c.camera.max_range = 2.5;

    std::map<PolicyKind, double> med;
    for (PolicyKind pk : {PolicyKind::Random, PolicyKind::Greedy, PolicyKind::Learned}) {
        c.policy = pk;
        std::vector<double> collected;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            EpisodeResult ep =
                run_episode(c, seed, pk == PolicyKind::Learned ? &params : nullptr);
            double col = 0;
            std::istringstream lines(ep.trajectory_log);
            std::string line;
            while (std::getline(lines, line)) {
                col += nlohmann::json::parse(line).at("goal_h").get<double>();
            }
            collected.push_back(col);
        }
        med[pk] = median(collected);
    }

    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "policy hot-region probability rise %.3f over 200 episodes (need >= 0.3); "
                  "median collected goal disagreement over 10 seeds: random %.1f, greedy %.1f, "
                  "learned %.1f (need greedy and learned >= random)",
                  rise, med[PolicyKind::Random], med[PolicyKind::Greedy],
                  med[PolicyKind::Learned]);
    detail = buf;
    return rise >= 0.3 && med[PolicyKind::Greedy] >= med[PolicyKind::Random] &&
           med[PolicyKind::Learned] >= med[PolicyKind::Random];
}

// ---- criterion 5: head training on consensus labels -----------------------

bool criterion_head_training(std::string& detail) {
    SceneGenConfig sc;
    sc.dims = {64, 64, 14};
    sc.n_objects = 12;
    sc.n_wall_segments = 2;
    DetectorProfile prof = flip_profile(8, 0.3, 1.7, 0.0, 10.0, 0.4);
    CameraModel cam;
    cam.width = 48;
    cam.height = 36;
    cam.max_range = 4.5;

    RunConfig hc;
    hc.scene = sc;
    hc.detector = prof;
    hc.camera = cam;
    hc.eval.holdout_poses = 60;
    hc.eval.holdout_fraction = 0.25;

    HeadHyper hyper;
    hyper.lr = 0.02;
    hyper.epochs = 10;
    hyper.alpha = 0.7;
    hyper.margin = 0.3;

    std::vector<double> unt, raws, recs;
    std::vector<std::vector<TrainSample>> rec_cache;
    std::vector<uint64_t> seed_cache;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        EpisodeResult ep = scripted_episode(sc, prof, cam, 20, 9, seed);
        std::vector<TrainSample> raw_s = build_train_samples(ep, true);
        std::vector<TrainSample> rec_s = build_train_samples(ep, false);
        std::vector<TrainSample> hold = build_holdout(hc, seed);
        hyper.seed = seed;
        HeadParams h0 = HeadParams::init(prof.feature_dim, prof.n_classes, 8, seed, hyper);
        unt.push_back(evaluate_head(h0, hold).accuracy);
        raws.push_back(evaluate_head(train(h0, raw_s).params, hold).accuracy);
        recs.push_back(evaluate_head(train(h0, rec_s).params, hold).accuracy);
        rec_cache.push_back(std::move(rec_s));
        seed_cache.push_back(seed);
    }
    double m_unt = median(unt), m_raw = median(raws), m_rec = median(recs);

    // distillation-weight sweep on the consensus targets, emitted as a report
    // table (axis value -> per-seed fragments -> aggregate rows)
    std::vector<MetricsFragment> frags;
    std::map<double, double> alpha_median;
    for (double alpha : {0.0, 0.1, 0.7, 1.0}) {
        std::vector<double> accs;
        for (size_t i = 0; i < 5; ++i) {
            HeadHyper hy = hyper;
            hy.alpha = alpha;
            hy.seed = seed_cache[i];
            HeadParams h0 =
                HeadParams::init(prof.feature_dim, prof.n_classes, 8, seed_cache[i], hy);
            std::vector<TrainSample> hold = build_holdout(hc, seed_cache[i]);
            double acc = evaluate_head(train(h0, rec_cache[i]).params, hold).accuracy;
            accs.push_back(acc);
            char axis[32];
            std::snprintf(axis, sizeof axis, "alpha=%.1f", alpha);
            frags.push_back({seed_cache[i], axis, {{"holdout_accuracy", acc}}});
        }
        alpha_median[alpha] = median(accs);
    }
    MetricsReport rep = report(frags);
    std::printf("distillation-weight sweep (holdout accuracy on consensus-trained heads):\n%s",
                rep.to_csv().c_str());
    std::fflush(stdout);

    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "median holdout accuracy over 10 seeds: untrained %.3f, raw-trained %.3f, "
                  "consensus-trained %.3f (need consensus > both); sweep medians alpha 0/0.1/"
                  "0.7/1.0 = %.3f/%.3f/%.3f/%.3f (need alpha 0.7 >= alpha 0)",
                  m_unt, m_raw, m_rec, alpha_median[0.0], alpha_median[0.1], alpha_median[0.7],
                  alpha_median[1.0]);
    detail = buf;
    return m_rec > m_unt && m_rec > m_raw && alpha_median[0.7] >= alpha_median[0.0];
}

// ---- criterion 6: cross-view consistency, score accounting, determinism ---

bool criterion_consistency(std::string& detail) {
    // every pseudo label of the same instance carries one consistent class and
    // one consistent aggregated distribution across all frames
    SceneGenConfig sc;
    sc.dims = {48, 48, 14};
    sc.n_objects = 6;
    sc.n_wall_segments = 2;
    DetectorProfile prof = flip_profile(8, 0.3, 1.7, 0.0, 10.0);
    CameraModel cam;
    cam.width = 48;
    cam.height = 36;
    cam.max_range = 4.5;
    EpisodeResult ep = scripted_episode(sc, prof, cam, 10, 6, 3);

    size_t labels_checked = 0;
    bool consistent = true;
    std::map<int, std::pair<int, std::vector<double>>> seen;  // u -> (class, lambda)
    for (const auto& [fid, labels] : ep.pseudo.entries) {
        for (const auto& pl : labels) {
            ++labels_checked;
            if (pl.lambda_bar != ep.map.aggregated_softmax(pl.u)) consistent = false;
            auto it = seen.find(pl.u);
            if (it == seen.end()) {
                seen[pl.u] = {pl.class_id, pl.lambda_bar};
            } else if (it->second.first != pl.class_id || it->second.second != pl.lambda_bar) {
                consistent = false;
            }
        }
    }

    // the disagreement map redistributes the per-instance scores without loss
    Rng rng(4242);
    double worst_sum_err = 0;
    for (int t = 0; t < 10; ++t) {
        SemanticVoxelMap m = random_voxel_map(rng, 12, 4, 150);
        for (ScoreKind kind :
             {ScoreKind::Entropy, ScoreKind::Cos, ScoreKind::Euc, ScoreKind::Count}) {
            DisagreementMap H = build_disagreement_map(m, kind, 8, 12 * 0.05);
            worst_sum_err = std::max(worst_sum_err, std::abs(H.sum() - total_score(m, kind)));
        }
    }

    // byte-identical artifacts when the same configuration and seed run twice
    RunConfig c;
    c.scene.dims = {32, 32, 12};
    c.scene.n_objects = 4;
    c.scene.n_wall_segments = 1;
    c.scene.head_voxels = 8;
    c.detector = flip_profile(8, 0.3, 1.2, 0.3, 4.0);
    c.policy = PolicyKind::Greedy;
    c.score = ScoreKind::Entropy;
    c.steps = 40;
    c.n_replanning = 10;
    c.map_k = 16;
    c.n_candidates = 16;
    c.camera.width = 32;
    c.camera.height = 24;
    c.camera.max_range = 2.5;
    EpisodeResult a = run_episode(c, 11);
    EpisodeResult b = run_episode(c, 11);
    bool deterministic = a.pseudo.to_jsonl() == b.pseudo.to_jsonl() &&
                         a.trajectory_log == b.trajectory_log &&
                         a.map.dump_json() == b.map.dump_json();

    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "%zu pseudo labels across %zu frames all consistent per instance: %s; "
                  "score-map mass worst |err| %.1e (tol 1e-9); repeat run byte-identical: %s",
                  labels_checked, ep.pseudo.entries.size(), consistent ? "yes" : "NO",
                  worst_sum_err, deterministic ? "yes" : "NO");
    detail = buf;
    return consistent && labels_checked > 0 && worst_sum_err <= 1e-9 && deterministic;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*fn)(std::string&);
        double budget_s;
    };
    const Criterion criteria[] = {
        {"algorithmic oracles", criterion_oracles, 60},
        {"gradient and simplex checks", criterion_gradients, 30},
        {"consensus pseudo-labeling", criterion_consensus, 300},
        {"disagreement-seeking exploration", criterion_exploration, 600},
        {"head training on consensus labels", criterion_head_training, 300},
        {"consistency and determinism", criterion_consistency, 600},
    };
    for (const auto& c : criteria) {
        double t0 = now_s();
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("unexpected exception: ") + e.what();
        }
        double secs = now_s() - t0;
        if (secs > c.budget_s) {
            ok = false;
            detail += " [over time budget]";
        }
        verdict(ok, c.name, detail, secs);
    }
    std::printf("%s\n", g_failures == 0 ? "acceptance: all criteria passed"
                                        : "acceptance: FAILURES present");
    return g_failures == 0 ? 0 : 1;
}
