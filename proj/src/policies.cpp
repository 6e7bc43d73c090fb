#include "lookaround/policies.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace lookaround {

using json = nlohmann::json;

PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "random") return PolicyKind::Random;
    if (s == "frontier") return PolicyKind::Frontier;
    if (s == "greedy") return PolicyKind::Greedy;
    if (s == "learned") return PolicyKind::Learned;
    throw std::invalid_argument("unknown policy kind: " + s);
}

std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Random: return "random";
        case PolicyKind::Frontier: return "frontier";
        case PolicyKind::Greedy: return "greedy";
        case PolicyKind::Learned: return "learned";
    }
    return "?";
}

namespace {

std::vector<Vec2i> free_cells(const ExploredMap& M) {
    std::vector<Vec2i> out;
    for (int y = 0; y < M.ny; ++y) {
        for (int x = 0; x < M.nx; ++x) {
            if (M.at(x, y) == CellState::Free) out.push_back({x, y});
        }
    }
    return out;
}

Vec2i agent_cell(const ExploredMap& M, const AgentPose& pose, double voxel_size) {
    Vec2i c{static_cast<int>(std::floor(pose.x / voxel_size)),
            static_cast<int>(std::floor(pose.y / voxel_size))};
    c.x = std::clamp(c.x, 0, M.nx - 1);
    c.y = std::clamp(c.y, 0, M.ny - 1);
    return c;
}

// BFS geodesic distances (in cells, 4-connected) over known-free cells
std::vector<int> geodesic_distances(const ExploredMap& M, const Vec2i& start) {
    std::vector<int> dist(static_cast<size_t>(M.nx) * M.ny, -1);
    if (!M.is_free(start.x, start.y)) return dist;
    std::deque<Vec2i> q{start};
    dist[M.idx(start.x, start.y)] = 0;
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
        Vec2i c = q.front();
        q.pop_front();
        int d = dist[M.idx(c.x, c.y)];
        for (int k = 0; k < 4; ++k) {
            int nx_ = c.x + dx[k], ny_ = c.y + dy[k];
            if (M.is_free(nx_, ny_) && dist[M.idx(nx_, ny_)] < 0) {
                dist[M.idx(nx_, ny_)] = d + 1;
                q.push_back({nx_, ny_});
            }
        }
    }
    return dist;
}

}  // namespace

GoalAction random_goal(const ExploredMap& M, double voxel_size, Rng& rng) {
    std::vector<Vec2i> cells = free_cells(M);
    if (cells.empty()) throw std::runtime_error("random_goal: no known-free cells");
    const Vec2i& c = cells[rng.uniform_int(cells.size())];
    return cell_goal(c, voxel_size);
}

std::optional<GoalAction> frontier_goal(const ExploredMap& M, const AgentPose& pose,
                                        double voxel_size) {
    // collect frontier cells and cluster them (4-connected)
    std::set<Vec2i> frontier;
    for (int y = 0; y < M.ny; ++y) {
        for (int x = 0; x < M.nx; ++x) {
            if (M.is_frontier(x, y)) frontier.insert({x, y});
        }
    }
    if (frontier.empty()) return std::nullopt;  // exploration complete

    std::vector<int> dist = geodesic_distances(M, agent_cell(M, pose, voxel_size));

    std::set<Vec2i> visited;
    Vec2i best{-1, -1};
    int best_dist = std::numeric_limits<int>::max();
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    for (const Vec2i& seed : frontier) {
        if (visited.count(seed)) continue;
        std::vector<Vec2i> cluster;
        std::deque<Vec2i> q{seed};
        visited.insert(seed);
        while (!q.empty()) {
            Vec2i c = q.front();
            q.pop_front();
            cluster.push_back(c);
            for (int k = 0; k < 4; ++k) {
                Vec2i n{c.x + dx[k], c.y + dy[k]};
                if (frontier.count(n) && !visited.count(n)) {
                    visited.insert(n);
                    q.push_back(n);
                }
            }
        }
        // centroid snapped to the nearest member cell
        double cx = 0, cy = 0;
        for (const Vec2i& c : cluster) {
            cx += c.x;
            cy += c.y;
        }
        cx /= static_cast<double>(cluster.size());
        cy /= static_cast<double>(cluster.size());
        std::sort(cluster.begin(), cluster.end());
        Vec2i snapped = cluster.front();
        double snap_d = std::numeric_limits<double>::infinity();
        for (const Vec2i& c : cluster) {
            double d = (c.x - cx) * (c.x - cx) + (c.y - cy) * (c.y - cy);
            if (d < snap_d) {
                snap_d = d;
                snapped = c;
            }
        }
        int gd = dist[M.idx(snapped.x, snapped.y)];
        if (gd >= 0 && gd < best_dist) {
            best_dist = gd;
            best = snapped;
        }
    }
    if (best.x < 0) return std::nullopt;  // frontiers exist but none are reachable
    return cell_goal(best, voxel_size);
}

namespace {

// sum of H over a window around the H-grid cell of a map cell
double local_h_sum(const std::vector<double>& H, int K, int hi, int hj, int radius) {
    double s = 0;
    for (int j = std::max(0, hj - radius); j <= std::min(K - 1, hj + radius); ++j) {
        for (int i = std::max(0, hi - radius); i <= std::min(K - 1, hi + radius); ++i) {
            s += H[static_cast<size_t>(j) * K + i];
        }
    }
    return s;
}

Vec2i h_cell_of(const Vec2i& map_cell, double voxel_size, double h_cell_size, int K) {
    double mx = (map_cell.x + 0.5) * voxel_size;
    double my = (map_cell.y + 0.5) * voxel_size;
    return {std::clamp(static_cast<int>(std::floor(mx / h_cell_size)), 0, K - 1),
            std::clamp(static_cast<int>(std::floor(my / h_cell_size)), 0, K - 1)};
}

}  // namespace

GoalAction greedy_disagreement_goal(const DisagreementMap& H, const ExploredMap& M,
                                    const AgentPose& pose, double voxel_size,
                                    const GreedyConfig& cfg, Rng& rng) {
    if (H.max() <= 0) {
        if (auto g = frontier_goal(M, pose, voxel_size)) return *g;
        return random_goal(M, voxel_size, rng);
    }
    std::vector<int> dist = geodesic_distances(M, agent_cell(M, pose, voxel_size));
    Vec2i best{-1, -1};
    double best_value = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < M.ny; ++y) {
        for (int x = 0; x < M.nx; ++x) {
            if (!M.is_free(x, y)) continue;
            int gd = dist[M.idx(x, y)];
            if (gd < 0) continue;  // unreachable
            Vec2i hc = h_cell_of({x, y}, voxel_size, H.cell_size, H.K);
            double value = local_h_sum(H.H, H.K, hc.x, hc.y, cfg.radius) - cfg.beta * gd;
            if (value > best_value) {  // scan order makes ties go to lowest (x, y)
                best_value = value;
                best = {x, y};
            }
        }
    }
    if (best.x < 0) {
        if (auto g = frontier_goal(M, pose, voxel_size)) return *g;
        return random_goal(M, voxel_size, rng);
    }
    return cell_goal(best, voxel_size);
}

std::array<double, kPolicyFeatureDim> policy_features(const PolicyInput& input,
                                                      const ExploredMap& M, const Vec2i& cell,
                                                      double voxel_size) {
    const int K = input.K;
    double h_cell_size = (K > 0) ? (std::max(M.nx, M.ny) * voxel_size) / K : 1.0;
    Vec2i hc = h_cell_of(cell, voxel_size, h_cell_size, K);

    std::array<double, kPolicyFeatureDim> f{};
    const int radii[3] = {1, 3, 6};
    for (int k = 0; k < 3; ++k) {
        int r = radii[k];
        double area = static_cast<double>(2 * r + 1) * (2 * r + 1);
        f[k] = local_h_sum(input.disagreement, K, hc.x, hc.y, r) / area;
    }
    double di = hc.x - input.agent_i, dj = hc.y - input.agent_j;
    f[3] = std::hypot(di, dj) / std::max(1, K);

    int r = 3, known = 0, total = 0;
    for (int y = std::max(0, cell.y - r); y <= std::min(M.ny - 1, cell.y + r); ++y) {
        for (int x = std::max(0, cell.x - r); x <= std::min(M.nx - 1, cell.x + r); ++x) {
            ++total;
            if (M.at(x, y) != CellState::Unknown) ++known;
        }
    }
    f[4] = total > 0 ? static_cast<double>(known) / total : 0.0;
    f[5] = M.is_frontier(cell.x, cell.y) ? 1.0 : 0.0;
    return f;
}

std::vector<double> candidate_probabilities(
    const LearnedPolicyParams& params,
    const std::vector<std::array<double, kPolicyFeatureDim>>& feats) {
    if (feats.empty()) throw std::invalid_argument("candidate_probabilities: no candidates");
    if (params.temperature <= 0) throw std::invalid_argument("temperature must be > 0");
    std::vector<double> scores(feats.size());
    for (size_t i = 0; i < feats.size(); ++i) {
        double s = 0;
        for (int k = 0; k < kPolicyFeatureDim; ++k) s += params.weights[k] * feats[i][k];
        scores[i] = s / params.temperature;
    }
    return softmax(scores);
}

std::vector<Vec2i> sample_candidates(const ExploredMap& M, int n_candidates, Rng& rng) {
    std::vector<Vec2i> cells = free_cells(M);
    if (cells.empty()) throw std::runtime_error("sample_candidates: no known-free cells");
    std::set<Vec2i> chosen;
    for (int i = 0; i < n_candidates; ++i) {
        chosen.insert(cells[rng.uniform_int(cells.size())]);
    }
    return {chosen.begin(), chosen.end()};
}

LearnedChoice learned_goal(const LearnedPolicyParams& params, const PolicyInput& input,
                           const ExploredMap& M, const std::vector<Vec2i>& candidates,
                           double voxel_size, Rng& rng, bool argmax_mode) {
    if (candidates.empty()) throw std::invalid_argument("learned_goal: no candidates");
    std::vector<std::array<double, kPolicyFeatureDim>> feats;
    feats.reserve(candidates.size());
    for (const Vec2i& c : candidates) feats.push_back(policy_features(input, M, c, voxel_size));
    std::vector<double> probs = candidate_probabilities(params, feats);
    int idx;
    if (argmax_mode) {
        idx = argmax(probs);
    } else {
        idx = static_cast<int>(rng.discrete(probs));
    }
    return {candidates[idx], idx, cell_goal(candidates[idx], voxel_size)};
}

std::array<double, kPolicyFeatureDim> grad_log_policy(
    const LearnedPolicyParams& params,
    const std::vector<std::array<double, kPolicyFeatureDim>>& feats, int chosen) {
    std::vector<double> probs = candidate_probabilities(params, feats);
    std::array<double, kPolicyFeatureDim> g{};
    for (int k = 0; k < kPolicyFeatureDim; ++k) {
        double expect = 0;
        for (size_t i = 0; i < feats.size(); ++i) expect += probs[i] * feats[i][k];
        g[k] = (feats[chosen][k] - expect) / params.temperature;
    }
    return g;
}

LearnedPolicyParams reinforce_update(const LearnedPolicyParams& params,
                                     const std::vector<DecisionRecord>& trajectory, double gamma,
                                     double lr) {
    if (trajectory.empty()) throw std::invalid_argument("reinforce_update: empty trajectory");
    const size_t T = trajectory.size();
    std::vector<double> returns(T, 0.0);
    double g = 0;
    for (size_t t = T; t-- > 0;) {
        if (!std::isfinite(trajectory[t].reward)) {
            throw std::runtime_error("reinforce_update: non-finite reward");
        }
        g = trajectory[t].reward + gamma * g;
        returns[t] = g;
    }
    double baseline = 0;
    for (double r : returns) baseline += r;
    baseline /= static_cast<double>(T);

    std::array<double, kPolicyFeatureDim> grad{};
    for (size_t t = 0; t < T; ++t) {
        auto glp = grad_log_policy(params, trajectory[t].candidate_features, trajectory[t].chosen);
        for (int k = 0; k < kPolicyFeatureDim; ++k) {
            grad[k] += glp[k] * (returns[t] - baseline);
        }
    }
    LearnedPolicyParams out = params;
    for (int k = 0; k < kPolicyFeatureDim; ++k) {
        double w = out.weights[k] + lr * grad[k];
        if (!std::isfinite(w)) throw std::runtime_error("reinforce_update: non-finite gradient step");
        out.weights[k] = w;
    }
    return out;
}

double compute_step_reward(const SemanticVoxelMap& before, const SemanticVoxelMap& after,
                           ScoreKind kind) {
    return total_score(after, kind) - total_score(before, kind);
}

std::string LearnedPolicyParams::to_json() const {
    json j;
    j["weights"] = weights;
    j["temperature"] = temperature;
    j["feature_spec_version"] = kFeatureSpecVersion;
    return j.dump();
}

LearnedPolicyParams LearnedPolicyParams::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("feature_spec_version").get<int>() != kFeatureSpecVersion) {
        throw std::runtime_error("LearnedPolicyParams: feature spec version mismatch");
    }
    LearnedPolicyParams p;
    auto w = j.at("weights");
    if (w.size() != kPolicyFeatureDim) {
        throw std::runtime_error("LearnedPolicyParams: bad weight count");
    }
    for (int k = 0; k < kPolicyFeatureDim; ++k) p.weights[k] = w.at(k).get<double>();
    p.temperature = j.at("temperature").get<double>();
    return p;
}

}  // namespace lookaround
