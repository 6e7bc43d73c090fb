#include "lookaround/disagreement.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace lookaround {

namespace {
constexpr double kEpsNorm = 1e-9;

const InstanceRecord& instance_or_throw(const SemanticVoxelMap& map, int u) {
    auto it = map.instances().find(u);
    if (it == map.instances().end()) {
        throw std::runtime_error("disagreement: unknown instance " + std::to_string(u));
    }
    return it->second;
}
}  // namespace

ScoreKind score_kind_from_string(const std::string& s) {
    if (s == "entropy") return ScoreKind::Entropy;
    if (s == "cos") return ScoreKind::Cos;
    if (s == "euc") return ScoreKind::Euc;
    if (s == "count") return ScoreKind::Count;
    throw std::invalid_argument("unknown score kind: " + s);
}

std::string to_string(ScoreKind k) {
    switch (k) {
        case ScoreKind::Entropy: return "entropy";
        case ScoreKind::Cos: return "cos";
        case ScoreKind::Euc: return "euc";
        case ScoreKind::Count: return "count";
    }
    return "?";
}

double score_entropy(const SemanticVoxelMap& map, int u) {
    instance_or_throw(map, u);
    return entropy(map.aggregated_softmax(u));
}

double score_cos(const SemanticVoxelMap& map, int u) {
    const auto& Q = instance_or_throw(map, u).logit_set;
    if (Q.size() < 2) return 0.0;
    double sum = 0;
    size_t pairs = 0;
    for (size_t a = 0; a < Q.size(); ++a) {
        for (size_t b = a + 1; b < Q.size(); ++b) {
            double dot = 0, na = 0, nb = 0;
            for (size_t c = 0; c < Q[a].size(); ++c) {
                dot += Q[a][c] * Q[b][c];
                na += Q[a][c] * Q[a][c];
                nb += Q[b][c] * Q[b][c];
            }
            if (na <= 0 || nb <= 0) continue;  // zero-norm logits carry no direction
            sum += 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
            ++pairs;
        }
    }
    return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

double score_euc(const SemanticVoxelMap& map, int u) {
    const auto& Q = instance_or_throw(map, u).logit_set;
    if (Q.size() < 2) return 0.0;
    double sum = 0;
    size_t pairs = 0;
    for (size_t a = 0; a < Q.size(); ++a) {
        for (size_t b = a + 1; b < Q.size(); ++b) {
            double d2 = 0;
            for (size_t c = 0; c < Q[a].size(); ++c) {
                double d = Q[a][c] - Q[b][c];
                d2 += d * d;
            }
            sum += std::sqrt(d2);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

double score_count(const SemanticVoxelMap& map, int u) {
    const auto& Q = instance_or_throw(map, u).logit_set;
    std::set<int> classes;
    for (const auto& logits : Q) classes.insert(argmax(logits));
    return classes.empty() ? 0.0 : static_cast<double>(classes.size()) - 1.0;
}

double score(const SemanticVoxelMap& map, int u, ScoreKind kind) {
    switch (kind) {
        case ScoreKind::Entropy: return score_entropy(map, u);
        case ScoreKind::Cos: return score_cos(map, u);
        case ScoreKind::Euc: return score_euc(map, u);
        case ScoreKind::Count: return score_count(map, u);
    }
    throw std::logic_error("score: bad kind");
}

double total_score(const SemanticVoxelMap& map, ScoreKind kind) {
    double total = 0;
    for (const auto& [u, rec] : map.instances()) total += score(map, u, kind);
    return total;
}

double DisagreementMap::sum() const {
    double s = 0;
    for (double x : H) s += x;
    return s;
}

double DisagreementMap::max() const {
    double m = 0;
    for (double x : H) m = std::max(m, x);
    return m;
}

std::string DisagreementMap::to_csv() const {
    std::ostringstream os;
    for (int j = 0; j < K; ++j) {
        for (int i = 0; i < K; ++i) {
            if (i) os << ',';
            os << at(i, j);
        }
        os << '\n';
    }
    return os.str();
}

DisagreementMap build_disagreement_map(const SemanticVoxelMap& map, ScoreKind kind, int K,
                                       double scene_extent) {
    DisagreementMap out;
    out.K = K;
    out.cell_size = scene_extent / K;
    out.H.assign(static_cast<size_t>(K) * K, 0.0);
    const double vs = map.voxel_size();
    for (const auto& [u, rec] : map.instances()) {
        double cx = 0, cy = 0;
        for (const Vec3i& v : rec.voxels) {
            cx += (v.x + 0.5) * vs;
            cy += (v.y + 0.5) * vs;
        }
        cx /= static_cast<double>(rec.voxels.size());
        cy /= static_cast<double>(rec.voxels.size());
        int i = std::clamp(static_cast<int>(std::floor(cx / out.cell_size)), 0, K - 1);
        int j = std::clamp(static_cast<int>(std::floor(cy / out.cell_size)), 0, K - 1);
        out.at(i, j) += score(map, u, kind);
    }
    return out;
}

PolicyInput assemble_policy_input(const DisagreementMap& H, const ExploredMap& explored,
                                  const AgentPose& pose) {
    PolicyInput in;
    in.K = H.K;
    in.orientation = normalize_angle(pose.heading);
    in.disagreement.resize(H.H.size());
    double norm = std::max(H.max(), kEpsNorm);
    for (size_t i = 0; i < H.H.size(); ++i) {
        in.disagreement[i] = std::clamp(H.H[i] / norm, 0.0, 1.0);
    }
    // resample the explored map onto the K x K canvas
    in.explored.assign(static_cast<size_t>(H.K) * H.K, 0.0);
    for (int j = 0; j < H.K; ++j) {
        for (int i = 0; i < H.K; ++i) {
            int mx = std::clamp(static_cast<int>((i + 0.5) / H.K * explored.nx), 0, explored.nx - 1);
            int my = std::clamp(static_cast<int>((j + 0.5) / H.K * explored.ny), 0, explored.ny - 1);
            if (explored.at(mx, my) != CellState::Unknown) {
                in.explored[static_cast<size_t>(j) * H.K + i] = 0.5;
            }
        }
    }
    int ai = std::clamp(static_cast<int>(std::floor(pose.x / H.cell_size)), 0, H.K - 1);
    int aj = std::clamp(static_cast<int>(std::floor(pose.y / H.cell_size)), 0, H.K - 1);
    in.agent_i = ai;
    in.agent_j = aj;
    in.explored[static_cast<size_t>(aj) * H.K + ai] = 1.0;
    return in;
}

}  // namespace lookaround
