#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lookaround/disagreement.hpp"
#include "lookaround/explored_map.hpp"

namespace lookaround {

enum class PolicyKind { Random, Frontier, Greedy, Learned };

PolicyKind policy_kind_from_string(const std::string& s);
std::string to_string(PolicyKind k);

struct GoalAction {
    double x = 0, y = 0;  // map coordinates in meters
};

// cell -> meters (cell center)
inline GoalAction cell_goal(const Vec2i& c, double voxel_size) {
    return {(c.x + 0.5) * voxel_size, (c.y + 0.5) * voxel_size};
}

// uniform over known-free cells; throws when none exist
GoalAction random_goal(const ExploredMap& M, double voxel_size, Rng& rng);

// nearest frontier-cluster centroid by geodesic distance over known-free
// cells; nullopt when the map has no frontier left (exploration complete)
std::optional<GoalAction> frontier_goal(const ExploredMap& M, const AgentPose& pose,
                                        double voxel_size);

struct GreedyConfig {
    int radius = 2;       // local H sum window, in H-grid cells
    double beta = 0.02;   // geodesic distance penalty per cell
};

// argmax over reachable free cells of local disagreement minus a distance
// penalty; falls back to frontier_goal (then random) when H is all zero
GoalAction greedy_disagreement_goal(const DisagreementMap& H, const ExploredMap& M,
                                    const AgentPose& pose, double voxel_size,
                                    const GreedyConfig& cfg, Rng& rng);

constexpr int kPolicyFeatureDim = 6;
constexpr int kFeatureSpecVersion = 1;

struct LearnedPolicyParams {
    std::array<double, kPolicyFeatureDim> weights{};
    double temperature = 1.0;

    std::string to_json() const;
    static LearnedPolicyParams from_json(const std::string& text);
};

// hand-crafted features of a candidate cell: local normalized-H sums at three
// radii, distance to the agent, explored fraction nearby, frontier indicator
std::array<double, kPolicyFeatureDim> policy_features(const PolicyInput& input,
                                                      const ExploredMap& M, const Vec2i& cell,
                                                      double voxel_size);

std::vector<double> candidate_probabilities(const LearnedPolicyParams& params,
                                            const std::vector<std::array<double, kPolicyFeatureDim>>& feats);

// sample n_candidates known-free cells uniformly (with replacement de-duped,
// sorted for determinism)
std::vector<Vec2i> sample_candidates(const ExploredMap& M, int n_candidates, Rng& rng);

struct LearnedChoice {
    Vec2i cell;
    int index = 0;  // into the candidate list
    GoalAction goal;
};

LearnedChoice learned_goal(const LearnedPolicyParams& params, const PolicyInput& input,
                           const ExploredMap& M, const std::vector<Vec2i>& candidates,
                           double voxel_size, Rng& rng, bool argmax_mode = false);

struct DecisionRecord {
    std::vector<std::array<double, kPolicyFeatureDim>> candidate_features;
    int chosen = 0;
    double reward = 0;
};

// gradient of log pi(chosen | candidates) with respect to the weights
std::array<double, kPolicyFeatureDim> grad_log_policy(
    const LearnedPolicyParams& params,
    const std::vector<std::array<double, kPolicyFeatureDim>>& feats, int chosen);

// REINFORCE with a batch-mean-return baseline; returns updated params
LearnedPolicyParams reinforce_update(const LearnedPolicyParams& params,
                                     const std::vector<DecisionRecord>& trajectory, double gamma,
                                     double lr);

double compute_step_reward(const SemanticVoxelMap& before, const SemanticVoxelMap& after,
                           ScoreKind kind);

}  // namespace lookaround
