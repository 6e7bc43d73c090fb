#pragma once

#include <string>
#include <vector>

#include "lookaround/explored_map.hpp"
#include "lookaround/voxel_map.hpp"

namespace lookaround {

enum class ScoreKind { Entropy, Cos, Euc, Count };

ScoreKind score_kind_from_string(const std::string& s);
std::string to_string(ScoreKind k);

// entropy of the aggregated softmax, in [0, ln C]
double score_entropy(const SemanticVoxelMap& map, int u);
// mean pairwise cosine distance over Q(u); 0 for singleton sets
double score_cos(const SemanticVoxelMap& map, int u);
// mean pairwise Euclidean distance over Q(u); 0 for singleton sets
double score_euc(const SemanticVoxelMap& map, int u);
// distinct argmax classes over Q(u), minus one
double score_count(const SemanticVoxelMap& map, int u);

double score(const SemanticVoxelMap& map, int u, ScoreKind kind);

// sum of the selected score over all resolved instances
double total_score(const SemanticVoxelMap& map, ScoreKind kind);

struct DisagreementMap {
    int K = 128;
    double cell_size = 0;  // meters per cell
    std::vector<double> H;  // K*K, row-major

    double at(int i, int j) const { return H[static_cast<size_t>(j) * K + i]; }
    double& at(int i, int j) { return H[static_cast<size_t>(j) * K + i]; }
    double sum() const;
    double max() const;
    std::string to_csv() const;
};

// Each instance contributes its score once, at the cell containing its
// top-down footprint centroid. scene_extent is the map side length in meters.
DisagreementMap build_disagreement_map(const SemanticVoxelMap& map, ScoreKind kind, int K,
                                       double scene_extent);

struct PolicyInput {
    int K = 0;
    std::vector<double> disagreement;  // channel 0, normalized to [0,1]
    std::vector<double> explored;      // channel 1, with the agent cell at 1
    double orientation = 0;            // [0, 2pi)
    int agent_i = 0, agent_j = 0;      // agent cell in K x K coordinates
};

PolicyInput assemble_policy_input(const DisagreementMap& H, const ExploredMap& explored,
                                  const AgentPose& pose);

}  // namespace lookaround
