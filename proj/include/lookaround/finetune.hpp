#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lookaround/core.hpp"

namespace lookaround {

struct HeadHyper {
    double alpha = 0.7;        // distillation weight
    double margin = 0.3;       // triplet safe margin
    double lr = 1e-4;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    int epochs = 10;
    int batch_size = 16;
    uint64_t seed = 0;
};

// affine classifier (d -> C) plus linear feature projector (d -> d_p)
struct HeadParams {
    int feature_dim = 0, n_classes = 0, proj_dim = 0;
    std::vector<std::vector<double>> w_cls;  // C x d
    std::vector<double> b_cls;               // C
    std::vector<std::vector<double>> w_proj; // d_p x d
    std::vector<double> b_proj;              // d_p
    HeadHyper hyper;

    static HeadParams init(int feature_dim, int n_classes, int proj_dim, uint64_t seed,
                           const HeadHyper& hyper = {});
    std::string to_json() const;
    static HeadParams from_json(const std::string& text);
};

struct TrainSample {
    std::vector<double> feature;
    int label = 0;                   // hard target
    std::vector<double> soft_target; // lambda_bar, in the simplex
    int u = -1;                      // instance id, drives triplet mining
};

struct FeatureTriplet {
    int anchor = 0, positive = 0, negative = 0;  // indices into the batch
};

struct Forward {
    std::vector<double> logits;
    std::vector<double> projected;
};

Forward forward(const HeadParams& params, const std::vector<double>& feature);

double loss_head(const std::vector<double>& logits, int label);
double loss_distil(const std::vector<double>& logits, const std::vector<double>& soft_target);
double loss_triplet(const std::vector<double>& a, const std::vector<double>& p,
                    const std::vector<double>& n, double margin);

struct HeadGradients {
    std::vector<std::vector<double>> w_cls;
    std::vector<double> b_cls;
    std::vector<std::vector<double>> w_proj;
    std::vector<double> b_proj;
};

struct LossBreakdown {
    double total = 0, head = 0, distil = 0, triplet = 0;
    HeadGradients grads;
};

// mean-per-term composite L_im + alpha * L_distil + L_head with analytic
// gradients (triplet clamp uses subgradient 0 at the boundary)
LossBreakdown loss_detection(const HeadParams& params, const std::vector<TrainSample>& batch,
                             const std::vector<FeatureTriplet>& triplets, double alpha,
                             double margin);

// ordered same-u cross-sample pairs inside the batch, one rng-picked negative each
std::vector<FeatureTriplet> mine_batch_triplets(const std::vector<TrainSample>& batch, Rng& rng);

struct EpochStats {
    double head = 0, distil = 0, triplet = 0, total = 0;
};

struct TrainResult {
    HeadParams params;
    std::vector<EpochStats> curve;
};

TrainResult train(const HeadParams& init, const std::vector<TrainSample>& dataset);

struct HeadEval {
    double accuracy = 0;
    std::vector<double> per_class_accuracy;
    std::vector<size_t> per_class_count;
};

HeadEval evaluate_head(const HeadParams& params, const std::vector<TrainSample>& holdout);

}  // namespace lookaround
