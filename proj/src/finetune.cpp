#include "lookaround/finetune.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace lookaround {

using json = nlohmann::json;

HeadParams HeadParams::init(int feature_dim, int n_classes, int proj_dim, uint64_t seed,
                            const HeadHyper& hyper) {
    HeadParams p;
    p.feature_dim = feature_dim;
    p.n_classes = n_classes;
    p.proj_dim = proj_dim;
    p.hyper = hyper;
    Rng rng(seed ^ 0x4ea09u);
    p.w_cls.assign(n_classes, std::vector<double>(feature_dim));
    p.b_cls.assign(n_classes, 0.0);
    p.w_proj.assign(proj_dim, std::vector<double>(feature_dim));
    p.b_proj.assign(proj_dim, 0.0);
    for (auto& row : p.w_cls) {
        for (double& w : row) w = 0.1 * rng.normal();
    }
    for (auto& row : p.w_proj) {
        for (double& w : row) w = 0.1 * rng.normal();
    }
    return p;
}

Forward forward(const HeadParams& params, const std::vector<double>& feature) {
    if (feature.size() != static_cast<size_t>(params.feature_dim)) {
        throw std::invalid_argument("forward: feature dimension mismatch");
    }
    for (double x : feature) {
        if (!std::isfinite(x)) throw std::invalid_argument("forward: non-finite feature");
    }
    Forward out;
    out.logits.resize(params.n_classes);
    for (int c = 0; c < params.n_classes; ++c) {
        double s = params.b_cls[c];
        for (int i = 0; i < params.feature_dim; ++i) s += params.w_cls[c][i] * feature[i];
        out.logits[c] = s;
    }
    out.projected.resize(params.proj_dim);
    for (int k = 0; k < params.proj_dim; ++k) {
        double s = params.b_proj[k];
        for (int i = 0; i < params.feature_dim; ++i) s += params.w_proj[k][i] * feature[i];
        out.projected[k] = s;
    }
    return out;
}

double loss_head(const std::vector<double>& logits, int label) {
    if (label < 0 || label >= static_cast<int>(logits.size())) {
        throw std::invalid_argument("loss_head: bad label");
    }
    std::vector<double> p = softmax(logits);
    return -std::log(std::max(p[label], 1e-300));
}

double loss_distil(const std::vector<double>& logits, const std::vector<double>& soft_target) {
    if (soft_target.size() != logits.size()) {
        throw std::invalid_argument("loss_distil: size mismatch");
    }
    std::vector<double> p = softmax(logits);
    double l = 0;
    for (size_t c = 0; c < p.size(); ++c) {
        l -= soft_target[c] * std::log(std::max(p[c], 1e-300));
    }
    return l;
}

namespace {

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double loss_triplet(const std::vector<double>& a, const std::vector<double>& p,
                    const std::vector<double>& n, double margin) {
    return std::max(l2_dist(a, p) - l2_dist(a, n) + margin, 0.0);
}

LossBreakdown loss_detection(const HeadParams& params, const std::vector<TrainSample>& batch,
                             const std::vector<FeatureTriplet>& triplets, double alpha,
                             double margin) {
    if (batch.empty()) throw std::invalid_argument("loss_detection: empty batch");
    const size_t B = batch.size();
    LossBreakdown out;
    out.grads.w_cls.assign(params.n_classes, std::vector<double>(params.feature_dim, 0.0));
    out.grads.b_cls.assign(params.n_classes, 0.0);
    out.grads.w_proj.assign(params.proj_dim, std::vector<double>(params.feature_dim, 0.0));
    out.grads.b_proj.assign(params.proj_dim, 0.0);

    std::vector<Forward> fwd(B);
    for (size_t i = 0; i < B; ++i) {
        fwd[i] = forward(params, batch[i].feature);
        out.head += loss_head(fwd[i].logits, batch[i].label);
        out.distil += loss_distil(fwd[i].logits, batch[i].soft_target);

        std::vector<double> p = softmax(fwd[i].logits);
        for (int c = 0; c < params.n_classes; ++c) {
            double g_head = p[c] - (c == batch[i].label ? 1.0 : 0.0);
            double g_distil = p[c] - batch[i].soft_target[c];
            double g = (g_head + alpha * g_distil) / static_cast<double>(B);
            out.grads.b_cls[c] += g;
            for (int k = 0; k < params.feature_dim; ++k) {
                out.grads.w_cls[c][k] += g * batch[i].feature[k];
            }
        }
    }
    out.head /= static_cast<double>(B);
    out.distil /= static_cast<double>(B);

    if (!triplets.empty()) {
        const double invT = 1.0 / static_cast<double>(triplets.size());
        for (const auto& t : triplets) {
            const auto& a = fwd[t.anchor].projected;
            const auto& p = fwd[t.positive].projected;
            const auto& n = fwd[t.negative].projected;
            double d_ap = l2_dist(a, p), d_an = l2_dist(a, n);
            double l = d_ap - d_an + margin;
            if (l <= 0) continue;  // clamped region: subgradient 0
            out.triplet += l * invT;
            std::vector<double> da(params.proj_dim, 0.0), dp(params.proj_dim, 0.0),
                dn(params.proj_dim, 0.0);
            for (int k = 0; k < params.proj_dim; ++k) {
                double u_ap = d_ap > 1e-12 ? (a[k] - p[k]) / d_ap : 0.0;
                double u_an = d_an > 1e-12 ? (a[k] - n[k]) / d_an : 0.0;
                da[k] = (u_ap - u_an) * invT;
                dp[k] = -u_ap * invT;
                dn[k] = u_an * invT;
            }
            const auto& fa = batch[t.anchor].feature;
            const auto& fp = batch[t.positive].feature;
            const auto& fn = batch[t.negative].feature;
            for (int k = 0; k < params.proj_dim; ++k) {
                out.grads.b_proj[k] += da[k] + dp[k] + dn[k];
                for (int i = 0; i < params.feature_dim; ++i) {
                    out.grads.w_proj[k][i] += da[k] * fa[i] + dp[k] * fp[i] + dn[k] * fn[i];
                }
            }
        }
    }
    out.total = out.triplet + alpha * out.distil + out.head;
    if (!std::isfinite(out.total)) throw std::runtime_error("loss_detection: non-finite loss");
    return out;
}

std::vector<FeatureTriplet> mine_batch_triplets(const std::vector<TrainSample>& batch, Rng& rng) {
    std::vector<FeatureTriplet> out;
    const int B = static_cast<int>(batch.size());
    for (int a = 0; a < B; ++a) {
        if (batch[a].u < 0) continue;
        for (int p = 0; p < B; ++p) {
            if (p == a || batch[p].u != batch[a].u) continue;
            std::vector<int> negatives;
            for (int n = 0; n < B; ++n) {
                if (batch[n].u != batch[a].u) negatives.push_back(n);
            }
            if (negatives.empty()) continue;
            out.push_back({a, p, static_cast<int>(negatives[rng.uniform_int(negatives.size())])});
        }
    }
    return out;
}

TrainResult train(const HeadParams& init, const std::vector<TrainSample>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    const HeadHyper& h = init.hyper;
    TrainResult res;
    res.params = init;
    HeadParams& p = res.params;

    HeadGradients vel;
    vel.w_cls.assign(p.n_classes, std::vector<double>(p.feature_dim, 0.0));
    vel.b_cls.assign(p.n_classes, 0.0);
    vel.w_proj.assign(p.proj_dim, std::vector<double>(p.feature_dim, 0.0));
    vel.b_proj.assign(p.proj_dim, 0.0);

    Rng rng(h.seed ^ 0x7a1b0c9dull);
    std::vector<size_t> order(dataset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto sgd_step = [&](std::vector<double>& param, std::vector<double>& v,
                        const std::vector<double>& g) {
        for (size_t i = 0; i < param.size(); ++i) {
            v[i] = h.momentum * v[i] + g[i] + h.weight_decay * param[i];
            param[i] -= h.lr * v[i];
            if (!std::isfinite(param[i])) throw std::runtime_error("train: diverged");
        }
    };

    for (int epoch = 0; epoch < h.epochs; ++epoch) {
        // deterministic Fisher-Yates shuffle
        for (size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_int(i)]);
        }
        EpochStats stats;
        size_t n_batches = 0;
        for (size_t start = 0; start < order.size(); start += h.batch_size) {
            size_t end = std::min(order.size(), start + h.batch_size);
            std::vector<TrainSample> batch;
            batch.reserve(end - start);
            for (size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);
            std::vector<FeatureTriplet> triplets = mine_batch_triplets(batch, rng);
            LossBreakdown lb = loss_detection(p, batch, triplets, h.alpha, h.margin);
            for (int c = 0; c < p.n_classes; ++c) sgd_step(p.w_cls[c], vel.w_cls[c], lb.grads.w_cls[c]);
            sgd_step(p.b_cls, vel.b_cls, lb.grads.b_cls);
            for (int k = 0; k < p.proj_dim; ++k) sgd_step(p.w_proj[k], vel.w_proj[k], lb.grads.w_proj[k]);
            sgd_step(p.b_proj, vel.b_proj, lb.grads.b_proj);
            stats.head += lb.head;
            stats.distil += lb.distil;
            stats.triplet += lb.triplet;
            stats.total += lb.total;
            ++n_batches;
        }
        if (n_batches > 0) {
            stats.head /= n_batches;
            stats.distil /= n_batches;
            stats.triplet /= n_batches;
            stats.total /= n_batches;
        }
        res.curve.push_back(stats);
    }
    return res;
}

HeadEval evaluate_head(const HeadParams& params, const std::vector<TrainSample>& holdout) {
    if (holdout.empty()) throw std::invalid_argument("evaluate_head: empty holdout");
    HeadEval ev;
    ev.per_class_accuracy.assign(params.n_classes, 0.0);
    ev.per_class_count.assign(params.n_classes, 0);
    std::vector<size_t> correct(params.n_classes, 0);
    size_t total_correct = 0;
    for (const auto& s : holdout) {
        Forward f = forward(params, s.feature);
        int pred = argmax(f.logits);
        ++ev.per_class_count[s.label];
        if (pred == s.label) {
            ++correct[s.label];
            ++total_correct;
        }
    }
    for (int c = 0; c < params.n_classes; ++c) {
        ev.per_class_accuracy[c] =
            ev.per_class_count[c] ? static_cast<double>(correct[c]) / ev.per_class_count[c] : 0.0;
    }
    ev.accuracy = static_cast<double>(total_correct) / holdout.size();
    return ev;
}

std::string HeadParams::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["feature_dim"] = feature_dim;
    j["n_classes"] = n_classes;
    j["proj_dim"] = proj_dim;
    j["w_cls"] = w_cls;
    j["b_cls"] = b_cls;
    j["w_proj"] = w_proj;
    j["b_proj"] = b_proj;
    j["hyper"] = {{"alpha", hyper.alpha},       {"margin", hyper.margin},
                  {"lr", hyper.lr},             {"momentum", hyper.momentum},
                  {"weight_decay", hyper.weight_decay}, {"epochs", hyper.epochs},
                  {"batch_size", hyper.batch_size},     {"seed", hyper.seed}};
    return j.dump();
}

HeadParams HeadParams::from_json(const std::string& text) {
    json j = json::parse(text);
    HeadParams p;
    p.feature_dim = j.at("feature_dim").get<int>();
    p.n_classes = j.at("n_classes").get<int>();
    p.proj_dim = j.at("proj_dim").get<int>();
    p.w_cls = j.at("w_cls").get<std::vector<std::vector<double>>>();
    p.b_cls = j.at("b_cls").get<std::vector<double>>();
    p.w_proj = j.at("w_proj").get<std::vector<std::vector<double>>>();
    p.b_proj = j.at("b_proj").get<std::vector<double>>();
    const auto& h = j.at("hyper");
    p.hyper.alpha = h.at("alpha").get<double>();
    p.hyper.margin = h.at("margin").get<double>();
    p.hyper.lr = h.at("lr").get<double>();
    p.hyper.momentum = h.at("momentum").get<double>();
    p.hyper.weight_decay = h.at("weight_decay").get<double>();
    p.hyper.epochs = h.at("epochs").get<int>();
    p.hyper.batch_size = h.at("batch_size").get<int>();
    p.hyper.seed = h.at("seed").get<uint64_t>();
    return p;
}

}  // namespace lookaround
