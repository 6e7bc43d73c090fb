// Command-line front end for the lookaround library: scene generation,
// exploration episodes, pseudo-label reconciliation, head fine-tuning,
// evaluation, score ablations, and report merging.
//
// All subcommands read the same JSON run-config (keys: scene, detector,
// policy, score, steps, n_replanning, seeds, eval, out). The LOOKAROUND_LOG
// environment variable selects log verbosity: quiet | info (default) | debug.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lookaround/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lookaround;

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel g_log = LogLevel::Info;

void init_log_level() {
    const char* env = std::getenv("LOOKAROUND_LOG");
    if (!env) return;
    std::string v(env);
    if (v == "quiet" || v == "0") {
        g_log = LogLevel::Quiet;
    } else if (v == "debug" || v == "2") {
        g_log = LogLevel::Debug;
    } else {
        g_log = LogLevel::Info;
    }
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
    if (g_log >= LogLevel::Info) {
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    if (g_log >= LogLevel::Debug) {
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

RunConfig load_config(const std::string& path) {
    RunConfig c = RunConfig::from_json_text(read_file(path));
    log_debug("config loaded from %s (%zu seeds)", path.c_str(), c.seeds.size());
    return c;
}

std::string samples_to_jsonl(const std::vector<TrainSample>& samples) {
    std::ostringstream out;
    out << json{{"schema_version", 1}, {"kind", "train_samples"},
                {"n_samples", samples.size()}}
            .dump()
        << "\n";
    for (const auto& s : samples) {
        out << json{{"feature", s.feature},
                    {"label", s.label},
                    {"soft_target", s.soft_target},
                    {"u", s.u}}
                .dump()
            << "\n";
    }
    return out.str();
}

std::vector<TrainSample> samples_from_jsonl(const std::string& text) {
    std::vector<TrainSample> out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.contains("kind")) continue;  // header record
        TrainSample s;
        s.feature = j.at("feature").get<std::vector<double>>();
        s.label = j.at("label").get<int>();
        s.soft_target = j.at("soft_target").get<std::vector<double>>();
        s.u = j.value("u", -1);
        out.push_back(std::move(s));
    }
    if (out.empty()) throw std::runtime_error("dataset contains no samples");
    return out;
}

void write_report(const MetricsReport& rep, const std::string& out_base) {
    write_file(out_base + ".json", rep.to_json_text());
    write_file(out_base + ".csv", rep.to_csv());
    log_info("report written to %s.{json,csv}", out_base.c_str());
}

int cmd_generate_scene(const std::string& config_path, uint64_t seed,
                       const std::string& out_path) {
    RunConfig c = load_config(config_path);
    Scene s = generate_scene(c.scene, seed);
    write_file(out_path, save_scene(s));
    log_info("scene seed=%llu: %dx%dx%d voxels, %zu objects -> %s",
             static_cast<unsigned long long>(seed), s.dims.x, s.dims.y, s.dims.z,
             s.objects.size(), out_path.c_str());
    return 0;
}

int cmd_explore(const std::string& config_path, const std::string& out_dir) {
    RunConfig c = load_config(config_path);
    std::string base = out_dir.empty() ? c.out_dir : out_dir;
    if (base.empty()) throw std::runtime_error("no output directory (--out or config.out)");
    for (uint64_t seed : c.seeds) {
        EpisodeResult ep = run_episode(c, seed);
        fs::path dir = fs::path(base) / ("seed_" + std::to_string(seed));
        write_file((dir / "trajectory.jsonl").string(), ep.trajectory_log);
        write_file((dir / "map.json").string(), ep.map.dump_json());
        write_file((dir / "pseudo_labels.jsonl").string(), ep.pseudo.to_jsonl());
        write_file((dir / "samples_reconciled.jsonl").string(),
                   samples_to_jsonl(build_train_samples(ep, false)));
        write_file((dir / "samples_raw.jsonl").string(),
                   samples_to_jsonl(build_train_samples(ep, true)));
        LabelAccuracy acc = label_accuracy(ep);
        json summary{{"schema_version", 1},
                     {"seed", seed},
                     {"n_frames", ep.frames.size()},
                     {"explored_fraction", ep.explored.explored_fraction()},
                     {"exploration_complete", ep.exploration_complete},
                     {"total_disagreement", ep.total_disagreement},
                     {"raw_label_accuracy", acc.raw},
                     {"reconciled_label_accuracy", acc.reconciled}};
        write_file((dir / "summary.json").string(), summary.dump(2));
        log_info("episode seed=%llu: %zu frames, explored %.1f%%, artifacts in %s",
                 static_cast<unsigned long long>(seed), ep.frames.size(),
                 100 * ep.explored.explored_fraction(), dir.string().c_str());
    }
    return 0;
}

int cmd_reconcile(const std::string& config_path, uint64_t seed, const std::string& out_path) {
    RunConfig c = load_config(config_path);
    EpisodeResult ep = run_episode(c, seed);
    write_file(out_path, ep.pseudo.to_jsonl());
    size_t n = 0;
    for (const auto& [fid, labels] : ep.pseudo.entries) n += labels.size();
    log_info("reconciliation seed=%llu: %zu pseudo labels over %zu frames -> %s",
             static_cast<unsigned long long>(seed), n, ep.pseudo.entries.size(),
             out_path.c_str());
    return 0;
}

int cmd_finetune(const std::string& dataset_path, double alpha, double margin, int epochs,
                 uint64_t seed, const std::string& out_path, const std::string& curve_path,
                 int feature_dim, int n_classes, int proj_dim) {
    std::vector<TrainSample> samples = samples_from_jsonl(read_file(dataset_path));
    int d = feature_dim > 0 ? feature_dim : static_cast<int>(samples.front().feature.size());
    int C = n_classes > 0 ? n_classes : static_cast<int>(samples.front().soft_target.size());
    HeadHyper hyper;
    hyper.alpha = alpha;
    hyper.margin = margin;
    hyper.epochs = epochs;
    hyper.seed = seed;
    HeadParams init = HeadParams::init(d, C, proj_dim, seed, hyper);
    TrainResult res = train(init, samples);
    write_file(out_path, res.params.to_json());
    std::ostringstream curve;
    curve << "epoch,loss_head,loss_distil,loss_triplet,loss_total\n";
    for (size_t e = 0; e < res.curve.size(); ++e) {
        curve << e << "," << res.curve[e].head << "," << res.curve[e].distil << ","
              << res.curve[e].triplet << "," << res.curve[e].total << "\n";
    }
    std::string cpath = curve_path.empty() ? out_path + ".curve.csv" : curve_path;
    write_file(cpath, curve.str());
    log_info("trained on %zu samples for %d epochs (alpha=%.2f): params -> %s, curve -> %s",
             samples.size(), epochs, alpha, out_path.c_str(), cpath.c_str());
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& out_base) {
    RunConfig c = load_config(config_path);
    std::vector<MetricsFragment> frags;
    for (uint64_t seed : c.seeds) {
        log_debug("pipeline seed %llu", static_cast<unsigned long long>(seed));
        frags.push_back(run_pipeline(c, seed));
    }
    write_report(report(frags), out_base);
    return 0;
}

int cmd_ablate_scores(const std::string& config_path, const std::string& out_base,
                      std::vector<std::string> values) {
    RunConfig c = load_config(config_path);
    if (values.empty()) values = {"entropy", "cos", "euc", "count"};
    write_report(ablate(c, AblationAxis::Score, values), out_base);
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_base) {
    std::vector<MetricsFragment> frags;
    for (const std::string& path : inputs) {
        json j = json::parse(read_file(path));
        for (const auto& f : j.at("fragments")) {
            MetricsFragment frag;
            frag.seed = f.at("seed").get<uint64_t>();
            frag.axis_value = f.at("axis_value").get<std::string>();
            frag.values = f.at("values").get<std::map<std::string, double>>();
            frags.push_back(std::move(frag));
        }
    }
    log_info("merged %zu fragments from %zu files", frags.size(), inputs.size());
    write_report(report(frags), out_base);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    init_log_level();
    CLI::App app{"lookaround: disagreement-driven exploration and multi-view "
                 "consensus labeling in synthetic voxel scenes"};
    app.require_subcommand(1);

    std::string config_path, out_path, dataset_path, curve_path;
    std::vector<std::string> inputs, values;
    uint64_t seed = 1;
    double alpha = 0.7, margin = 0.3;
    int epochs = 10, feature_dim = 0, n_classes = 0, proj_dim = 8;

    auto* gen = app.add_subcommand("generate-scene", "Generate a scene and save it as JSON");
    gen->add_option("--config", config_path, "Run-config JSON file")->required();
    gen->add_option("--seed", seed, "Generation seed");
    gen->add_option("--out", out_path, "Output scene file")->required();

    auto* exp = app.add_subcommand("explore",
                                   "Run exploration episodes for every configured seed");
    exp->add_option("--config", config_path, "Run-config JSON file")->required();
    exp->add_option("--out", out_path, "Output directory (default: config.out)");

    auto* rec = app.add_subcommand("reconcile",
                                   "Run one episode and emit its consensus pseudo labels");
    rec->add_option("--config", config_path, "Run-config JSON file")->required();
    rec->add_option("--seed", seed, "Episode seed");
    rec->add_option("--out", out_path, "Output pseudo-label JSONL file")->required();

    auto* fin = app.add_subcommand("finetune", "Train the classification head on a dataset");
    fin->add_option("--dataset", dataset_path, "Train-sample JSONL file")->required();
    fin->add_option("--alpha", alpha, "Distillation loss weight");
    fin->add_option("--margin", margin, "Triplet safe margin");
    fin->add_option("--epochs", epochs, "Training epochs");
    fin->add_option("--seed", seed, "Init/shuffle seed");
    fin->add_option("--out", out_path, "Output head-parameter JSON file")->required();
    fin->add_option("--curve", curve_path, "Training-curve CSV (default: <out>.curve.csv)");
    fin->add_option("--feature-dim", feature_dim, "Feature dim (default: from data)");
    fin->add_option("--n-classes", n_classes, "Class count (default: from data)");
    fin->add_option("--proj-dim", proj_dim, "Projection head dim");

    auto* ev = app.add_subcommand("evaluate",
                                  "Full pipeline per seed: episode, reconciliation, head "
                                  "training, holdout accuracy, mAP@50");
    ev->add_option("--config", config_path, "Run-config JSON file")->required();
    ev->add_option("--out", out_path, "Output report base path (writes .json and .csv)")
        ->required();

    auto* ab = app.add_subcommand("ablate-scores",
                                  "Sweep the disagreement score kind across seeds");
    ab->add_option("--config", config_path, "Run-config JSON file")->required();
    ab->add_option("--out", out_path, "Output report base path")->required();
    ab->add_option("--values", values, "Score kinds (default: entropy cos euc count)");

    auto* rep = app.add_subcommand("report", "Merge report JSON files and re-aggregate");
    rep->add_option("--in", inputs, "Input report JSON files")->required();
    rep->add_option("--out", out_path, "Output report base path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate_scene(config_path, seed, out_path);
        if (exp->parsed()) return cmd_explore(config_path, out_path);
        if (rec->parsed()) return cmd_reconcile(config_path, seed, out_path);
        if (fin->parsed()) {
            return cmd_finetune(dataset_path, alpha, margin, epochs, seed, out_path,
                                curve_path, feature_dim, n_classes, proj_dim);
        }
        if (ev->parsed()) return cmd_evaluate(config_path, out_path);
        if (ab->parsed()) return cmd_ablate_scores(config_path, out_path, values);
        if (rep->parsed()) return cmd_report(inputs, out_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
