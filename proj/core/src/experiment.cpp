#include "inspecta/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "inspecta/error.hpp"
#include "inspecta/hash.hpp"

namespace inspecta {

namespace {

using nlohmann::json;

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out) throw IoError("short write on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

json config_to_json(const ExperimentConfig& config, ModelKind kind) {
    const TrainConfig hp = kind == ModelKind::classifier
                               ? TrainConfig::classifier_defaults(0, config.seed)
                               : TrainConfig::detector_defaults(config.seed);
    json hyper{{"epochs", hp.epochs},
               {"learning_rate", hp.learning_rate},
               {"batch_size", hp.batch_size},
               {"alpha", hp.alpha},
               {"gamma", hp.gamma}};
    if (kind == ModelKind::detector) {
        hyper["window"] = hp.window;
        hyper["stride"] = hp.stride;
        hyper["tau_pos"] = hp.tau_pos;
        hyper["tau_neg"] = hp.tau_neg;
    }
    return json{{"experiment_id", config.experiment_id},
                {"kind", to_string(config.kind)},
                {"train_dataset", config.train_dataset},
                {"train_split", to_string(config.train_split)},
                {"test_dataset", config.test_dataset},
                {"test_split", to_string(config.test_split)},
                {"aggregation", to_string(config.aggregation)},
                {"seed", config.seed},
                {"ap_iou_threshold", config.ap_iou_threshold},
                {"hyperparameters", std::move(hyper)}};
}

ExperimentConfig config_from_json(const json& node) {
    ExperimentConfig config;
    config.experiment_id = node.at("experiment_id").get<std::string>();
    config.kind = model_kind_from_string(node.at("kind").get<std::string>());
    config.train_dataset = node.at("train_dataset").get<std::string>();
    if (node.contains("train_split"))
        config.train_split = split_from_string(node["train_split"].get<std::string>());
    config.test_dataset = node.at("test_dataset").get<std::string>();
    config.test_split = split_from_string(node.at("test_split").get<std::string>());
    if (node.contains("aggregation"))
        config.aggregation = aggregation_from_string(node["aggregation"].get<std::string>());
    if (node.contains("seed")) config.seed = node["seed"].get<std::uint64_t>();
    if (node.contains("ap_iou_threshold"))
        config.ap_iou_threshold = node["ap_iou_threshold"].get<double>();
    return config;
}

int image_size_of(const std::vector<LoadedSample>& samples) {
    if (samples.empty()) throw ValidationError("experiment: empty split");
    const int size = samples.front().image.width;
    for (const LoadedSample& sample : samples) {
        if (sample.image.width != size || sample.image.height != size)
            throw ValidationError("experiment: images are not uniformly sized");
    }
    return size;
}

}  // namespace

ResolvedDataset resolve_dataset(const std::filesystem::path& manifest_path) {
    return {load_manifest(manifest_path), manifest_path.parent_path()};
}

const std::filesystem::path& DatasetIndex::path_of(const std::string& name) const {
    auto it = manifest_paths.find(name);
    if (it == manifest_paths.end()) throw ConfigError("unknown dataset '" + name + "'");
    return it->second;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ResolvedDataset& train,
                                const ResolvedDataset& test) {
    const auto start = std::chrono::steady_clock::now();

    const std::vector<LoadedSample> train_samples =
        load_split(train.manifest, train.root, config.train_split);
    if (train_samples.empty())
        throw ValidationError("experiment '" + config.experiment_id + "': train split is empty");

    TrainResult trained;
    if (config.kind == ModelKind::classifier) {
        trained = train_classifier(
            train_samples, TrainConfig::classifier_defaults(image_size_of(train_samples), config.seed));
    } else {
        trained = train_detector(train_samples, TrainConfig::detector_defaults(config.seed));
    }

    ExperimentReport report = evaluate_model(trained.params, config, test);
    report.train_final_loss = trained.final_loss;
    report.positive_windows = trained.positive_windows;
    report.negative_windows = trained.negative_windows;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetIndex& index) {
    const ResolvedDataset train = resolve_dataset(index.path_of(config.train_dataset));
    const ResolvedDataset test = config.test_dataset == config.train_dataset
                                     ? train
                                     : resolve_dataset(index.path_of(config.test_dataset));
    return run_experiment(config, train, test);
}

ExperimentReport evaluate_model(const ModelParams& params, const ExperimentConfig& config,
                                const ResolvedDataset& test) {
    ExperimentReport report;
    report.config = config;
    report.config_hash = hash_hex(config_to_json(config, config.kind).dump());

    const std::vector<LoadedSample> test_samples =
        load_split(test.manifest, test.root, config.test_split);
    if (test_samples.empty())
        throw ValidationError("experiment '" + config.experiment_id + "': test split is empty");

    std::vector<std::vector<BBox>> gts;
    for (const LoadedSample& sample : test_samples) {
        ScoredLabel scored;
        scored.image_id = sample.image_id;
        scored.truth = sample.label;
        if (params.kind == ModelKind::detector) {
            std::vector<Detection> detections = detect(params, sample.image);
            double value = 0.0;
            if (!detections.empty()) {
                value = detections.front().score;
                for (const Detection& d : detections) {
                    value = config.aggregation == Aggregation::max_box ? std::max(value, d.score)
                                                                       : std::min(value, d.score);
                }
            }
            scored.score = value;
            report.detections.push_back(std::move(detections));
        } else {
            scored.score = image_score(params, sample.image, config.aggregation);
            report.detections.emplace_back();
        }
        gts.push_back(sample.gt_boxes);
        report.scored.push_back(std::move(scored));
    }

    const ScoreSummary summary = evaluate_scored(report.scored, 0.5);
    report.auc = summary.auc;
    report.confusion = summary.confusion;
    report.roc = summary.roc;

    if (params.kind == ModelKind::detector) {
        long long total_gt = 0;
        for (const auto& g : gts) total_gt += static_cast<long long>(g.size());
        if (total_gt > 0) report.ap = average_precision(report.detections, gts, config.ap_iou_threshold);
    }
    return report;
}

std::string report_to_json(const ExperimentReport& report) {
    json scored = json::array();
    for (const ScoredLabel& s : report.scored) {
        scored.push_back(json{{"image_id", s.image_id}, {"score", s.score}, {"truth", to_string(s.truth)}});
    }
    json root{{"config", config_to_json(report.config, report.config.kind)},
              {"config_hash", report.config_hash},
              {"auc", report.auc},
              {"ap", report.ap ? json(*report.ap) : json(nullptr)},
              {"confusion", json{{"tp", report.confusion.tp},
                                 {"fn", report.confusion.fn},
                                 {"fp", report.confusion.fp},
                                 {"tn", report.confusion.tn},
                                 {"threshold", 0.5}}},
              {"scored_labels", std::move(scored)},
              {"train_diagnostics", json{{"final_loss", report.train_final_loss},
                                         {"positive_windows", report.positive_windows},
                                         {"negative_windows", report.negative_windows}}}};
    return root.dump(2) + "\n";
}

std::string predictions_to_json(const ExperimentReport& report) {
    json images = json::array();
    for (std::size_t i = 0; i < report.scored.size(); ++i) {
        json detections = json::array();
        if (i < report.detections.size()) {
            for (const Detection& d : report.detections[i]) {
                detections.push_back(json{{"x_min", d.box.x_min},
                                          {"y_min", d.box.y_min},
                                          {"x_max", d.box.x_max},
                                          {"y_max", d.box.y_max},
                                          {"score", d.score}});
            }
        }
        images.push_back(json{{"image_id", report.scored[i].image_id},
                              {"score", report.scored[i].score},
                              {"detections", std::move(detections)}});
    }
    const json root{{"model_id", report.config.experiment_id},
                    {"aggregation", to_string(report.config.aggregation)},
                    {"images", std::move(images)}};
    return root.dump(2) + "\n";
}

ReportDigest read_report_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open report: " + path.string());
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded()) throw IoError("invalid report JSON: " + path.string());

    ReportDigest digest;
    digest.experiment_id = root.at("config").at("experiment_id").get<std::string>();
    digest.auc = root.at("auc").get<double>();
    for (const json& node : root.at("scored_labels")) {
        digest.scored.push_back({node.at("image_id").get<std::string>(),
                                 node.at("score").get<double>(),
                                 label_from_string(node.at("truth").get<std::string>())});
    }
    return digest;
}

void write_experiment_outputs(const ExperimentReport& report, const std::filesystem::path& dir,
                              const ModelParams* params) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create experiment directory " + dir.string() + ": " + ec.message());
    write_file_atomic(dir / "report.json", report_to_json(report));
    write_file_atomic(dir / "predictions.json", predictions_to_json(report));
    write_file_atomic(dir / "roc.csv", roc_to_csv(report.roc));
    if (params != nullptr) save_model(*params, dir / "model.bin");
}

int thread_cap() {
    if (const char* env = std::getenv("INSPECTA_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed >= 1) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

MatrixResult run_matrix(const std::vector<ExperimentConfig>& configs, const DatasetIndex& index,
                        const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create matrix directory " + out_dir.string() + ": " + ec.message());

    MatrixResult result;
    result.rows.resize(configs.size());

    const int workers = std::max(1, std::min<int>(thread_cap(), static_cast<int>(configs.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            MatrixRow& row = result.rows[i];
            row.config = configs[i];
            try {
                ExperimentReport report = run_experiment(configs[i], index);
                write_experiment_outputs(report, out_dir / configs[i].experiment_id, nullptr);
                row.ok = true;
                row.auc = report.auc;
                row.ap = report.ap;
                row.confusion = report.confusion;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };

    if (workers <= 1 || configs.size() <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    for (const MatrixRow& row : result.rows) result.failures += row.ok ? 0 : 1;
    write_file_atomic(out_dir / "summary.csv", matrix_summary_csv(result));
    return result;
}

std::string matrix_summary_csv(const MatrixResult& result) {
    std::ostringstream out;
    out << "experiment,kind,train,test,auc,ap,tp,fn,fp,tn\n";
    out.precision(6);
    out << std::fixed;
    for (const MatrixRow& row : result.rows) {
        out << row.config.experiment_id << ',' << to_string(row.config.kind) << ','
            << row.config.train_dataset << ':' << to_string(row.config.train_split) << ','
            << row.config.test_dataset << ':' << to_string(row.config.test_split) << ',';
        if (!row.ok) {
            out << "failed,,,,,\n";
            continue;
        }
        out << row.auc << ',';
        if (row.ap) out << *row.ap;
        out << ',' << row.confusion.tp << ',' << row.confusion.fn << ',' << row.confusion.fp << ','
            << row.confusion.tn << '\n';
    }
    return out.str();
}

std::vector<ExperimentConfig> default_matrix(const std::string& uniform_name,
                                             const std::string& diverse_name, std::uint64_t seed) {
    // Paper-table numbering: experiments 1/2 are in-dataset uniform, 4 the
    // uniform->diverse cross, 5/6 in-dataset diverse, 7 diverse->uniform
    // (number 3 is unused there and stays unused here).
    struct RowSpec {
        int number;
        const std::string& train;
        const std::string& test;
        Split test_split;
    };
    const RowSpec rows[] = {
        {1, uniform_name, uniform_name, Split::validation},
        {2, uniform_name, uniform_name, Split::holdout},
        {4, uniform_name, diverse_name, Split::holdout},
        {5, diverse_name, diverse_name, Split::validation},
        {6, diverse_name, diverse_name, Split::holdout},
        {7, diverse_name, uniform_name, Split::holdout},
    };

    std::vector<ExperimentConfig> configs;
    for (ModelKind kind : {ModelKind::classifier, ModelKind::detector}) {
        for (const RowSpec& row : rows) {
            ExperimentConfig config;
            config.experiment_id = std::string(to_string(kind)) + "-" + std::to_string(row.number);
            config.kind = kind;
            config.train_dataset = row.train;
            config.train_split = Split::train;
            config.test_dataset = row.test;
            config.test_split = row.test_split;
            config.seed = seed;
            configs.push_back(std::move(config));
        }
    }
    return configs;
}

MatrixSpec load_matrix_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open matrix config: " + path.string());
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        throw ConfigError("matrix config: invalid JSON in " + path.string());

    MatrixSpec spec;
    if (!root.contains("datasets") || !root["datasets"].is_object())
        throw ConfigError("matrix config: missing 'datasets' object");
    for (auto it = root["datasets"].begin(); it != root["datasets"].end(); ++it) {
        std::filesystem::path manifest = it.value().get<std::string>();
        if (manifest.is_relative()) manifest = path.parent_path() / manifest;
        spec.index.manifest_paths[it.key()] = manifest;
    }

    if (root.contains("experiments")) {
        for (const json& node : root["experiments"]) spec.configs.push_back(config_from_json(node));
    } else if (root.contains("default_matrix")) {
        const json& dm = root["default_matrix"];
        spec.configs = default_matrix(dm.at("uniform").get<std::string>(),
                                      dm.at("diverse").get<std::string>(),
                                      dm.value("seed", std::uint64_t{0}));
    } else {
        throw ConfigError("matrix config: need 'experiments' or 'default_matrix'");
    }

    for (const ExperimentConfig& config : spec.configs) {
        spec.index.path_of(config.train_dataset);
        spec.index.path_of(config.test_dataset);
    }
    return spec;
}

AblationReport run_ablation(const std::filesystem::path& train_manifest, ModelKind kind,
                            const std::filesystem::path& test_manifest, Split test_split,
                            std::uint64_t seed, const std::filesystem::path& out_dir) {
    constexpr int kMinK = 3;
    constexpr int kMaxK = 25;

    const ResolvedDataset train = resolve_dataset(train_manifest);
    const ResolvedDataset test = resolve_dataset(test_manifest);

    const std::vector<LoadedSample> train_samples = load_split(train.manifest, train.root, Split::train);
    if (train_samples.size() < 2 * kMinK)
        throw ValidationError("run_ablation: train split needs at least " +
                              std::to_string(2 * kMinK) + " images, has " +
                              std::to_string(train_samples.size()));

    std::vector<std::vector<double>> features;
    std::vector<std::string> ids;
    for (const LoadedSample& sample : train_samples) {
        features.push_back(curation_features(sample.image));
        ids.push_back(sample.image_id);
    }

    AblationReport report;
    report.silhouette = select_k(features, ids, kMinK, kMaxK);

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "manifests", ec);
    if (ec) throw IoError("cannot create ablation directory: " + ec.message());
    write_file_atomic(out_dir / "cluster_report.json", cluster_report_to_json(report.silhouette));

    ExperimentConfig base;
    base.experiment_id = "ablation-baseline";
    base.kind = kind;
    base.train_dataset = train.manifest.name;
    base.train_split = Split::train;
    base.test_dataset = test.manifest.name;
    base.test_split = test_split;
    base.seed = seed;
    report.base_config = base;

    report.baseline = run_experiment(base, train, test);
    write_experiment_outputs(report.baseline, out_dir / "experiments" / base.experiment_id, nullptr);

    const std::vector<AblationManifest> ablations =
        ablation_manifests(train.manifest, report.silhouette.chosen);
    const std::filesystem::path rebase =
        std::filesystem::relative(train.root, out_dir / "manifests");
    for (const AblationManifest& ablation : ablations) {
        DatasetManifest on_disk = ablation.manifest;
        for (Sample& sample : on_disk.samples) {
            sample.image_path = (rebase / sample.image_path).generic_string();
        }
        save_manifest(on_disk, out_dir / "manifests" / (ablation.manifest.name + ".json"));

        ExperimentConfig config = base;
        config.experiment_id = "ablation-excl-" + std::to_string(ablation.cluster);
        config.train_dataset = ablation.manifest.name;
        ExperimentReport run = run_experiment(config, {ablation.manifest, train.root}, test);
        write_experiment_outputs(run, out_dir / "experiments" / config.experiment_id, nullptr);

        AblationClusterResult row;
        row.cluster = ablation.cluster;
        row.excluded_count = ablation.excluded_count;
        row.excluded_fraction = ablation.excluded_fraction;
        row.auc = run.auc;
        row.delta = report.baseline.auc - run.auc;
        report.clusters.push_back(row);
    }

    write_file_atomic(out_dir / "ablation_report.json", ablation_report_to_json(report));
    return report;
}

std::string ablation_report_to_json(const AblationReport& report) {
    json clusters = json::array();
    for (const AblationClusterResult& row : report.clusters) {
        clusters.push_back(json{{"cluster", row.cluster},
                                {"excluded_count", row.excluded_count},
                                {"excluded_fraction", row.excluded_fraction},
                                {"auc", row.auc},
                                {"delta", row.delta}});
    }
    json scores = json::object();
    for (const auto& [k, score] : report.silhouette.scores) scores[std::to_string(k)] = score;
    const json root{{"config", json{{"kind", to_string(report.base_config.kind)},
                                    {"train_dataset", report.base_config.train_dataset},
                                    {"test_dataset", report.base_config.test_dataset},
                                    {"test_split", to_string(report.base_config.test_split)},
                                    {"seed", report.base_config.seed}}},
                    {"chosen_k", report.silhouette.chosen_k},
                    {"silhouette_scores", std::move(scores)},
                    {"baseline_auc", report.baseline.auc},
                    {"clusters", std::move(clusters)}};
    return root.dump(2) + "\n";
}

}  // namespace inspecta
