#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inspecta/cluster.hpp"
#include "inspecta/detect.hpp"
#include "inspecta/manifest.hpp"
#include "inspecta/metrics.hpp"
#include "inspecta/train.hpp"

namespace inspecta {

struct ExperimentConfig {
    std::string experiment_id;
    ModelKind kind = ModelKind::classifier;
    std::string train_dataset;
    Split train_split = Split::train;
    std::string test_dataset;
    Split test_split = Split::validation;
    Aggregation aggregation = Aggregation::max_box;
    std::uint64_t seed = 0;
    double ap_iou_threshold = 0.1;  // window boxes are coarse; see README
};

/// The unit of persistence for every experiment. wall_seconds is runtime
/// telemetry and is deliberately not serialized: reports are byte-exact
/// reproducible from (config, seed, datasets).
struct ExperimentReport {
    ExperimentConfig config;
    std::string config_hash;
    double auc = 0.0;
    std::optional<double> ap;  // detector only
    ConfusionMatrix confusion;  // at threshold 0.5
    std::vector<ScoredLabel> scored;
    std::vector<std::vector<Detection>> detections;  // aligned with scored
    RocCurve roc;
    double train_final_loss = 0.0;
    long long positive_windows = 0;
    long long negative_windows = 0;
    double wall_seconds = 0.0;
};

struct ResolvedDataset {
    DatasetManifest manifest;
    std::filesystem::path root;
};

ResolvedDataset resolve_dataset(const std::filesystem::path& manifest_path);

/// Maps dataset names to manifest files; the unit the CLI works with.
struct DatasetIndex {
    std::map<std::string, std::filesystem::path> manifest_paths;

    const std::filesystem::path& path_of(const std::string& name) const;
};

/// Trains on the configured train split, scores every test-split image by
/// image_score, computes AUC / confusion (and AP for detectors).
ExperimentReport run_experiment(const ExperimentConfig& config, const ResolvedDataset& train,
                                const ResolvedDataset& test);
ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetIndex& index);

/// Scores a test split with an already-trained model (the `eval` verb).
ExperimentReport evaluate_model(const ModelParams& params, const ExperimentConfig& config,
                                const ResolvedDataset& test);

std::string report_to_json(const ExperimentReport& report);
std::string predictions_to_json(const ExperimentReport& report);

/// Minimal reread of a report file: id, auc, scored labels (for ROC).
struct ReportDigest {
    std::string experiment_id;
    double auc = 0.0;
    std::vector<ScoredLabel> scored;
};
ReportDigest read_report_digest(const std::filesystem::path& path);

/// Writes report.json, predictions.json, roc.csv (+ model.bin if params
/// given) atomically under `dir`.
void write_experiment_outputs(const ExperimentReport& report, const std::filesystem::path& dir,
                              const ModelParams* params);

struct MatrixRow {
    ExperimentConfig config;
    bool ok = false;
    std::string error;
    double auc = 0.0;
    std::optional<double> ap;
    ConfusionMatrix confusion;
};

struct MatrixResult {
    std::vector<MatrixRow> rows;
    int failures = 0;
};

/// Runs every experiment (failures do not stop the matrix), writes one
/// output directory per experiment plus summary.csv. Rows may run
/// concurrently; INSPECTA_THREADS caps the worker count.
MatrixResult run_matrix(const std::vector<ExperimentConfig>& configs, const DatasetIndex& index,
                        const std::filesystem::path& out_dir);

std::string matrix_summary_csv(const MatrixResult& result);

/// The Tables 3-8 pattern: {uniform, diverse} x {own validation, own
/// holdout, other's holdout} x {classifier, detector}; ids follow the
/// tables' experiment numbering (1,2,4,5,6,7 per kind).
std::vector<ExperimentConfig> default_matrix(const std::string& uniform_name,
                                             const std::string& diverse_name, std::uint64_t seed);

/// Matrix config JSON: {"datasets":{name:path},"experiments":[...]} or
/// {"datasets":...,"default_matrix":{"uniform":name,"diverse":name,"seed":N}}.
struct MatrixSpec {
    DatasetIndex index;
    std::vector<ExperimentConfig> configs;
};
MatrixSpec load_matrix_spec(const std::filesystem::path& path);

struct AblationClusterResult {
    int cluster = 0;
    int excluded_count = 0;
    double excluded_fraction = 0.0;
    double auc = 0.0;
    double delta = 0.0;  // baseline auc - this auc
};

struct AblationReport {
    ExperimentConfig base_config;
    SilhouetteReport silhouette;
    ExperimentReport baseline;
    std::vector<AblationClusterResult> clusters;
};

/// Clusters the train split (select_k over curation features), emits one
/// ablation manifest per cluster, trains/evaluates each plus the full-data
/// baseline, and reports per-cluster AUC deltas.
AblationReport run_ablation(const std::filesystem::path& train_manifest, ModelKind kind,
                            const std::filesystem::path& test_manifest, Split test_split,
                            std::uint64_t seed, const std::filesystem::path& out_dir);

std::string ablation_report_to_json(const AblationReport& report);

/// Worker cap from INSPECTA_THREADS (falls back to hardware concurrency).
int thread_cap();

}  // namespace inspecta
