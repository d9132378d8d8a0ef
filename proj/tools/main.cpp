// inspecta: synthetic defect-inspection benchmark harness.
//
// Subcommands: gen, train, eval, matrix, ablate, plot-roc.
// Exit codes: 0 success, 1 experiment/runtime failure, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inspecta/detect.hpp"
#include "inspecta/error.hpp"
#include "inspecta/experiment.hpp"
#include "inspecta/manifest.hpp"
#include "inspecta/model.hpp"
#include "inspecta/roc_svg.hpp"
#include "inspecta/syngen.hpp"
#include "inspecta/train.hpp"

namespace fs = std::filesystem;
using namespace inspecta;

namespace {

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find(sep, start);
        if (end == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

// "<manifest path>:<split>"; the split is after the last colon.
std::pair<fs::path, Split> parse_dataset_ref(const std::string& text) {
    const std::size_t pos = text.rfind(':');
    if (pos == std::string::npos || pos + 1 == text.size())
        throw ConfigError("expected <manifest>:<split>, got '" + text + "'");
    return {fs::path(text.substr(0, pos)), split_from_string(text.substr(pos + 1))};
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
    const syngen::GeneratorConfig config = syngen::load_generator_config(config_path);
    const syngen::GeneratedDataset dataset = syngen::gen_dataset(config, out_dir);
    long long ng = 0;
    for (const Sample& sample : dataset.manifest.samples) ng += sample.label == Label::ng ? 1 : 0;
    std::printf("generated %s: %zu samples (%lld NG) -> %s\n", dataset.manifest.name.c_str(),
                dataset.manifest.samples.size(), ng, dataset.dir.string().c_str());
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& kind_text, std::uint64_t seed,
              const std::string& out_path) {
    const ModelKind kind = model_kind_from_string(kind_text);
    const ResolvedDataset dataset = resolve_dataset(manifest_path);
    const std::vector<LoadedSample> samples = load_split(dataset.manifest, dataset.root, Split::train);
    if (samples.empty()) throw ValidationError("train: manifest has an empty train split");

    TrainResult result;
    if (kind == ModelKind::classifier) {
        result = train_classifier(samples,
                                  TrainConfig::classifier_defaults(samples.front().image.width, seed));
        std::printf("trained classifier on %zu images, final loss %.6f\n", samples.size(),
                    result.final_loss);
    } else {
        result = train_detector(samples, TrainConfig::detector_defaults(seed));
        std::printf("trained detector on %zu images (%lld pos / %lld neg windows), final loss %.6f\n",
                    samples.size(), result.positive_windows, result.negative_windows,
                    result.final_loss);
    }
    save_model(result.params, out_path);
    std::printf("model written to %s\n", out_path.c_str());
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& manifest_path,
             const std::string& split_text, const std::string& aggregation_text,
             const std::string& out_path) {
    const ModelParams params = load_model(model_path);
    const ResolvedDataset dataset = resolve_dataset(manifest_path);

    ExperimentConfig config;
    config.experiment_id = "eval";
    config.kind = params.kind;
    config.train_dataset = "(pretrained)";
    config.test_dataset = dataset.manifest.name;
    config.test_split = split_from_string(split_text);
    config.aggregation = aggregation_from_string(aggregation_text);

    const ExperimentReport report = evaluate_model(params, config, dataset);

    const fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    {
        std::ofstream file(out, std::ios::binary | std::ios::trunc);
        if (!file) throw IoError("cannot write report: " + out.string());
        file << report_to_json(report);
    }
    const fs::path stem = out.parent_path() / out.stem();
    write_roc_csv(report.roc, stem.string() + ".roc.csv");
    {
        std::ofstream file(stem.string() + ".predictions.json", std::ios::binary | std::ios::trunc);
        file << predictions_to_json(report);
    }

    std::printf("eval %s on %s/%s: auc %.4f", to_string(params.kind),
                dataset.manifest.name.c_str(), split_text.c_str(), report.auc);
    if (report.ap) std::printf(", ap %.4f", *report.ap);
    std::printf(" (tp %lld fn %lld fp %lld tn %lld)\n", report.confusion.tp, report.confusion.fn,
                report.confusion.fp, report.confusion.tn);
    return 0;
}

int cmd_matrix(const std::string& config_path, const std::string& out_dir) {
    const MatrixSpec spec = load_matrix_spec(config_path);
    const MatrixResult result = run_matrix(spec.configs, spec.index, out_dir);
    std::printf("%s", matrix_summary_csv(result).c_str());
    if (result.failures > 0) {
        std::fprintf(stderr, "matrix: %d of %zu experiments failed\n", result.failures,
                     result.rows.size());
        for (const MatrixRow& row : result.rows) {
            if (!row.ok)
                std::fprintf(stderr, "  %s: %s\n", row.config.experiment_id.c_str(), row.error.c_str());
        }
        return 1;
    }
    return 0;
}

int cmd_ablate(const std::string& manifest_path, const std::string& kind_text,
               const std::string& test_ref, std::uint64_t seed, const std::string& out_dir) {
    const ModelKind kind = model_kind_from_string(kind_text);
    const auto [test_manifest, test_split] = parse_dataset_ref(test_ref);
    const AblationReport report =
        run_ablation(manifest_path, kind, test_manifest, test_split, seed, out_dir);

    std::printf("ablation over %d clusters (chosen by silhouette), baseline auc %.4f\n",
                report.silhouette.chosen_k, report.baseline.auc);
    for (const AblationClusterResult& row : report.clusters) {
        std::printf("  excl cluster %d (%d images, %.0f%%): auc %.4f (delta %+.4f)\n", row.cluster,
                    row.excluded_count, 100.0 * row.excluded_fraction, row.auc, -row.delta);
    }
    return 0;
}

int cmd_plot_roc(const std::string& reports_list, const std::string& out_path) {
    std::vector<std::pair<std::string, RocCurve>> curves;
    for (const std::string& path : split_list(reports_list, ',')) {
        if (path.empty()) continue;
        const ReportDigest digest = read_report_digest(path);
        curves.emplace_back(digest.experiment_id, roc_curve(digest.scored));
    }
    render_roc_svg(curves, out_path);
    std::printf("wrote %s (%zu curves)\n", out_path.c_str(), curves.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inspecta: defect-inspection benchmark harness"};
    app.require_subcommand(1);

    std::string config_path, out_path, manifest_path, kind_text = "classifier";
    std::string model_path, split_text = "validation", aggregation_text = "max";
    std::string test_ref, reports_list;
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    gen->add_option("--config", config_path, "Generator config JSON")->required();
    gen->add_option("--out", out_path, "Output root directory")->required();

    auto* train = app.add_subcommand("train", "Train a model on a manifest's train split");
    train->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();
    train->add_option("--kind", kind_text, "classifier|detector")->required();
    train->add_option("--seed", seed, "Training seed");
    train->add_option("--out", out_path, "Output model file")->required();

    auto* eval = app.add_subcommand("eval", "Score a split with a trained model");
    eval->add_option("--model", model_path, "Model file")->required();
    eval->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();
    eval->add_option("--split", split_text, "validation|holdout");
    eval->add_option("--aggregation", aggregation_text, "max|min (detector box-score aggregation)");
    eval->add_option("--out", out_path, "Output report JSON")->required();

    auto* matrix = app.add_subcommand("matrix", "Run an experiment matrix");
    matrix->add_option("--config", config_path, "Matrix config JSON")->required();
    matrix->add_option("--out", out_path, "Output directory")->required();

    auto* ablate = app.add_subcommand("ablate", "Cluster-exclusion training-data ablation");
    ablate->add_option("--manifest", manifest_path, "Train dataset manifest")->required();
    ablate->add_option("--kind", kind_text, "classifier|detector")->required();
    ablate->add_option("--test", test_ref, "<manifest>:<split> to evaluate on")->required();
    ablate->add_option("--seed", seed, "Training seed");
    ablate->add_option("--out", out_path, "Output directory")->required();

    auto* plot = app.add_subcommand("plot-roc", "Render ROC curves from reports to SVG");
    plot->add_option("--reports", reports_list, "Comma-separated report.json paths")->required();
    plot->add_option("--out", out_path, "Output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(config_path, out_path);
        if (train->parsed()) return cmd_train(manifest_path, kind_text, seed, out_path);
        if (eval->parsed())
            return cmd_eval(model_path, manifest_path, split_text, aggregation_text, out_path);
        if (matrix->parsed()) return cmd_matrix(config_path, out_path);
        if (ablate->parsed()) return cmd_ablate(manifest_path, kind_text, test_ref, seed, out_path);
        if (plot->parsed()) return cmd_plot_roc(reports_list, out_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
