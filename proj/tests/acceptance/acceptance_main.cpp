// Acceptance suite: every release criterion as an executable check, one
// pass/fail line per criterion. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "inspecta/cluster.hpp"
#include "inspecta/detect.hpp"
#include "inspecta/experiment.hpp"
#include "inspecta/loss.hpp"
#include "inspecta/manifest.hpp"
#include "inspecta/metrics.hpp"
#include "inspecta/model.hpp"
#include "inspecta/rng.hpp"
#include "inspecta/syngen.hpp"
#include "inspecta/train.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace inspecta;

namespace {

struct Criterion {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& label) {
        if (!condition) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED: " + label;
        }
    }
    void note(const std::string& text) {
        if (!detail.empty()) detail += "; ";
        detail += text;
    }
};

std::string file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string format_double(double v, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// Shared full-scale pipeline state for criteria 4-7: datasets generated and
// models trained exactly once.
struct Pipeline {
    fs::path root;
    syngen::GeneratedDataset uniform;
    syngen::GeneratedDataset diverse;
    ModelParams clf_uniform, det_uniform, clf_diverse, det_diverse;

    double auc_of(const ModelParams& params, const syngen::GeneratedDataset& dataset, Split split,
                  std::vector<ScoredLabel>* out_scored = nullptr) const {
        ExperimentConfig config;
        config.experiment_id = "acceptance";
        config.kind = params.kind;
        config.test_dataset = dataset.manifest.name;
        config.test_split = split;
        const ExperimentReport report =
            evaluate_model(params, config, {dataset.manifest, dataset.dir});
        if (out_scored != nullptr) *out_scored = report.scored;
        return report.auc;
    }
};

syngen::GeneratorConfig uniform_config(std::uint64_t seed) {
    syngen::GeneratorConfig config;
    config.family = "uniform";
    config.n_train_val = 160;
    config.n_holdout = 40;
    config.seed = seed;
    return config;
}

syngen::GeneratorConfig diverse_config(std::uint64_t seed) {
    syngen::GeneratorConfig config;
    config.family = "diverse";
    config.n_train_val = 110;  // parts; x4 rotations
    config.n_holdout = 44;
    config.seed = seed;
    return config;
}

const Pipeline& pipeline() {
    static Pipeline instance = [] {
        Pipeline p;
        std::random_device rd;
        p.root = fs::temp_directory_path() / ("inspecta-acceptance-" + std::to_string(rd()));
        fs::create_directories(p.root);

        p.uniform = syngen::gen_dataset(uniform_config(42), p.root);
        p.diverse = syngen::gen_dataset(diverse_config(42), p.root);

        const auto uniform_train = load_split(p.uniform.manifest, p.uniform.dir, Split::train);
        const auto diverse_train = load_split(p.diverse.manifest, p.diverse.dir, Split::train);

        p.clf_uniform =
            train_classifier(uniform_train, TrainConfig::classifier_defaults(128, 42)).params;
        p.det_uniform = train_detector(uniform_train, TrainConfig::detector_defaults(42)).params;
        p.clf_diverse =
            train_classifier(diverse_train, TrainConfig::classifier_defaults(128, 42)).params;
        p.det_diverse = train_detector(diverse_train, TrainConfig::detector_defaults(42)).params;
        return p;
    }();
    return instance;
}

// ---------------------------------------------------------------------------
// Criterion 1: metric oracles.

void criterion_metrics(Criterion& c) {
    Rng rng(510510);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.uniform_int(4, 64);
        std::vector<ScoredLabel> scored;
        for (int i = 0; i < n; ++i) {
            double score = rng.next_unit();
            if (trial % 2 == 0) score = std::floor(score * 6.0) / 6.0;  // tie-rich half
            scored.push_back({"i" + std::to_string(i), score,
                              rng.next_unit() < 0.5 ? Label::ng : Label::ok});
        }
        scored[0].truth = Label::ng;
        scored[1].truth = Label::ok;
        if (std::abs(auc(scored) - oracle::pairwise_auc(scored)) >= 1e-12) {
            c.require(false, "AUC != Mann-Whitney on instance " + std::to_string(trial));
            return;
        }
    }
    c.note("auc==pairwise on 200 instances");

    for (int trial = 0; trial < 300; ++trial) {
        const int n_images = rng.uniform_int(1, 3);
        std::vector<std::vector<Detection>> dets(static_cast<std::size_t>(n_images));
        std::vector<std::vector<BBox>> gts(static_cast<std::size_t>(n_images));
        int total_gt = 0, total_det = 0;
        double score = 0.997;
        for (int img = 0; img < n_images; ++img) {
            for (int g = rng.uniform_int(0, 4); g > 0; --g) {
                const int x = rng.uniform_int(0, 40), y = rng.uniform_int(0, 40);
                gts[static_cast<std::size_t>(img)].push_back(
                    {x, y, x + rng.uniform_int(2, 9), y + rng.uniform_int(2, 9)});
                ++total_gt;
            }
            for (int d = rng.uniform_int(0, 4); d > 0 && total_det < 12; --d) {
                const int x = rng.uniform_int(0, 40), y = rng.uniform_int(0, 40);
                dets[static_cast<std::size_t>(img)].push_back(
                    {{x, y, x + rng.uniform_int(2, 9), y + rng.uniform_int(2, 9)}, score});
                score -= 0.0137;
                ++total_det;
            }
        }
        if (total_gt == 0) continue;
        const double lib = average_precision(dets, gts, 0.25);
        const double ref = oracle::staircase_ap(dets, gts, 0.25);
        if (std::abs(lib - ref) >= 1e-12) {
            c.require(false, "AP != staircase oracle on instance " + std::to_string(trial));
            return;
        }
    }
    c.note("ap==staircase on 300 instances");

    c.require(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0, "iou identical == 1.0");
    c.require(iou({0, 0, 2, 2}, {5, 5, 7, 7}) == 0.0, "iou disjoint == 0.0");
    c.require(iou({0, 0, 2, 2}, {1, 0, 3, 2}) == 1.0 / 3.0, "iou overlap == 1/3 exact");
}

// ---------------------------------------------------------------------------
// Criterion 2: focal loss.

void criterion_focal(Criterion& c) {
    Rng rng(20502);
    bool nonnegative = true;
    double worst_ce_gap = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double p = rng.next_unit();
        const int y = rng.uniform_int(0, 1);
        const FocalLossParams params{0.01 + 0.99 * rng.next_unit(), 5.0 * rng.next_unit()};
        nonnegative = nonnegative && focal_loss(p, y, params) >= 0.0;

        const double clamped = std::clamp(p, 1e-12, 1.0 - 1e-12);
        const double ce = y == 1 ? -std::log(clamped) : -std::log(1.0 - clamped);
        worst_ce_gap = std::max(worst_ce_gap, std::abs(focal_loss(p, y, {1.0, 0.0}) - ce));
    }
    c.require(nonnegative, "focal loss nonnegative");
    c.require(worst_ce_gap < 1e-12, "gamma=0 reduces to cross-entropy (gap " +
                                        format_double(worst_ce_gap, 15) + ")");

    const double gammas[] = {0.0, 1.0, 2.0, 5.0};
    double worst_rel = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double z = -6.0 + 12.0 * rng.next_unit();
        const int y = rng.uniform_int(0, 1);
        const FocalLossParams params{0.1 + 0.9 * rng.next_unit(), gammas[rng.uniform_int(0, 3)]};
        const double analytic = focal_loss_grad(z, y, params);
        const double numeric = oracle::central_difference(
            [&](double logit) { return focal_loss(logistic(logit), y, params); }, z);
        worst_rel = std::max(worst_rel, std::abs(analytic - numeric) /
                                            std::max({std::abs(analytic), std::abs(numeric), 1e-12}));
    }
    c.require(worst_rel < 1e-5, "gradient vs central differences (worst rel " +
                                     format_double(worst_rel, 8) + ")");
    c.note("worst grad rel err " + format_double(worst_rel, 8));
}

// ---------------------------------------------------------------------------
// Criterion 3: clustering oracles.

void criterion_clustering(Criterion& c) {
    Rng rng(30903);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.uniform_int(3, 10);
        const int k = rng.uniform_int(2, n);
        std::vector<std::vector<double>> points;
        std::vector<std::string> ids;
        for (int i = 0; i < n; ++i) {
            points.push_back({10.0 * rng.next_unit(), 10.0 * rng.next_unit()});
            ids.push_back("p" + std::to_string(i));
        }
        const auto lib = agglomerate(points, ids, k);
        const auto ref = oracle::ward_bruteforce(points, k);
        for (int i = 0; i < n; ++i) {
            if (lib.assignment.labels.at(ids[static_cast<std::size_t>(i)]) !=
                ref.labels[static_cast<std::size_t>(i)]) {
                c.require(false, "ward != brute force on instance " + std::to_string(trial));
                return;
            }
        }
    }
    c.note("ward==bruteforce on 100 instances");

    bool bounded = true;
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(6, 40);
        const int k = rng.uniform_int(2, 5);
        std::vector<std::vector<double>> points;
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) {
            points.push_back({rng.next_unit(), rng.next_unit()});
            labels.push_back(i < k ? i : rng.uniform_int(0, k - 1));
        }
        for (double v : silhouette_values(points, labels, k)) {
            bounded = bounded && v >= -1.0 && v <= 1.0;
        }
    }
    c.require(bounded, "silhouette values in [-1,1]");

    // Planted 3-blob recovery, separation 50 = 50x the unit spread.
    std::vector<std::vector<double>> planted;
    std::vector<std::string> planted_ids;
    const double centers[3][2] = {{0, 0}, {50, 0}, {0, 50}};
    for (int blob = 0; blob < 3; ++blob) {
        for (int i = 0; i < 20; ++i) {
            planted.push_back({rng.normal(centers[blob][0], 1.0), rng.normal(centers[blob][1], 1.0)});
            planted_ids.push_back("b" + std::to_string(blob) + "_" + std::to_string(i));
        }
    }
    const SilhouetteReport report = select_k(planted, planted_ids, 3, 10);
    c.require(report.chosen_k == 3,
              "select_k picks 3 on planted blobs (got " + std::to_string(report.chosen_k) + ")");
}

// ---------------------------------------------------------------------------
// Criterion 4: generalization ordering (Tables 3-6 analog).

void criterion_generalization(Criterion& c) {
    const Pipeline& p = pipeline();

    const double clf_val = p.auc_of(p.clf_uniform, p.uniform, Split::validation);
    const double clf_holdout = p.auc_of(p.clf_uniform, p.uniform, Split::holdout);
    const double div_val = p.auc_of(p.clf_diverse, p.diverse, Split::validation);
    const double div_holdout = p.auc_of(p.clf_diverse, p.diverse, Split::holdout);
    const double det_holdout = p.auc_of(p.det_uniform, p.uniform, Split::holdout);

    c.note("uniform clf val " + format_double(clf_val) + " holdout " + format_double(clf_holdout));
    c.note("diverse clf val " + format_double(div_val) + " holdout " + format_double(div_holdout));
    c.note("uniform det holdout " + format_double(det_holdout));

    c.require(clf_val >= 0.95, "uniform classifier validation AUC >= 0.95");
    c.require(clf_holdout <= clf_val - 0.15, "shifted-holdout collapse (<= val - 0.15)");
    c.require(std::abs(div_val - div_holdout) <= 0.05, "diverse classifier |val - holdout| <= 0.05");
    c.require(det_holdout >= clf_holdout, "detector holdout >= classifier holdout (uniform)");
}

// ---------------------------------------------------------------------------
// Criterion 5: cross-dataset ordering (Tables 7-8 analog).

void criterion_cross_dataset(Criterion& c) {
    const Pipeline& p = pipeline();

    const double det_cross = p.auc_of(p.det_uniform, p.diverse, Split::holdout);
    const double clf_cross = p.auc_of(p.clf_uniform, p.diverse, Split::holdout);
    const double div_clf_on_uniform = p.auc_of(p.clf_diverse, p.uniform, Split::holdout);
    const double div_det_on_uniform = p.auc_of(p.det_diverse, p.uniform, Split::holdout);

    c.note("uniform->diverse det " + format_double(det_cross) + " clf " + format_double(clf_cross));
    c.note("diverse->uniform clf " + format_double(div_clf_on_uniform) + " det " +
           format_double(div_det_on_uniform));

    c.require(det_cross >= clf_cross + 0.10, "detector cross AUC >= classifier cross + 0.10");
    c.require(div_clf_on_uniform >= 0.90, "diverse classifier on uniform holdout >= 0.90");
    c.require(div_det_on_uniform >= 0.90, "diverse detector on uniform holdout >= 0.90");
}

// ---------------------------------------------------------------------------
// Criterion 6: cluster-exclusion ablation ordering (Table 9 analog).

void criterion_ablation(Criterion& c) {
    const Pipeline& p = pipeline();

    const AblationReport report =
        run_ablation(p.diverse.dir / "manifest.json", ModelKind::detector,
                     p.uniform.dir / "manifest.json", Split::holdout, 42, p.root / "ablation");

    const AblationClusterResult* largest = &report.clusters.front();
    const AblationClusterResult* smallest = &report.clusters.front();
    for (const AblationClusterResult& row : report.clusters) {
        if (row.excluded_count > largest->excluded_count) largest = &row;
        if (row.excluded_count < smallest->excluded_count) smallest = &row;
    }

    c.note("chosen_k " + std::to_string(report.silhouette.chosen_k));
    c.note("baseline " + format_double(report.baseline.auc));
    c.note("excl largest (" + std::to_string(largest->excluded_count) + " imgs) delta " +
           format_double(largest->delta));
    c.note("excl smallest (" + std::to_string(smallest->excluded_count) + " imgs) delta " +
           format_double(smallest->delta));

    c.require(largest->delta > smallest->delta,
              "largest-cluster exclusion degrades strictly more than smallest");
    c.require(std::abs(smallest->delta) <= 0.02, "smallest-cluster exclusion within 0.02");
}

// ---------------------------------------------------------------------------
// Criterion 7: determinism and round trips.

void criterion_determinism(Criterion& c) {
    const Pipeline& p = pipeline();
    const fs::path root = p.root / "determinism";
    fs::create_directories(root);

    // gen: byte-identical manifests and images.
    syngen::GeneratorConfig config = uniform_config(7);
    config.name = "det-check";
    config.n_train_val = 16;
    config.n_holdout = 6;
    const auto gen_a = syngen::gen_dataset(config, root / "a");
    const auto gen_b = syngen::gen_dataset(config, root / "b");
    bool gen_identical =
        file_bytes(gen_a.dir / "manifest.json") == file_bytes(gen_b.dir / "manifest.json");
    for (const Sample& sample : gen_a.manifest.samples) {
        gen_identical = gen_identical && file_bytes(gen_a.dir / sample.image_path) ==
                                             file_bytes(gen_b.dir / sample.image_path);
    }
    c.require(gen_identical, "regenerated dataset is byte-identical");

    // train: byte-identical model files.
    const auto train_samples = load_split(gen_a.manifest, gen_a.dir, Split::train);
    const TrainConfig train_config = TrainConfig::classifier_defaults(128, 7);
    save_model(train_classifier(train_samples, train_config).params, root / "m1.bin");
    save_model(train_classifier(train_samples, train_config).params, root / "m2.bin");
    c.require(file_bytes(root / "m1.bin") == file_bytes(root / "m2.bin"),
              "retrained model file is byte-identical");

    // model round trip: load(save(m)) bit-identical.
    const ModelParams loaded = load_model(root / "m1.bin");
    save_model(loaded, root / "m3.bin");
    c.require(file_bytes(root / "m1.bin") == file_bytes(root / "m3.bin"),
              "model round-trip is bit-exact");

    // eval: byte-identical reports.
    ExperimentConfig eval_config;
    eval_config.experiment_id = "det-eval";
    eval_config.kind = ModelKind::classifier;
    eval_config.test_dataset = gen_a.manifest.name;
    eval_config.test_split = Split::holdout;
    const ExperimentReport report_a =
        evaluate_model(loaded, eval_config, {gen_a.manifest, gen_a.dir});
    const ExperimentReport report_b =
        evaluate_model(loaded, eval_config, {gen_a.manifest, gen_a.dir});
    c.require(report_to_json(report_a) == report_to_json(report_b),
              "repeated eval report is byte-identical");

    // manifest round trip.
    const DatasetManifest reloaded = load_manifest(gen_a.dir / "manifest.json");
    c.require(manifest_to_json(reloaded) == file_bytes(gen_a.dir / "manifest.json"),
              "manifest round-trip is byte-identical");

    // Every stored AUC re-derives from its own scored labels.
    std::vector<ScoredLabel> scored;
    const double stored = p.auc_of(p.clf_uniform, p.uniform, Split::holdout, &scored);
    c.require(stored == auc(scored), "report AUC re-derives from per-image scores");
}

// ---------------------------------------------------------------------------
// Criterion 8: augmentation invariants.

void criterion_augmentation(Criterion& c) {
    Rng rng(80808);
    bool rotation_identity = true;
    bool boxes_match = true;

    for (int trial = 0; trial < 50; ++trial) {
        const syngen::PartSpec spec = syngen::diverse_part_spec(128, 4242, trial);
        const syngen::Mask mask = syngen::rasterize_part(spec, 128);
        Image image = syngen::gen_part(spec, 128, 1000 + static_cast<std::uint64_t>(trial));

        syngen::DefectSpec defect;
        defect.diameter_px = rng.uniform_int(6, 12);
        const auto with_defect =
            syngen::apply_defect(image, mask, defect, 2000 + static_cast<std::uint64_t>(trial));

        syngen::AugmentedSample sample{with_defect.image, with_defect.boxes};
        for (int turn = 0; turn < 4; ++turn) {
            sample = syngen::augment(sample.image, sample.boxes,
                                     {syngen::AugmentOp::rotate90k, 1}, 0);
        }
        rotation_identity = rotation_identity && sample.image == with_defect.image &&
                            sample.boxes == with_defect.boxes;

        // Box transforms against per-pixel raster oracles.
        for (const BBox& box : with_defect.boxes) {
            const BBox fh =
                syngen::augment(with_defect.image, {box}, {syngen::AugmentOp::flip_h}, 0).boxes[0];
            const BBox fv =
                syngen::augment(with_defect.image, {box}, {syngen::AugmentOp::flip_v}, 0).boxes[0];
            const BBox r90 = syngen::augment(with_defect.image, {box},
                                             {syngen::AugmentOp::rotate90k, 1}, 0)
                                 .boxes[0];
            boxes_match =
                boxes_match &&
                fh == oracle::map_box_by_pixels(
                          box, [&](int x, int y) { return std::pair{127 - x, y}; }) &&
                fv == oracle::map_box_by_pixels(
                          box, [&](int x, int y) { return std::pair{x, 127 - y}; }) &&
                r90 == oracle::map_box_by_pixels(
                           box, [&](int x, int y) { return std::pair{127 - y, x}; });
        }
    }
    c.require(rotation_identity, "rotate90k^4 is the byte-level identity on 50 samples");
    c.require(boxes_match, "box transforms match per-pixel oracles on 50 samples");
}

}  // namespace

int main() {
    struct Entry {
        int number;
        const char* name;
        double budget_seconds;
        std::function<void(Criterion&)> run;
    };
    const std::vector<Entry> entries{
        {1, "metric oracles (AUC/AP/IOU)", 10.0, criterion_metrics},
        {2, "focal loss identities and gradient", 5.0, criterion_focal},
        {3, "clustering oracles (ward/silhouette/select_k)", 30.0, criterion_clustering},
        {4, "generalization ordering (Tables 3-6 analog)", 180.0, criterion_generalization},
        {5, "cross-dataset ordering (Tables 7-8 analog)", 180.0, criterion_cross_dataset},
        {6, "cluster-exclusion ablation ordering (Table 9 analog)", 240.0, criterion_ablation},
        {7, "determinism and round-trips", 180.0, criterion_determinism},
        {8, "augmentation invariants", 30.0, criterion_augmentation},
    };

    int failures = 0;
    for (const Entry& entry : entries) {
        Criterion criterion;
        const auto start = std::chrono::steady_clock::now();
        try {
            entry.run(criterion);
        } catch (const std::exception& e) {
            criterion.require(false, std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        criterion.require(elapsed < entry.budget_seconds,
                          "runtime " + format_double(elapsed, 1) + "s exceeds budget " +
                              format_double(entry.budget_seconds, 0) + "s");

        std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", criterion.ok ? "PASS" : "FAIL",
                    entry.number, entry.name, elapsed, criterion.detail.empty() ? "" : " | ",
                    criterion.detail.c_str());
        std::fflush(stdout);
        failures += criterion.ok ? 0 : 1;
    }

    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, entries.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", entries.size());
    return 0;
}
