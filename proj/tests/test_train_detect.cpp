#include <doctest.h>

#include "inspecta/detect.hpp"
#include "inspecta/error.hpp"
#include "inspecta/rng.hpp"
#include "inspecta/syngen.hpp"
#include "inspecta/train.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace inspecta;

namespace {

// Separable toy set: NG images carry a bright block, OK images are flat
// with mild noise.
std::vector<LoadedSample> separable_samples(int n, std::uint64_t seed) {
    std::vector<LoadedSample> samples;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        LoadedSample sample;
        sample.image_id = "toy" + std::to_string(i);
        sample.image = Image(32, 32, 60);
        for (auto& v : sample.image.pixels)
            v = static_cast<std::uint8_t>(std::clamp<long long>(
                std::llround(rng.normal(60.0, 2.0)), 0, 255));
        if (i % 2 == 0) {
            for (int y = 4; y < 12; ++y) {
                for (int x = 4; x < 12; ++x) sample.image.at(x, y) = 220;
            }
            sample.gt_boxes.push_back({4, 4, 12, 12});
            sample.label = Label::ng;
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace

TEST_CASE("classifier reaches perfect accuracy on a separable toy set") {
    const auto samples = separable_samples(20, 1);
    TrainConfig config = TrainConfig::classifier_defaults(32, 7);
    const TrainResult result = train_classifier(samples, config);

    int correct = 0;
    for (const LoadedSample& sample : samples) {
        const double score = image_score(result.params, sample.image);
        const Label predicted = score >= 0.5 ? Label::ng : Label::ok;
        correct += predicted == sample.label ? 1 : 0;
    }
    CHECK(correct == 20);
    CHECK(result.final_loss < 0.3);
}

TEST_CASE("training is deterministic in data plus seed") {
    const auto samples = separable_samples(12, 2);
    const TrainConfig config = TrainConfig::classifier_defaults(32, 9);
    const TrainResult a = train_classifier(samples, config);
    const TrainResult b = train_classifier(samples, config);
    CHECK(a.params.weights == b.params.weights);
    CHECK(a.params.bias == b.params.bias);

    TrainConfig other = config;
    other.seed = 10;
    const TrainResult c = train_classifier(samples, other);
    CHECK(a.params.weights != c.params.weights);
}

TEST_CASE("single-class training set is refused") {
    auto samples = separable_samples(10, 3);
    for (LoadedSample& sample : samples) {
        sample.gt_boxes.clear();
        sample.label = Label::ok;
    }
    CHECK_THROWS_WITH_AS(train_classifier(samples, TrainConfig::classifier_defaults(32, 1)),
                         doctest::Contains("single-class"), ValidationError);
    CHECK_THROWS_AS(train_classifier({}, TrainConfig::classifier_defaults(32, 1)), ValidationError);
}

TEST_CASE("detector window labeling matches the enumeration oracle") {
    const auto samples = separable_samples(10, 4);
    TrainConfig config = TrainConfig::detector_defaults(11);
    config.epochs = 30;  // keep the unit test snappy
    const TrainResult result = train_detector(samples, config);

    oracle::WindowCounts expected;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [ox, oy] = window_grid_origin(config.seed, i, config.stride);
        const auto counts = oracle::enumerate_windows(32, samples[i].gt_boxes, config.window,
                                                      config.stride, config.tau_pos,
                                                      config.tau_neg, ox, oy);
        expected.positives += counts.positives;
        expected.negatives += counts.negatives;
        expected.discarded += counts.discarded;
    }
    CHECK(result.positive_windows == expected.positives);
    CHECK(result.negative_windows == expected.negatives);
    CHECK(result.discarded_windows == expected.discarded);

    // Every NG image yields at least one positive window on the canonical
    // grid at these sizes (W=16, S=8, 8 px defects).
    for (const LoadedSample& sample : samples) {
        if (sample.label != Label::ng) continue;
        const auto counts = oracle::enumerate_windows(32, sample.gt_boxes, 16, 8, config.tau_pos,
                                                      config.tau_neg);
        CHECK(counts.positives >= 1);
    }
}

TEST_CASE("detector training requires NG samples and positive windows") {
    auto samples = separable_samples(6, 5);
    TrainConfig config = TrainConfig::detector_defaults(1);
    config.epochs = 5;

    auto all_ok = samples;
    for (LoadedSample& sample : all_ok) {
        sample.gt_boxes.clear();
        sample.label = Label::ng;  // claims NG without boxes: no positive window
    }
    all_ok[0].label = Label::ng;
    CHECK_THROWS_WITH_AS(train_detector(all_ok, config), doctest::Contains("no positive windows"),
                         ValidationError);

    for (LoadedSample& sample : all_ok) sample.label = Label::ok;
    CHECK_THROWS_WITH_AS(train_detector(all_ok, config), doctest::Contains("NG"), ValidationError);
}

TEST_CASE("detector determinism") {
    const auto samples = separable_samples(8, 6);
    TrainConfig config = TrainConfig::detector_defaults(13);
    config.epochs = 20;
    const TrainResult a = train_detector(samples, config);
    const TrainResult b = train_detector(samples, config);
    CHECK(a.params.weights == b.params.weights);
    CHECK(a.params.bias == b.params.bias);
}

TEST_CASE("detect finds a planted window and suppresses overlaps") {
    // Hand-built detector: fires on bright window means.
    ModelParams params;
    params.kind = ModelKind::detector;
    params.features.input_size = 16;
    params.window_stride = 4;
    params.weights.assign(static_cast<std::size_t>(params.features.feature_length()), 0.0);
    for (int i = 0; i < 64; ++i) params.weights[static_cast<std::size_t>(i)] = 1.0;
    params.bias = -40.0;  // mean must clearly exceed the pooled normalization midpoint

    Image image(32, 32, 40);
    for (int y = 8; y < 24; ++y) {
        for (int x = 8; x < 24; ++x) image.at(x, y) = 250;
    }

    const std::vector<Detection> detections = detect(params, image);
    REQUIRE(!detections.empty());
    CHECK(detections.front().box == BBox{8, 8, 24, 24});
    for (std::size_t i = 1; i < detections.size(); ++i) {
        CHECK(detections[i].score <= detections[i - 1].score);
    }
    for (std::size_t i = 0; i < detections.size(); ++i) {
        for (std::size_t j = i + 1; j < detections.size(); ++j) {
            CHECK(iou(detections[i].box, detections[j].box) <= 0.5);
        }
    }
}

TEST_CASE("detect returns nothing on a flat image with a negative bias") {
    ModelParams params;
    params.kind = ModelKind::detector;
    params.features.input_size = 16;
    params.window_stride = 8;
    params.weights.assign(static_cast<std::size_t>(params.features.feature_length()), 0.0);
    params.bias = -0.01;

    DetectConfig config;
    config.score_min = 0.5;
    const Image flat(64, 64, 128);
    CHECK(detect(params, flat, config).empty());
    CHECK(image_score(params, flat, Aggregation::max_box, config) == 0.0);  // no evidence
}

TEST_CASE("detect refuses classifier params") {
    ModelParams params;
    params.kind = ModelKind::classifier;
    params.features.input_size = 16;
    params.weights.assign(static_cast<std::size_t>(params.features.feature_length()), 0.0);
    CHECK_THROWS_WITH_AS(detect(params, Image(32, 32, 0)), doctest::Contains("classifier-kind"),
                         ValidationError);
}

TEST_CASE("image_score aggregations bracket the detection scores") {
    ModelParams params;
    params.kind = ModelKind::detector;
    params.features.input_size = 16;
    params.window_stride = 8;
    params.weights.assign(static_cast<std::size_t>(params.features.feature_length()), 0.0);
    for (int i = 0; i < 64; ++i) params.weights[static_cast<std::size_t>(i)] = 0.8;
    params.bias = -20.0;

    // Two bright patches of different intensity, far apart.
    Image image(64, 64, 30);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            image.at(x, y) = 250;
            image.at(x + 48, y + 48) = 190;
        }
    }

    const std::vector<Detection> detections = detect(params, image);
    REQUIRE(detections.size() >= 2);
    double max_score = detections.front().score;
    double min_score = detections.front().score;
    for (const Detection& d : detections) {
        max_score = std::max(max_score, d.score);
        min_score = std::min(min_score, d.score);
    }
    CHECK(image_score(params, image, Aggregation::max_box) == max_score);
    CHECK(image_score(params, image, Aggregation::min_box) == min_score);
    CHECK(max_score > min_score);
}

TEST_CASE("negative-to-positive window imbalance on default generator data") {
    testsupport::TempDir dir("imbalance");
    syngen::GeneratorConfig config;
    config.family = "uniform";
    config.n_train_val = 40;
    config.n_holdout = 0;
    config.seed = 42;
    const syngen::GeneratedDataset dataset = syngen::gen_dataset(config, dir.path());
    const auto samples = load_split(dataset.manifest, dataset.dir, Split::train);

    const TrainConfig detector_config = TrainConfig::detector_defaults(1);
    long long positives = 0, negatives = 0;
    for (const LoadedSample& sample : samples) {
        const auto counts =
            oracle::enumerate_windows(config.image_size, sample.gt_boxes, detector_config.window,
                                      detector_config.stride, detector_config.tau_pos,
                                      detector_config.tau_neg);
        positives += counts.positives;
        negatives += counts.negatives;
    }
    REQUIRE(positives > 0);
    CHECK(negatives > 50 * positives);  // the imbalance focal loss exists for
}
