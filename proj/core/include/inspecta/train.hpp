#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inspecta/manifest.hpp"
#include "inspecta/model.hpp"

namespace inspecta {

/// Mini-batch gradient-descent protocol for the linear scorer.
/// Defaults mirror the desk-scale hyperparameter choices: classifier
/// 200 epochs / lr 0.05 / batch 16 with balanced cross-entropy, detector
/// 300 epochs / lr 0.01 / batch 128 windows with focal loss.
struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.05;
    int batch_size = 16;
    double weight_decay = 1e-4;  // L2; keeps separable fits from exploding
    double alpha = 0.5;  // focal weight for NG; OK samples get 1 - alpha
    double gamma = 0.0;
    std::uint64_t seed = 0;
    FeatureConfig features;

    // Detector window scan. The window is defect-sized: a crescent fills
    // it rather than hiding inside it, which keeps the notch pattern
    // linearly recognizable at any position.
    int window = 12;
    int stride = 4;
    double tau_pos = 0.55;  // window is positive when it covers >= tau_pos of a gt box
    double tau_neg = 0.02;  // and negative when coverage <= tau_neg; between: discarded

    static TrainConfig classifier_defaults(int image_size, std::uint64_t seed);
    static TrainConfig detector_defaults(std::uint64_t seed);
};

/// Canonical digest of the protocol; stored in ModelParams.
std::string training_config_hash(const TrainConfig& config, ModelKind kind);

/// Training scan origin for the sample at `sample_index`: deterministic in
/// (seed, index), uniform over [0, stride) per axis. Sampling a different
/// origin per image covers every sub-stride phase across the set.
std::pair<int, int> window_grid_origin(std::uint64_t seed, std::size_t sample_index, int stride);

struct TrainResult {
    ModelParams params;
    double final_loss = 0.0;
    // Window diagnostics (detector only).
    long long positive_windows = 0;
    long long negative_windows = 0;
    long long discarded_windows = 0;
};

/// Whole-image binary classifier. Requires both labels present.
TrainResult train_classifier(const std::vector<LoadedSample>& samples, const TrainConfig& config);

/// Sliding-window box detector trained with focal loss. Requires at least
/// one NG sample and at least one positive window; failure reports the
/// window counts.
TrainResult train_detector(const std::vector<LoadedSample>& samples, const TrainConfig& config);

}  // namespace inspecta
