#include "inspecta/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "inspecta/error.hpp"
#include "inspecta/hash.hpp"
#include "inspecta/loss.hpp"
#include "inspecta/rng.hpp"

namespace inspecta {

namespace {

struct TrainingSet {
    std::vector<float> features;  // n x dim, row-major
    std::vector<std::uint8_t> labels;
    int dim = 0;

    std::size_t size() const { return labels.size(); }
    const float* row(std::size_t i) const { return features.data() + i * static_cast<std::size_t>(dim); }
};

// Deterministic SGD on the linear scorer; the shuffle schedule is fixed by
// (seed, epoch).
TrainResult fit_linear(const TrainingSet& data, const TrainConfig& config, ModelKind kind) {
    std::vector<double> weights(static_cast<std::size_t>(data.dim), 0.0);
    double bias = 0.0;

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> grad(weights.size());
    const int batch_size = std::max(1, config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Linear decay to a tenth of the base rate settles the final fit.
        const double epoch_lr =
            config.learning_rate *
            (1.0 - 0.9 * static_cast<double>(epoch) / static_cast<double>(config.epochs));
        Rng rng = Rng::for_stream(config.seed, 0x7ea1u, static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.next_u64() % i;
            std::swap(order[i - 1], order[j]);
        }

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_bias = 0.0;
            for (std::size_t pos = start; pos < end; ++pos) {
                const std::size_t i = order[pos];
                const float* x = data.row(i);
                double z = bias;
                for (std::size_t d = 0; d < weights.size(); ++d) z += weights[d] * x[d];
                const int y = data.labels[i];
                const FocalLossParams loss_params{y == 1 ? config.alpha : 1.0 - config.alpha,
                                                  config.gamma};
                const double g = focal_loss_grad(z, y, loss_params);
                for (std::size_t d = 0; d < weights.size(); ++d) grad[d] += g * x[d];
                grad_bias += g;
            }
            const double scale = epoch_lr / static_cast<double>(end - start);
            const double decay = 1.0 - epoch_lr * config.weight_decay;
            for (std::size_t d = 0; d < weights.size(); ++d)
                weights[d] = weights[d] * decay - scale * grad[d];
            bias -= scale * grad_bias;
        }
    }

    TrainResult result;
    result.params.kind = kind;
    result.params.features = config.features;
    result.params.window_stride = kind == ModelKind::detector ? config.stride : 0;
    result.params.weights = std::move(weights);
    result.params.bias = bias;
    result.params.training_config_hash = training_config_hash(config, kind);

    double total_loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float* x = data.row(i);
        double z = result.params.bias;
        for (std::size_t d = 0; d < result.params.weights.size(); ++d)
            z += result.params.weights[d] * x[d];
        const int y = data.labels[i];
        const FocalLossParams loss_params{y == 1 ? config.alpha : 1.0 - config.alpha, config.gamma};
        total_loss += focal_loss(logistic(z), y, loss_params);
    }
    result.final_loss = data.size() ? total_loss / static_cast<double>(data.size()) : 0.0;
    return result;
}

void append_features(TrainingSet& set, const FeatureVector& features, int label) {
    if (set.dim == 0) set.dim = static_cast<int>(features.values.size());
    for (double v : features.values) set.features.push_back(static_cast<float>(v));
    set.labels.push_back(static_cast<std::uint8_t>(label));
}

/// Fraction of the gt box covered by the window, max over gt boxes.
double best_gt_coverage(const BBox& window, const std::vector<BBox>& gts) {
    double best = 0.0;
    for (const BBox& gt : gts) {
        const long long ix = std::max(0, std::min(window.x_max, gt.x_max) - std::max(window.x_min, gt.x_min));
        const long long iy = std::max(0, std::min(window.y_max, gt.y_max) - std::max(window.y_min, gt.y_min));
        if (gt.area() <= 0) continue;
        best = std::max(best, static_cast<double>(ix * iy) / static_cast<double>(gt.area()));
    }
    return best;
}

}  // namespace

TrainConfig TrainConfig::classifier_defaults(int image_size, std::uint64_t seed) {
    TrainConfig config;
    config.epochs = 4000;
    config.learning_rate = 0.5;
    config.batch_size = 16;
    config.alpha = 0.5;
    config.gamma = 0.0;
    config.seed = seed;
    config.features.input_size = image_size;
    return config;
}

TrainConfig TrainConfig::detector_defaults(std::uint64_t seed) {
    TrainConfig config;
    config.epochs = 600;
    config.learning_rate = 1.0;
    config.batch_size = 128;
    config.alpha = 0.75;  // positives are few and hard; weight them up
    config.gamma = 2.0;
    config.seed = seed;
    config.features.input_size = config.window;
    // 3 px cells inside the 12 px window.
    config.features.grid = 4;
    return config;
}

std::pair<int, int> window_grid_origin(std::uint64_t seed, std::size_t sample_index, int stride) {
    Rng rng = Rng::for_stream(seed, 0x0f25u, sample_index);
    const int ox = rng.uniform_int(0, stride - 1);
    const int oy = rng.uniform_int(0, stride - 1);
    return {ox, oy};
}

std::string training_config_hash(const TrainConfig& config, ModelKind kind) {
    std::ostringstream text;
    text.precision(17);
    text << to_string(kind) << '|' << config.epochs << '|' << config.learning_rate << '|'
         << config.batch_size << '|' << config.weight_decay << '|' << config.alpha << '|'
         << config.gamma << '|' << config.seed
         << '|' << config.features.layout_id() << '|' << config.features.pooled_mean << '|'
         << config.features.pooled_std << '|' << config.features.grad_mean << '|'
         << config.features.grad_std << '|' << config.features.grad_floor;
    if (kind == ModelKind::detector) {
        text << '|' << config.window << '|' << config.stride << '|' << config.tau_pos << '|'
             << config.tau_neg;
    }
    return hash_hex(text.str());
}

TrainResult train_classifier(const std::vector<LoadedSample>& samples, const TrainConfig& config) {
    if (samples.size() < 2) throw ValidationError("train_classifier: need at least 2 samples");

    TrainingSet data;
    int positives = 0;
    for (const LoadedSample& sample : samples) {
        const int y = sample.label == Label::ng ? 1 : 0;
        positives += y;
        append_features(data, extract_features(sample.image, config.features), y);
    }
    if (positives == 0 || positives == static_cast<int>(samples.size()))
        throw ValidationError("train_classifier: single-class training set");

    return fit_linear(data, config, ModelKind::classifier);
}

TrainResult train_detector(const std::vector<LoadedSample>& samples, const TrainConfig& config) {
    bool any_ng = false;
    for (const LoadedSample& sample : samples) any_ng = any_ng || sample.label == Label::ng;
    if (!any_ng) throw ValidationError("train_detector: need at least one NG sample");
    if (config.window <= 0 || config.stride <= 0)
        throw ConfigError("train_detector: window and stride must be positive");

    FeatureConfig window_features = config.features;
    window_features.input_size = config.window;

    TrainingSet data;
    long long positives = 0, negatives = 0, discarded = 0;
    Image window_image(config.window, config.window);
    std::size_t sample_index = 0;
    for (const LoadedSample& sample : samples) {
        if (sample.image.width < config.window || sample.image.height < config.window)
            throw ValidationError("train_detector: image smaller than scan window");
        // Per-image grid origin: across the set, part edges are sampled at
        // every sub-stride offset, so window content at evaluation time is
        // never at a phase the scorer has not seen.
        const auto [ox, oy] = window_grid_origin(config.seed, sample_index++, config.stride);
        for (int y0 = oy; y0 + config.window <= sample.image.height; y0 += config.stride) {
            for (int x0 = ox; x0 + config.window <= sample.image.width; x0 += config.stride) {
                const BBox window{x0, y0, x0 + config.window, y0 + config.window};
                const double coverage = best_gt_coverage(window, sample.gt_boxes);
                int label;
                if (coverage >= config.tau_pos) {
                    label = 1;
                    ++positives;
                } else if (coverage <= config.tau_neg) {
                    label = 0;
                    ++negatives;
                } else {
                    ++discarded;
                    continue;
                }
                for (int y = 0; y < config.window; ++y) {
                    for (int x = 0; x < config.window; ++x) {
                        window_image.at(x, y) = sample.image.at(x0 + x, y0 + y);
                    }
                }
                append_features(data, extract_features(window_image, window_features), label);
            }
        }
    }

    if (positives == 0)
        throw ValidationError("train_detector: no positive windows produced (tau_pos=" +
                              std::to_string(config.tau_pos) + ", " + std::to_string(negatives) +
                              " negatives, " + std::to_string(discarded) + " discarded)");

    TrainConfig window_config = config;
    window_config.features = window_features;
    TrainResult result = fit_linear(data, window_config, ModelKind::detector);
    result.positive_windows = positives;
    result.negative_windows = negatives;
    result.discarded_windows = discarded;
    return result;
}

}  // namespace inspecta
