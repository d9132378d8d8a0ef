#include "inspecta/detect.hpp"

#include <algorithm>

#include "inspecta/error.hpp"
#include "inspecta/metrics.hpp"

namespace inspecta {

const char* to_string(Aggregation aggregation) {
    return aggregation == Aggregation::max_box ? "max" : "min";
}

Aggregation aggregation_from_string(const std::string& text) {
    if (text == "max" || text == "max_box") return Aggregation::max_box;
    if (text == "min" || text == "min_box") return Aggregation::min_box;
    throw ConfigError("unknown aggregation '" + text + "' (want max or min)");
}

std::vector<Detection> detect(const ModelParams& params, const Image& image,
                              const DetectConfig& config) {
    if (params.kind != ModelKind::detector)
        throw ValidationError("detect: classifier-kind params passed");
    const int window = params.features.input_size;
    const int stride = params.window_stride;
    if (window <= 0 || stride <= 0)
        throw ValidationError("detect: model has no window geometry");
    if (image.width < window || image.height < window)
        throw ValidationError("detect: image smaller than scan window");

    std::vector<Detection> candidates;
    Image window_image(window, window);
    for (int y0 = 0; y0 + window <= image.height; y0 += stride) {
        for (int x0 = 0; x0 + window <= image.width; x0 += stride) {
            for (int y = 0; y < window; ++y) {
                for (int x = 0; x < window; ++x) {
                    window_image.at(x, y) = image.at(x0 + x, y0 + y);
                }
            }
            const double score = sigmoid_score(params, extract_features(window_image, params.features));
            if (score >= config.score_min) {
                candidates.push_back({{x0, y0, x0 + window, y0 + window}, score});
            }
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
        return a.box.x_min < b.box.x_min;
    });

    // Greedy NMS keeping the highest score.
    std::vector<Detection> kept;
    for (const Detection& candidate : candidates) {
        bool suppressed = false;
        for (const Detection& keep : kept) {
            if (iou(candidate.box, keep.box) > config.nms_iou) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(candidate);
    }
    return kept;
}

double image_score(const ModelParams& params, const Image& image, Aggregation aggregation,
                   const DetectConfig& config) {
    if (params.kind == ModelKind::classifier) {
        return sigmoid_score(params, extract_features(image, params.features));
    }
    const std::vector<Detection> detections = detect(params, image, config);
    if (detections.empty()) return 0.0;
    double value = detections.front().score;
    for (const Detection& d : detections) {
        value = aggregation == Aggregation::max_box ? std::max(value, d.score)
                                                    : std::min(value, d.score);
    }
    return value;
}

}  // namespace inspecta
