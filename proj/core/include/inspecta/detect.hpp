#pragma once

#include <string>
#include <vector>

#include "inspecta/image.hpp"
#include "inspecta/model.hpp"
#include "inspecta/types.hpp"

namespace inspecta {

struct DetectConfig {
    double score_min = 0.3;  // below this a window carries no defect evidence
    double nms_iou = 0.5;    // overlaps strictly above this are suppressed
};

/// How detector box scores map to one image-level probability.
/// max_box is the default; min_box is the paper-literal variant.
enum class Aggregation { max_box, min_box };

const char* to_string(Aggregation aggregation);
Aggregation aggregation_from_string(const std::string& text);

/// Scores every window, keeps score >= score_min, applies greedy NMS and
/// returns detections sorted by descending score. Requires detector-kind
/// params.
std::vector<Detection> detect(const ModelParams& params, const Image& image,
                              const DetectConfig& config = {});

/// Classifier: sigmoid score on whole-image features. Detector: aggregate
/// of detection scores; no detections means 0.0 (no defect evidence).
double image_score(const ModelParams& params, const Image& image,
                   Aggregation aggregation = Aggregation::max_box, const DetectConfig& config = {});

}  // namespace inspecta
