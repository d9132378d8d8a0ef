#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "inspecta/types.hpp"

namespace inspecta {

/// Binary confusion counts with an explicit positive class.
struct ConfusionMatrix {
    long long tp = 0;
    long long fn = 0;
    long long fp = 0;
    long long tn = 0;
    Label positive_class = Label::ng;

    long long total() const { return tp + fn + fp + tn; }
};

/// One swept operating point. The leading (0,0) point carries an infinite
/// threshold (nothing predicted positive).
struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // sorted by fpr; starts (0,0), ends (1,1)
};

/// A model score attached to an image and its true label.
struct ScoredLabel {
    std::string image_id;
    double score = 0.0;  // in [0,1]
    Label truth = Label::ok;
};

/// Counts (truth, predicted) pairs into the four quadrants.
/// Defect detection convention: positive class defaults to NG.
ConfusionMatrix confusion(const std::vector<std::pair<Label, Label>>& pairs,
                          Label positive_class = Label::ng);

/// Standard threshold sweep over distinct scores descending, ties grouped.
/// NG is the positive class. Throws ValidationError on single-class input.
RocCurve roc_curve(const std::vector<ScoredLabel>& scored);

/// Trapezoidal area under roc_curve. Equals the Mann-Whitney pairwise
/// statistic (ties credited 0.5) exactly.
double auc(const std::vector<ScoredLabel>& scored);

/// Intersection over union in integer pixel areas; disjoint boxes give 0.
double iou(const BBox& a, const BBox& b);

/// Average precision with continuous max-interpolation. Detections are
/// ranked globally by score; each matches the highest-IOU unmatched ground
/// truth in its image when IOU >= iou_threshold. Requires at least one
/// ground-truth box overall.
double average_precision(const std::vector<std::vector<Detection>>& detections_per_image,
                         const std::vector<std::vector<BBox>>& gts_per_image,
                         double iou_threshold);

struct ScoreSummary {
    ConfusionMatrix confusion;
    double threshold = 0.5;
    double auc = 0.0;
    RocCurve roc;
};

/// Bundles confusion at `threshold` (score >= t predicts NG), AUC and ROC.
ScoreSummary evaluate_scored(const std::vector<ScoredLabel>& scored, double threshold);

/// CSV export, header `threshold,fpr,tpr`.
std::string roc_to_csv(const RocCurve& curve);
void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path);

}  // namespace inspecta
