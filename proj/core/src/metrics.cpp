#include "inspecta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "inspecta/error.hpp"

namespace inspecta {

namespace {

void require_both_classes(const std::vector<ScoredLabel>& scored, const char* op) {
    long long positives = 0;
    for (const ScoredLabel& s : scored) positives += s.truth == Label::ng ? 1 : 0;
    if (positives == 0 || positives == static_cast<long long>(scored.size()))
        throw ValidationError(std::string(op) + ": input must contain both classes");
}

}  // namespace

ConfusionMatrix confusion(const std::vector<std::pair<Label, Label>>& pairs, Label positive_class) {
    if (pairs.empty()) throw ValidationError("confusion: empty input");
    ConfusionMatrix m;
    m.positive_class = positive_class;
    for (const auto& [truth, predicted] : pairs) {
        const bool truth_pos = truth == positive_class;
        const bool pred_pos = predicted == positive_class;
        if (truth_pos && pred_pos)
            ++m.tp;
        else if (truth_pos && !pred_pos)
            ++m.fn;
        else if (!truth_pos && pred_pos)
            ++m.fp;
        else
            ++m.tn;
    }
    return m;
}

RocCurve roc_curve(const std::vector<ScoredLabel>& scored) {
    require_both_classes(scored, "roc_curve");

    std::vector<ScoredLabel> sorted = scored;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

    long long n_pos = 0;
    long long n_neg = 0;
    for (const ScoredLabel& s : sorted) (s.truth == Label::ng ? n_pos : n_neg)++;

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    long long tp = 0;
    long long fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double score = sorted[i].score;
        // One point per distinct score: consume the whole tie group.
        while (i < sorted.size() && sorted[i].score == score) {
            (sorted[i].truth == Label::ng ? tp : fp)++;
            ++i;
        }
        curve.points.push_back({score,
                                static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return curve;
}

double auc(const std::vector<ScoredLabel>& scored) {
    const RocCurve curve = roc_curve(scored);
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        area += (b.fpr - a.fpr) * (b.tpr + a.tpr) * 0.5;
    }
    return area;
}

double iou(const BBox& a, const BBox& b) {
    const long long ix = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const long long iy = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const long long intersection = ix * iy;
    const long long un = a.area() + b.area() - intersection;
    if (un <= 0) return 0.0;
    return static_cast<double>(intersection) / static_cast<double>(un);
}

double average_precision(const std::vector<std::vector<Detection>>& detections_per_image,
                         const std::vector<std::vector<BBox>>& gts_per_image,
                         double iou_threshold) {
    if (detections_per_image.size() != gts_per_image.size())
        throw ValidationError("average_precision: detections/gts image count mismatch");

    long long n_gt = 0;
    for (const auto& gts : gts_per_image) n_gt += static_cast<long long>(gts.size());
    if (n_gt == 0) throw ValidationError("average_precision: no ground truth");

    struct Ranked {
        double score;
        std::size_t image;
        std::size_t index;
    };
    std::vector<Ranked> ranked;
    for (std::size_t img = 0; img < detections_per_image.size(); ++img) {
        for (std::size_t d = 0; d < detections_per_image[img].size(); ++d) {
            ranked.push_back({detections_per_image[img][d].score, img, d});
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

    std::vector<std::vector<bool>> matched(gts_per_image.size());
    for (std::size_t img = 0; img < gts_per_image.size(); ++img)
        matched[img].assign(gts_per_image[img].size(), false);

    // Precision/recall after each ranked detection.
    std::vector<double> precisions;
    std::vector<double> recalls;
    long long tp = 0;
    long long seen = 0;
    for (const Ranked& r : ranked) {
        const BBox& box = detections_per_image[r.image][r.index].box;
        double best_iou = 0.0;
        std::size_t best_gt = gts_per_image[r.image].size();
        for (std::size_t g = 0; g < gts_per_image[r.image].size(); ++g) {
            if (matched[r.image][g]) continue;
            const double overlap = iou(box, gts_per_image[r.image][g]);
            if (overlap > best_iou) {
                best_iou = overlap;
                best_gt = g;
            }
        }
        ++seen;
        if (best_gt < gts_per_image[r.image].size() && best_iou >= iou_threshold) {
            matched[r.image][best_gt] = true;
            ++tp;
        }
        precisions.push_back(static_cast<double>(tp) / static_cast<double>(seen));
        recalls.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    }

    if (ranked.empty()) return 0.0;

    // p(r) = max over points with recall >= r, integrated over recall.
    for (std::size_t i = precisions.size(); i-- > 1;) {
        precisions[i - 1] = std::max(precisions[i - 1], precisions[i]);
    }
    double area = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precisions.size(); ++i) {
        area += (recalls[i] - prev_recall) * precisions[i];
        prev_recall = recalls[i];
    }
    return area;
}

ScoreSummary evaluate_scored(const std::vector<ScoredLabel>& scored, double threshold) {
    ScoreSummary summary;
    summary.threshold = threshold;

    std::vector<std::pair<Label, Label>> pairs;
    pairs.reserve(scored.size());
    for (const ScoredLabel& s : scored) {
        pairs.emplace_back(s.truth, s.score >= threshold ? Label::ng : Label::ok);
    }
    summary.confusion = confusion(pairs, Label::ng);
    summary.roc = roc_curve(scored);
    summary.auc = auc(scored);
    return summary;
}

std::string roc_to_csv(const RocCurve& curve) {
    std::ostringstream out;
    out << "threshold,fpr,tpr\n";
    out.precision(17);
    for (const RocPoint& p : curve.points) {
        if (std::isinf(p.threshold))
            out << "inf";
        else
            out << p.threshold;
        out << ',' << p.fpr << ',' << p.tpr << '\n';
    }
    return out.str();
}

void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write ROC csv: " + path.string());
    out << roc_to_csv(curve);
    if (!out) throw IoError("short write on ROC csv: " + path.string());
}

}  // namespace inspecta
