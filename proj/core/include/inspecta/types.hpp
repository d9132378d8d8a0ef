#pragma once

#include <string>
#include <vector>

namespace inspecta {

/// Image-level verdict: a part is NG iff it carries at least one defect.
enum class Label { ok, ng };

enum class Split { train, validation, holdout };

const char* to_string(Label label);
const char* to_string(Split split);
Label label_from_string(const std::string& text);
Split split_from_string(const std::string& text);

/// Axis-aligned box in integer pixel coordinates, half-open convention:
/// pixel column c is inside iff x_min <= c < x_max (same for rows).
struct BBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    bool valid() const { return x_min < x_max && y_min < y_max; }
    long long area() const {
        return static_cast<long long>(x_max - x_min) * static_cast<long long>(y_max - y_min);
    }
    bool contains(int x, int y) const { return x >= x_min && x < x_max && y >= y_min && y < y_max; }

    bool operator==(const BBox&) const = default;
};

/// One annotated image: pixel file reference, ground-truth boxes and
/// acquisition provenance.
struct Sample {
    std::string image_id;
    std::string image_path;  // relative to the manifest's directory
    std::string batch_id;
    int rotation = 0;  // degrees, one of {0, 90, 180, 270}
    Label label = Label::ok;
    std::vector<BBox> gt_boxes;
};

/// NG iff the sample has at least one ground-truth box.
Label label_of(const Sample& sample);

/// A scored box produced by the detector.
struct Detection {
    BBox box;
    double score = 0.0;  // probability in [0,1]

    bool operator==(const Detection&) const = default;
};

}  // namespace inspecta
