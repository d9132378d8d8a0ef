#pragma once

#include <string>
#include <vector>

#include "inspecta/image.hpp"

namespace inspecta {

/// Fixed feature map standing in for a learned backbone: an 8x8 grid of
/// mean-pooled intensities plus 4-bin gradient-orientation histograms over
/// the same grid. Normalization constants live here, not in the data, so
/// extraction is a pure function of the image.
struct FeatureConfig {
    int input_size = 128;  // expected square image side; must be divisible by grid
    int grid = 8;
    int orient_bins = 4;
    double pooled_mean = 128.0;
    double pooled_std = 64.0;
    double grad_mean = 0.0;   // gradient block carries per-pixel edge fractions
    double grad_std = 0.25;  // one 16 px edge through a 16x16 cell reads ~0.25
    // Magnitudes below the floor are dropped before binning: texture and
    // sensor noise sit near 10, blur shoulders near 37, while material
    // edge cores stay above 70 even after mild defocus.
    double grad_floor = 40.0;

    int feature_length() const { return grid * grid * (1 + orient_bins); }
    std::string layout_id() const;

    bool operator==(const FeatureConfig&) const = default;
};

struct FeatureVector {
    std::vector<double> values;
    std::string layout_id;
};

/// Layout: grid*grid pooled cells (row-major), then grid*grid cells x
/// orient_bins gradient histogram (cell-major). Throws ValidationError on
/// size mismatch.
FeatureVector extract_features(const Image& image, const FeatureConfig& config);

}  // namespace inspecta
