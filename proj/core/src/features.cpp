#include "inspecta/features.hpp"

#include <cmath>
#include <numbers>

#include "inspecta/error.hpp"

namespace inspecta {

std::string FeatureConfig::layout_id() const {
    return "pool" + std::to_string(grid) + "+grad" + std::to_string(grid) + "x" +
           std::to_string(orient_bins) + "@" + std::to_string(input_size);
}

FeatureVector extract_features(const Image& image, const FeatureConfig& config) {
    if (image.width != config.input_size || image.height != config.input_size)
        throw ValidationError("extract_features: image is " + std::to_string(image.width) + "x" +
                              std::to_string(image.height) + " but config expects " +
                              std::to_string(config.input_size));
    if (config.grid <= 0 || config.input_size % config.grid != 0)
        throw ValidationError("extract_features: input_size must be divisible by grid");

    const int cell = config.input_size / config.grid;
    const int cells = config.grid * config.grid;
    const double cell_px = static_cast<double>(cell) * static_cast<double>(cell);

    FeatureVector out;
    out.layout_id = config.layout_id();
    out.values.assign(static_cast<std::size_t>(config.feature_length()), 0.0);

    // Mean-pooled intensities.
    for (int y = 0; y < config.input_size; ++y) {
        const int cy = y / cell;
        for (int x = 0; x < config.input_size; ++x) {
            out.values[static_cast<std::size_t>(cy * config.grid + x / cell)] += image.at(x, y);
        }
    }
    for (int i = 0; i < cells; ++i) {
        out.values[static_cast<std::size_t>(i)] =
            (out.values[static_cast<std::size_t>(i)] / cell_px - config.pooled_mean) / config.pooled_std;
    }

    // Edge-count orientation histogram over the signed direction circle
    // [0, 2pi), central differences on interior pixels. Signed directions
    // keep concave and convex boundaries apart (the gradient points from
    // dark to bright). Each pixel above the edge floor votes once, split
    // between the two nearest bins, so the histogram measures edge length
    // per direction and stays stable under contrast changes and mild
    // defocus (which scale magnitudes but keep edge cores above the floor).
    const double bin_width = 2.0 * std::numbers::pi / config.orient_bins;
    for (int y = 1; y < config.input_size - 1; ++y) {
        const int cy = y / cell;
        for (int x = 1; x < config.input_size - 1; ++x) {
            const double gx = static_cast<double>(image.at(x + 1, y)) - image.at(x - 1, y);
            const double gy = static_cast<double>(image.at(x, y + 1)) - image.at(x, y - 1);
            const double magnitude = std::hypot(gx, gy);
            if (magnitude < config.grad_floor || magnitude == 0.0) continue;
            double angle = std::atan2(gy, gx);
            if (angle < 0.0) angle += 2.0 * std::numbers::pi;
            const double position = angle / bin_width - 0.5;  // bin centers at (b+0.5)w
            const double lower = std::floor(position);
            const double upper_frac = position - lower;
            const int bin_lo = (static_cast<int>(lower) % config.orient_bins + config.orient_bins) %
                               config.orient_bins;
            const int bin_hi = (bin_lo + 1) % config.orient_bins;
            const std::size_t base =
                static_cast<std::size_t>(cells + (cy * config.grid + x / cell) * config.orient_bins);
            out.values[base + static_cast<std::size_t>(bin_lo)] += 1.0 - upper_frac;
            out.values[base + static_cast<std::size_t>(bin_hi)] += upper_frac;
        }
    }
    for (int i = 0; i < cells * config.orient_bins; ++i) {
        double& v = out.values[static_cast<std::size_t>(cells + i)];
        v = (v / cell_px - config.grad_mean) / config.grad_std;
    }
    return out;
}

}  // namespace inspecta
