#include "inspecta/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "inspecta/error.hpp"
#include "inspecta/hash.hpp"
#include "inspecta/rng.hpp"

namespace inspecta::syngen {

namespace {

using nlohmann::json;

// Stream ids for counter-based randomness; one stream per concern so a
// sample regenerates identically whether or not its siblings exist.
constexpr std::uint64_t kShapeStream = 1;
constexpr std::uint64_t kTextureStream = 2;
constexpr std::uint64_t kDefectParamStream = 3;
constexpr std::uint64_t kDefectStream = 4;
constexpr std::uint64_t kShiftStream = 5;
constexpr std::uint64_t kNgPickStream = 6;

constexpr double kPartTextureSigma = 3.0;
constexpr double kBackgroundTextureSigma = 2.0;
constexpr int kMarginPx = 4;
constexpr int kMinContrast = 40;
constexpr int kMinDefectShift = 40;

std::uint8_t clamp_u8(double value) {
    return static_cast<std::uint8_t>(std::clamp<long long>(std::llround(value), 0, 255));
}

// Kind-specific dimensions derived purely from the spec.
struct Geometry {
    double half_w = 0.0;
    double half_h = 0.0;
    double r_outer = 0.0;
    double r_inner = 0.0;
    std::vector<double> poly_x;
    std::vector<double> poly_y;
};

Geometry derive_geometry(const PartSpec& spec) {
    Geometry g;
    Rng rng = Rng::for_stream(spec.shape_seed, kShapeStream, static_cast<std::uint64_t>(spec.shape_kind));
    const double half = spec.size_px / 2.0;
    switch (spec.shape_kind) {
        case ShapeKind::rectangle:
            g.half_w = half;
            g.half_h = half * (0.60 + 0.40 * rng.next_unit());
            break;
        case ShapeKind::plate_with_holes:
            g.half_w = half;
            g.half_h = half * (0.45 + 0.15 * rng.next_unit());
            break;
        case ShapeKind::disc:
            g.r_outer = half;
            break;
        case ShapeKind::ring:
            g.r_outer = half;
            g.r_inner = half * 0.40;
            break;
        case ShapeKind::perforated_panel:
            g.half_w = half * (0.85 + 0.15 * rng.next_unit());
            g.half_h = g.half_w * (0.75 + 0.25 * rng.next_unit());
            break;
        case ShapeKind::polygon: {
            const int vertices = rng.uniform_int(6, 8);
            const double step = 2.0 * std::numbers::pi / vertices;
            for (int i = 0; i < vertices; ++i) {
                const double radius = half * (0.85 + 0.15 * rng.next_unit());
                const double angle = step * i + (rng.next_unit() - 0.5) * step * 0.45;
                g.poly_x.push_back(radius * std::cos(angle));
                g.poly_y.push_back(radius * std::sin(angle));
            }
            break;
        }
    }
    return g;
}

bool point_in_polygon(const std::vector<double>& xs, const std::vector<double>& ys, double px, double py) {
    bool inside = false;
    const std::size_t n = xs.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((ys[i] > py) != (ys[j] > py)) {
            const double x_cross = xs[j] + (py - ys[j]) / (ys[i] - ys[j]) * (xs[i] - xs[j]);
            if (px < x_cross) inside = !inside;
        }
    }
    return inside;
}

bool point_in_silhouette(const PartSpec& spec, const Geometry& g, double px, double py) {
    const double dx = px - spec.center_x;
    const double dy = py - spec.center_y;
    bool inside = false;
    switch (spec.shape_kind) {
        case ShapeKind::rectangle:
        case ShapeKind::plate_with_holes:
        case ShapeKind::perforated_panel:
            inside = std::abs(dx) <= g.half_w && std::abs(dy) <= g.half_h;
            break;
        case ShapeKind::disc:
            inside = dx * dx + dy * dy <= g.r_outer * g.r_outer;
            break;
        case ShapeKind::ring: {
            const double d2 = dx * dx + dy * dy;
            inside = d2 <= g.r_outer * g.r_outer && d2 >= g.r_inner * g.r_inner;
            break;
        }
        case ShapeKind::polygon:
            inside = point_in_polygon(g.poly_x, g.poly_y, dx, dy);
            break;
    }
    if (!inside) return false;
    for (const Hole& hole : spec.hole_pattern) {
        const double hx = px - hole.cx;
        const double hy = py - hole.cy;
        if (hx * hx + hy * hy <= hole.radius * hole.radius) return false;
    }
    return true;
}

std::uint8_t background_estimate(const Image& image, const Mask& mask) {
    std::vector<std::uint8_t> outside;
    outside.reserve(image.pixels.size());
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            if (!mask.at(x, y)) outside.push_back(image.at(x, y));
        }
    }
    if (outside.empty()) throw ValidationError("apply_defect: part mask covers the whole image");
    auto mid = outside.begin() + static_cast<std::ptrdiff_t>(outside.size() / 2);
    std::nth_element(outside.begin(), mid, outside.end());
    return *mid;
}

// Removed-material intensity: the revealed background, pushed to at least
// kMinDefectShift levels away from the previous pixel value so that every
// defect pixel is unambiguously changed.
std::uint8_t removed_intensity(std::uint8_t previous, std::uint8_t background) {
    const int delta = static_cast<int>(background) - static_cast<int>(previous);
    if (std::abs(delta) >= kMinDefectShift) return background;
    const int direction = delta >= 0 ? 1 : -1;
    int value = static_cast<int>(previous) + direction * kMinDefectShift;
    if (value < 0 || value > 255) value = static_cast<int>(previous) - direction * kMinDefectShift;
    return static_cast<std::uint8_t>(std::clamp(value, 0, 255));
}

struct PixelCoord {
    int x;
    int y;
};

std::vector<PixelCoord> boundary_pixels(const Mask& mask) {
    std::vector<PixelCoord> out;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            const bool edge = x == 0 || x == mask.width - 1 || y == 0 || y == mask.height - 1 ||
                              !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) ||
                              !mask.at(x, y + 1);
            if (edge) out.push_back({x, y});
        }
    }
    return out;
}

json augment_to_json(const AugmentSpec& a) {
    return json{{"rotate90k", a.rotate90k},
                {"flip_h", a.flip_h},
                {"flip_v", a.flip_v},
                {"gaussian_noise", a.gaussian_noise},
                {"gaussian_noise_sigma", a.gaussian_noise_sigma},
                {"illumination", a.illumination},
                {"illumination_gain", a.illumination_gain},
                {"illumination_bias", a.illumination_bias}};
}

json shift_to_json(const BatchShift& s) {
    return json{{"brightness_delta", s.brightness_delta},
                {"noise_sigma", s.noise_sigma},
                {"blur_radius", s.blur_radius},
                {"translation_jitter", s.translation_jitter}};
}

json defect_to_json(const DefectRange& d) {
    return json{{"diameter_min", d.diameter_min},
                {"diameter_max", d.diameter_max},
                {"bite_min", d.bite_min},
                {"bite_max", d.bite_max},
                {"count", d.count}};
}

int family_min_contrast(const std::string& family) {
    // Both families render parts at 200 on a 90 background.
    return 110;
}

void validate_config(const GeneratorConfig& c) {
    if (c.family != "uniform" && c.family != "diverse")
        throw ConfigError("generator config: family must be 'uniform' or 'diverse', got '" + c.family + "'");
    if (c.n_train_val < 2) throw ConfigError("generator config: n_train_val must be >= 2");
    if (c.n_holdout < 0) throw ConfigError("generator config: n_holdout must be >= 0");
    if (!(c.defect_rate >= 0.0 && c.defect_rate <= 1.0))
        throw ConfigError("generator config: defect_rate must lie in [0,1]");
    if (c.image_size < 64 || c.image_size % 16 != 0)
        throw ConfigError("generator config: image_size must be >= 64 and divisible by 16");
    if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0))
        throw ConfigError("generator config: validation_fraction must lie in (0,1)");
    if (c.defect.diameter_min < 2 || c.defect.diameter_min > c.defect.diameter_max ||
        c.defect.diameter_max > c.image_size / 4)
        throw ConfigError("generator config: defect diameter range is invalid");
    if (!(c.defect.bite_min > 0.0 && c.defect.bite_min <= c.defect.bite_max && c.defect.bite_max <= 1.0))
        throw ConfigError("generator config: defect bite range must lie in (0,1]");
    if (c.defect.count < 1) throw ConfigError("generator config: defect count must be >= 1");
    if (c.batch_shift.noise_sigma < 0.0 || c.batch_shift.blur_radius < 0 ||
        c.batch_shift.translation_jitter < 0)
        throw ConfigError("generator config: batch_shift magnitudes must be nonnegative");
    if (c.batch_shift.translation_jitter >= kMarginPx)
        throw ConfigError("generator config: translation_jitter must be < " + std::to_string(kMarginPx));
    // Keep parts distinguishable after the shift: contrast - 3 sigma >= 20.
    if (family_min_contrast(c.family) - 3.0 * c.batch_shift.noise_sigma < 20.0)
        throw ConfigError("generator config: batch_shift.noise_sigma leaves post-shift contrast below 20");
}

}  // namespace

const char* to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::plate_with_holes: return "plate_with_holes";
        case ShapeKind::ring: return "ring";
        case ShapeKind::disc: return "disc";
        case ShapeKind::rectangle: return "rectangle";
        case ShapeKind::polygon: return "polygon";
        case ShapeKind::perforated_panel: return "perforated_panel";
    }
    return "?";
}

long long Mask::count() const {
    long long total = 0;
    for (std::uint8_t v : on) total += v != 0 ? 1 : 0;
    return total;
}

Mask rasterize_part(const PartSpec& spec, int image_size) {
    if (image_size < 16) throw ConfigError("rasterize_part: image_size too small");
    if (spec.size_px < 8) throw ValidationError("rasterize_part: silhouette does not fit (size_px too small)");
    if (std::abs(static_cast<int>(spec.base_intensity) - static_cast<int>(spec.background_intensity)) < kMinContrast)
        throw ValidationError("rasterize_part: base/background contrast below " + std::to_string(kMinContrast));

    const Geometry geometry = derive_geometry(spec);
    Mask mask(image_size, image_size);
    int min_x = image_size, min_y = image_size, max_x = -1, max_y = -1;
    for (int y = 0; y < image_size; ++y) {
        for (int x = 0; x < image_size; ++x) {
            if (point_in_silhouette(spec, geometry, x + 0.5, y + 0.5)) {
                mask.set(x, y, true);
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
        }
    }
    if (max_x < 0) throw ValidationError("rasterize_part: silhouette does not fit (empty rasterization)");
    if (min_x < kMarginPx || min_y < kMarginPx || max_x >= image_size - kMarginPx ||
        max_y >= image_size - kMarginPx)
        throw ValidationError("rasterize_part: silhouette does not fit (margin below " +
                              std::to_string(kMarginPx) + " px)");
    return mask;
}

Image gen_part(const PartSpec& spec, int image_size, std::uint64_t rng_seed) {
    const Mask mask = rasterize_part(spec, image_size);
    Rng rng = Rng::for_stream(rng_seed, kTextureStream, 0);
    Image image(image_size, image_size);
    for (int y = 0; y < image_size; ++y) {
        for (int x = 0; x < image_size; ++x) {
            if (mask.at(x, y)) {
                image.at(x, y) = clamp_u8(rng.normal(spec.base_intensity, kPartTextureSigma));
            } else {
                image.at(x, y) = clamp_u8(rng.normal(spec.background_intensity, kBackgroundTextureSigma));
            }
        }
    }
    return image;
}

DefectResult apply_defect(const Image& image, const Mask& part_mask, const DefectSpec& spec,
                          std::uint64_t rng_seed) {
    if (spec.count < 1) throw ConfigError("apply_defect: count must be >= 1");
    if (spec.diameter_px < 2) throw ConfigError("apply_defect: diameter_px must be >= 2");
    if (!(spec.bite_depth_fraction > 0.0 && spec.bite_depth_fraction <= 1.0))
        throw ConfigError("apply_defect: bite_depth_fraction must lie in (0,1]");
    if (image.width != part_mask.width || image.height != part_mask.height)
        throw ValidationError("apply_defect: image/mask size mismatch");
    if (part_mask.count() == 0) throw ValidationError("apply_defect: empty part mask");

    const std::vector<PixelCoord> boundary = boundary_pixels(part_mask);
    if (boundary.empty()) throw ValidationError("apply_defect: part has no boundary pixels");

    const std::uint8_t background = background_estimate(image, part_mask);
    const double radius = spec.diameter_px / 2.0;

    DefectResult result;
    result.image = image;
    Mask used(image.width, image.height);
    Rng rng = Rng::for_stream(rng_seed, kDefectStream, 0);

    constexpr int kMaxAttempts = 64;
    for (int defect = 0; defect < spec.count; ++defect) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            ++result.retries;
            const PixelCoord anchor = boundary[static_cast<std::size_t>(
                rng.next_u64() % boundary.size())];

            // Outward normal from the local mass of the part.
            double sum_x = 0.0, sum_y = 0.0;
            int count = 0;
            for (int dy = -3; dy <= 3; ++dy) {
                for (int dx = -3; dx <= 3; ++dx) {
                    const int nx = anchor.x + dx;
                    const int ny = anchor.y + dy;
                    if (nx >= 0 && nx < part_mask.width && ny >= 0 && ny < part_mask.height &&
                        part_mask.at(nx, ny)) {
                        sum_x += nx + 0.5;
                        sum_y += ny + 0.5;
                        ++count;
                    }
                }
            }
            double nx = (anchor.x + 0.5) - sum_x / count;
            double ny = (anchor.y + 0.5) - sum_y / count;
            const double norm = std::hypot(nx, ny);
            if (norm < 1e-9) {
                const double angle = 2.0 * std::numbers::pi * rng.next_unit();
                nx = std::cos(angle);
                ny = std::sin(angle);
            } else {
                nx /= norm;
                ny /= norm;
            }
            const double cx = (anchor.x + 0.5) + nx * spec.bite_depth_fraction * radius;
            const double cy = (anchor.y + 0.5) + ny * spec.bite_depth_fraction * radius;

            // The crescent: circle-intersect-part around the boundary point.
            std::vector<PixelCoord> changed;
            const int x_lo = std::max(0, static_cast<int>(std::floor(cx - radius)) - 1);
            const int x_hi = std::min(image.width - 1, static_cast<int>(std::ceil(cx + radius)) + 1);
            const int y_lo = std::max(0, static_cast<int>(std::floor(cy - radius)) - 1);
            const int y_hi = std::min(image.height - 1, static_cast<int>(std::ceil(cy + radius)) + 1);
            BBox box{image.width, image.height, 0, 0};
            bool touches_used = false;
            for (int y = y_lo; y <= y_hi && !touches_used; ++y) {
                for (int x = x_lo; x <= x_hi; ++x) {
                    if (!part_mask.at(x, y)) continue;
                    const double ddx = (x + 0.5) - cx;
                    const double ddy = (y + 0.5) - cy;
                    if (ddx * ddx + ddy * ddy > radius * radius) continue;
                    // Keep defects pairwise non-adjacent so their boxes and
                    // connected components stay separable.
                    for (int uy = std::max(0, y - 1); uy <= std::min(image.height - 1, y + 1); ++uy) {
                        for (int ux = std::max(0, x - 1); ux <= std::min(image.width - 1, x + 1); ++ux) {
                            if (used.at(ux, uy)) touches_used = true;
                        }
                    }
                    if (touches_used) break;
                    changed.push_back({x, y});
                    box.x_min = std::min(box.x_min, x);
                    box.y_min = std::min(box.y_min, y);
                    box.x_max = std::max(box.x_max, x + 1);
                    box.y_max = std::max(box.y_max, y + 1);
                }
            }
            if (touches_used || changed.empty() || !box.valid() || box.area() < 4) continue;

            for (const PixelCoord& p : changed) {
                result.image.at(p.x, p.y) = removed_intensity(result.image.at(p.x, p.y), background);
                used.set(p.x, p.y, true);
            }
            result.boxes.push_back(box);
            placed = true;
        }
        if (!placed)
            throw Error("apply_defect: no valid edge placement found after " +
                        std::to_string(result.retries) + " retries");
    }
    return result;
}

ShiftedSample apply_batch_shift(const Image& image, const std::vector<BBox>& boxes,
                                const BatchShift& shift, std::uint8_t fill_intensity,
                                std::uint64_t rng_seed) {
    Rng rng = Rng::for_stream(rng_seed, kShiftStream, 0);
    ShiftedSample out;

    // Translation with background fill; boxes follow.
    int dx = 0, dy = 0;
    if (shift.translation_jitter > 0) {
        dx = rng.uniform_int(-shift.translation_jitter, shift.translation_jitter);
        dy = rng.uniform_int(-shift.translation_jitter, shift.translation_jitter);
    }
    Image shifted(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const int sx = x - dx;
            const int sy = y - dy;
            if (image.in_bounds(sx, sy)) {
                shifted.at(x, y) = image.at(sx, sy);
            } else {
                shifted.at(x, y) = clamp_u8(rng.normal(fill_intensity, kBackgroundTextureSigma));
            }
        }
    }
    for (const BBox& box : boxes) {
        out.boxes.push_back({box.x_min + dx, box.y_min + dy, box.x_max + dx, box.y_max + dy});
    }

    // Truncated box blur, horizontal then vertical.
    if (shift.blur_radius > 0) {
        const int r = shift.blur_radius;
        std::vector<int> tmp(shifted.pixels.size());
        for (int y = 0; y < shifted.height; ++y) {
            for (int x = 0; x < shifted.width; ++x) {
                int sum = 0, count = 0;
                for (int k = -r; k <= r; ++k) {
                    const int sx = x + k;
                    if (sx < 0 || sx >= shifted.width) continue;
                    sum += shifted.at(sx, y);
                    ++count;
                }
                tmp[static_cast<std::size_t>(y) * shifted.width + x] = (2 * sum + count) / (2 * count);
            }
        }
        for (int y = 0; y < shifted.height; ++y) {
            for (int x = 0; x < shifted.width; ++x) {
                int sum = 0, count = 0;
                for (int k = -r; k <= r; ++k) {
                    const int sy = y + k;
                    if (sy < 0 || sy >= shifted.height) continue;
                    sum += tmp[static_cast<std::size_t>(sy) * shifted.width + x];
                    ++count;
                }
                shifted.at(x, y) = static_cast<std::uint8_t>(std::clamp((2 * sum + count) / (2 * count), 0, 255));
            }
        }
    }

    if (shift.brightness_delta != 0) {
        for (std::uint8_t& v : shifted.pixels) {
            v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + shift.brightness_delta, 0, 255));
        }
    }

    if (shift.noise_sigma > 0.0) {
        for (std::uint8_t& v : shifted.pixels) {
            v = clamp_u8(rng.normal(v, shift.noise_sigma));
        }
    }

    out.image = std::move(shifted);
    return out;
}

Image rotate90(const Image& image) {
    Image out(image.height, image.width);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = image.at(y, image.height - 1 - x);
        }
    }
    return out;
}

BBox rotate_box_90(const BBox& box, int /*width*/, int height) {
    return {height - box.y_max, box.x_min, height - box.y_min, box.x_max};
}

Image flip_horizontal(const Image& image) {
    Image out(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            out.at(x, y) = image.at(image.width - 1 - x, y);
        }
    }
    return out;
}

BBox flip_box_horizontal(const BBox& box, int width) {
    return {width - box.x_max, box.y_min, width - box.x_min, box.y_max};
}

Image flip_vertical(const Image& image) {
    Image out(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            out.at(x, y) = image.at(x, image.height - 1 - y);
        }
    }
    return out;
}

BBox flip_box_vertical(const BBox& box, int height) {
    return {box.x_min, height - box.y_max, box.x_max, height - box.y_min};
}

void ensure_enabled(const AugmentSpec& spec, const Augmentation& aug) {
    bool ok = false;
    switch (aug.op) {
        case AugmentOp::rotate90k: ok = spec.rotate90k; break;
        case AugmentOp::flip_h: ok = spec.flip_h; break;
        case AugmentOp::flip_v: ok = spec.flip_v; break;
        case AugmentOp::gaussian_noise: ok = spec.gaussian_noise; break;
        case AugmentOp::illumination: ok = spec.illumination; break;
    }
    if (!ok) throw ConfigError("augmentation op is not enabled by the dataset's AugmentSpec");
}

AugmentedSample augment(const Image& image, const std::vector<BBox>& boxes,
                        const Augmentation& aug, std::uint64_t rng_seed) {
    AugmentedSample out{image, boxes};
    switch (aug.op) {
        case AugmentOp::rotate90k: {
            const int turns = ((aug.quarter_turns % 4) + 4) % 4;
            for (int t = 0; t < turns; ++t) {
                const int w = out.image.width;
                const int h = out.image.height;
                out.image = rotate90(out.image);
                for (BBox& box : out.boxes) box = rotate_box_90(box, w, h);
            }
            break;
        }
        case AugmentOp::flip_h:
            out.image = flip_horizontal(out.image);
            for (BBox& box : out.boxes) box = flip_box_horizontal(box, image.width);
            break;
        case AugmentOp::flip_v:
            out.image = flip_vertical(out.image);
            for (BBox& box : out.boxes) box = flip_box_vertical(box, image.height);
            break;
        case AugmentOp::gaussian_noise: {
            Rng rng = Rng::for_stream(rng_seed, kTextureStream, 1);
            for (std::uint8_t& v : out.image.pixels) v = clamp_u8(rng.normal(v, aug.sigma));
            break;
        }
        case AugmentOp::illumination:
            for (std::uint8_t& v : out.image.pixels) v = clamp_u8(aug.gain * v + aug.bias);
            break;
    }
    return out;
}

PartSpec uniform_part_spec(int image_size) {
    // A plain flat plate: every image of the uniform family is this exact
    // silhouette at the canonical pose.
    PartSpec spec;
    spec.shape_kind = ShapeKind::rectangle;
    spec.size_px = static_cast<int>(std::llround(image_size * 0.75));
    spec.center_x = image_size / 2.0;
    spec.center_y = image_size / 2.0;
    spec.base_intensity = 200;
    spec.background_intensity = 90;
    spec.shape_seed = 0x1221aa55u;
    return spec;
}

PartSpec diverse_part_spec(int image_size, std::uint64_t master_seed, int part_index) {
    Rng rng = Rng::for_stream(master_seed, kShapeStream, static_cast<std::uint64_t>(part_index));
    PartSpec spec;
    static constexpr ShapeKind kKinds[] = {ShapeKind::plate_with_holes, ShapeKind::ring,
                                           ShapeKind::disc,             ShapeKind::rectangle,
                                           ShapeKind::polygon,          ShapeKind::perforated_panel};
    spec.shape_kind = kKinds[rng.uniform_int(0, 5)];
    // All parts are flat metal photographed under one camera setup, so
    // they share the family's intensity operating point; the geometry
    // carries the diversity.
    spec.base_intensity = 200;
    spec.background_intensity = 90;
    spec.shape_seed = rng.next_u64();

    // Hole patterns are a pure function of the derived geometry and the
    // pose. All rims are wide-radius: at the scan-window scale they read
    // as locally straight edges, so the only tight arcs in the corpus are
    // the crescent defects themselves.
    auto build = [&spec, image_size](int size, double cx, double cy) {
        PartSpec candidate = spec;
        candidate.size_px = size;
        candidate.center_x = cx;
        candidate.center_y = cy;
        candidate.hole_pattern.clear();
        const Geometry g = derive_geometry(candidate);
        switch (candidate.shape_kind) {
            case ShapeKind::plate_with_holes: {
                const double usable = 2.0 * g.half_w * 0.60;
                const double hole_radius = g.half_h * 0.55;
                candidate.hole_pattern.push_back({cx - usable / 2.0, cy, hole_radius});
                candidate.hole_pattern.push_back({cx + usable / 2.0, cy, hole_radius});
                break;
            }
            case ShapeKind::perforated_panel: {
                const double span_x = 2.0 * g.half_w * 0.80;
                const double span_y = 2.0 * g.half_h * 0.80;
                const double hole_radius = std::min(span_x, span_y) * 0.17;
                for (int gy = 0; gy < 2; ++gy) {
                    for (int gx = 0; gx < 2; ++gx) {
                        candidate.hole_pattern.push_back(
                            {cx + span_x * (gx - 0.5), cy + span_y * (gy - 0.5), hole_radius});
                    }
                }
                break;
            }
            default:
                break;
        }
        return candidate;
    };

    // Comparable-footprint stock: solve size_px so the silhouette area
    // lands on the family target, whatever the shape. Area is monotone in
    // size for a fixed derived geometry, so a binary search suffices; a
    // sub-pixel pose trim then absorbs the integer-size quantization.
    const double target_area = 0.26 * image_size * image_size;
    const double mid_point = image_size / 2.0;
    int lo = image_size / 3;
    int hi = static_cast<int>(image_size * 0.88);
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        const PartSpec candidate = build(mid, mid_point, mid_point);
        if (static_cast<double>(rasterize_part(candidate, image_size).count()) < target_area)
            lo = mid + 1;
        else
            hi = mid;
    }

    const int jitter = image_size / 16;
    const double half = lo / 2.0 + kMarginPx + 1;
    const double cx = std::clamp(mid_point + rng.uniform_int(-jitter, jitter), half,
                                 image_size - half);
    const double cy = std::clamp(mid_point + rng.uniform_int(-jitter, jitter), half,
                                 image_size - half);

    double best_area_gap = std::numeric_limits<double>::infinity();
    PartSpec best = build(lo, cx, cy);
    for (int size : {lo - 1, lo}) {
        if (size < image_size / 3) continue;
        for (int ox = 0; ox < 8; ++ox) {
            for (int oy = 0; oy < 8; ++oy) {
                const PartSpec candidate = build(size, cx + ox * 0.125, cy + oy * 0.125);
                const double gap = std::abs(
                    static_cast<double>(rasterize_part(candidate, image_size).count()) -
                    target_area);
                if (gap < best_area_gap) {
                    best_area_gap = gap;
                    best = candidate;
                }
            }
        }
    }
    return best;
}

std::string generator_config_to_json(const GeneratorConfig& c) {
    const json root{{"family", c.family},
                    {"name", c.name.empty() ? c.family : c.name},
                    {"n_train_val", c.n_train_val},
                    {"n_holdout", c.n_holdout},
                    {"defect_rate", c.defect_rate},
                    {"image_size", c.image_size},
                    {"seed", c.seed},
                    {"validation_fraction", c.validation_fraction},
                    {"batch_shift", shift_to_json(c.batch_shift)},
                    {"augment", augment_to_json(c.augment)},
                    {"defect", defect_to_json(c.defect)}};
    return root.dump(2) + "\n";
}

GeneratorConfig generator_config_from_json(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        throw ConfigError("generator config: invalid JSON");

    static const std::set<std::string> known{"family",        "name",       "n_train_val",
                                             "n_holdout",     "defect_rate", "image_size",
                                             "seed",          "validation_fraction", "batch_shift",
                                             "augment",       "defect"};
    for (auto it = root.begin(); it != root.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("generator config: unknown key '" + it.key() + "'");
    }

    GeneratorConfig c;
    auto fetch = [&](const char* key) -> const json& {
        auto it = root.find(key);
        if (it == root.end()) throw ConfigError(std::string("generator config: missing key '") + key + "'");
        return *it;
    };
    c.family = fetch("family").get<std::string>();
    c.n_train_val = fetch("n_train_val").get<int>();
    c.n_holdout = fetch("n_holdout").get<int>();
    c.defect_rate = fetch("defect_rate").get<double>();
    c.image_size = fetch("image_size").get<int>();
    c.seed = fetch("seed").get<std::uint64_t>();
    if (root.contains("name")) c.name = root["name"].get<std::string>();
    if (root.contains("validation_fraction"))
        c.validation_fraction = root["validation_fraction"].get<double>();

    const json& shift = fetch("batch_shift");
    c.batch_shift.brightness_delta = shift.value("brightness_delta", 0);
    c.batch_shift.noise_sigma = shift.value("noise_sigma", 0.0);
    c.batch_shift.blur_radius = shift.value("blur_radius", 0);
    c.batch_shift.translation_jitter = shift.value("translation_jitter", 0);

    const json& aug = fetch("augment");
    c.augment.rotate90k = aug.value("rotate90k", true);
    c.augment.flip_h = aug.value("flip_h", true);
    c.augment.flip_v = aug.value("flip_v", true);
    c.augment.gaussian_noise = aug.value("gaussian_noise", false);
    c.augment.gaussian_noise_sigma = aug.value("gaussian_noise_sigma", 0.0);
    c.augment.illumination = aug.value("illumination", false);
    c.augment.illumination_gain = aug.value("illumination_gain", 1.0);
    c.augment.illumination_bias = aug.value("illumination_bias", 0.0);

    if (root.contains("defect")) {
        const json& defect = root["defect"];
        c.defect.diameter_min = defect.value("diameter_min", c.defect.diameter_min);
        c.defect.diameter_max = defect.value("diameter_max", c.defect.diameter_max);
        c.defect.bite_min = defect.value("bite_min", c.defect.bite_min);
        c.defect.bite_max = defect.value("bite_max", c.defect.bite_max);
        c.defect.count = defect.value("count", c.defect.count);
    }

    validate_config(c);
    return c;
}

GeneratorConfig load_generator_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open generator config: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return generator_config_from_json(buffer.str());
}

namespace {

std::string format_index(const char* prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%05d", prefix, index);
    return buf;
}

// Units flagged NG per batch: exact count round(rate * n), stratified by
// shape kind so damaged and intact groups have identical composition
// (each part design appears on both sides, like damaging one of each
// duplicate pair). Kind quotas follow largest remainders.
std::vector<bool> pick_ng_units(const std::vector<int>& unit_kinds, int n_units, int first_unit,
                                double rate, std::uint64_t seed, int batch) {
    std::map<int, std::vector<int>> by_kind;
    for (int i = 0; i < n_units; ++i) {
        by_kind[unit_kinds[static_cast<std::size_t>(first_unit + i)]].push_back(first_unit + i);
    }

    const auto total_ng = static_cast<long long>(std::llround(rate * n_units));
    std::map<int, long long> quota;
    std::vector<std::pair<double, int>> remainders;
    long long assigned = 0;
    for (const auto& [kind, units] : by_kind) {
        const double exact = rate * static_cast<double>(units.size());
        quota[kind] = static_cast<long long>(std::floor(exact));
        assigned += quota[kind];
        remainders.push_back({exact - std::floor(exact), kind});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < total_ng && i < remainders.size(); ++i, ++assigned) {
        ++quota[remainders[i].second];
    }

    std::vector<bool> ng(static_cast<std::size_t>(first_unit + n_units), false);
    Rng rng = Rng::for_stream(seed, kNgPickStream, static_cast<std::uint64_t>(batch));
    for (auto& [kind, units] : by_kind) {
        for (std::size_t i = units.size(); i > 1; --i) {
            const std::size_t j = rng.next_u64() % i;
            std::swap(units[i - 1], units[j]);
        }
        for (long long i = 0; i < quota[kind] && i < static_cast<long long>(units.size()); ++i) {
            ng[static_cast<std::size_t>(units[static_cast<std::size_t>(i)])] = true;
        }
    }
    return ng;
}

DefectSpec draw_defect_spec(const DefectRange& range, std::uint64_t seed, int unit) {
    Rng rng = Rng::for_stream(seed, kDefectParamStream, static_cast<std::uint64_t>(unit));
    DefectSpec spec;
    spec.diameter_px = rng.uniform_int(range.diameter_min, range.diameter_max);
    spec.bite_depth_fraction = range.bite_min + (range.bite_max - range.bite_min) * rng.next_unit();
    spec.count = range.count;
    return spec;
}

}  // namespace

GeneratedDataset gen_dataset(const GeneratorConfig& config, const std::filesystem::path& out_root) {
    validate_config(config);
    const std::string name = config.name.empty() ? config.family : config.name;
    const bool diverse = config.family == "diverse";
    const int rotations = diverse ? 4 : 1;

    const std::filesystem::path dir = out_root / name;
    const std::filesystem::path image_dir = dir / "images";
    std::error_code ec;
    std::filesystem::create_directories(image_dir, ec);
    if (ec) throw IoError("cannot create output directory " + image_dir.string() + ": " + ec.message());

    const int n_units = config.n_train_val + config.n_holdout;
    std::vector<int> unit_kinds(static_cast<std::size_t>(n_units), 0);
    if (diverse) {
        for (int unit = 0; unit < n_units; ++unit) {
            unit_kinds[static_cast<std::size_t>(unit)] = static_cast<int>(
                diverse_part_spec(config.image_size, config.seed, unit).shape_kind);
        }
    }
    std::vector<bool> ng_b0 =
        pick_ng_units(unit_kinds, config.n_train_val, 0, config.defect_rate, config.seed, 0);
    std::vector<bool> ng_b1 = pick_ng_units(unit_kinds, config.n_holdout, config.n_train_val,
                                            config.defect_rate, config.seed, 1);

    DatasetManifest manifest;
    manifest.name = name;
    manifest.seed = config.seed;
    manifest.generator_config_hash = hash_hex(generator_config_to_json(config));

    std::vector<std::string> b0_split_units;  // image ids (uniform) or part ids (diverse)

    for (int unit = 0; unit < n_units; ++unit) {
        const bool holdout = unit >= config.n_train_val;
        const bool is_ng = holdout ? ng_b1[static_cast<std::size_t>(unit)]
                                   : ng_b0[static_cast<std::size_t>(unit)];

        const PartSpec spec = diverse ? diverse_part_spec(config.image_size, config.seed, unit)
                                      : uniform_part_spec(config.image_size);
        const Mask mask = rasterize_part(spec, config.image_size);
        Image base = gen_part(spec, config.image_size,
                              mix64(config.seed) ^ mix64(0x7e87u + static_cast<std::uint64_t>(unit)));
        std::vector<BBox> boxes;
        if (is_ng) {
            const DefectSpec defect = draw_defect_spec(config.defect, config.seed, unit);
            DefectResult result = apply_defect(
                base, mask, defect,
                mix64(config.seed) ^ mix64(0xde0fu + static_cast<std::uint64_t>(unit)));
            base = std::move(result.image);
            boxes = std::move(result.boxes);
        }

        const std::string unit_id = format_index(diverse ? "part" : "img", unit);
        if (!holdout) b0_split_units.push_back(unit_id);

        Image rotated = base;
        std::vector<BBox> rotated_boxes = boxes;
        for (int k = 0; k < rotations; ++k) {
            if (k > 0) {
                const int w = rotated.width;
                const int h = rotated.height;
                rotated = rotate90(rotated);
                for (BBox& box : rotated_boxes) box = rotate_box_90(box, w, h);
            }

            Sample sample;
            sample.image_id = diverse ? unit_id + "-r" + std::to_string(90 * k) : unit_id;
            sample.image_path = "images/" + sample.image_id + ".pgm";
            sample.batch_id = holdout ? "B1" : "B0";
            sample.rotation = 90 * k;

            Image final_image = rotated;
            std::vector<BBox> final_boxes = rotated_boxes;
            if (holdout) {
                const int sample_index = unit * rotations + k;
                ShiftedSample shifted = apply_batch_shift(
                    final_image, final_boxes, config.batch_shift, spec.background_intensity,
                    mix64(config.seed) ^ mix64(0x51f7u + static_cast<std::uint64_t>(sample_index)));
                final_image = std::move(shifted.image);
                final_boxes = std::move(shifted.boxes);
            }

            sample.gt_boxes = std::move(final_boxes);
            sample.label = label_of(sample);
            write_pgm(final_image, dir / sample.image_path);
            manifest.samples.push_back(std::move(sample));
        }
    }

    // Train/validation protocol over batch B0. Diverse units are parts, so
    // all four rotations of a part land on the same side of the split.
    const std::map<std::string, Split> unit_split =
        split_ids(b0_split_units, config.validation_fraction, config.seed);
    for (const Sample& sample : manifest.samples) {
        if (sample.batch_id == "B1") {
            manifest.split_assignments[sample.image_id] = Split::holdout;
        } else if (diverse) {
            const std::string unit_id = sample.image_id.substr(0, sample.image_id.find("-r"));
            manifest.split_assignments[sample.image_id] = unit_split.at(unit_id);
        } else {
            manifest.split_assignments[sample.image_id] = unit_split.at(sample.image_id);
        }
    }

    validate_manifest(manifest);
    save_manifest(manifest, dir / "manifest.json");
    return {std::move(manifest), dir};
}

}  // namespace inspecta::syngen
