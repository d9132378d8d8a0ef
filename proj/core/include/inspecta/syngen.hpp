#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "inspecta/image.hpp"
#include "inspecta/manifest.hpp"
#include "inspecta/types.hpp"

namespace inspecta::syngen {

enum class ShapeKind {
    plate_with_holes,
    ring,
    disc,
    rectangle,
    polygon,
    perforated_panel,
};

const char* to_string(ShapeKind kind);

struct Hole {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 0.0;
};

/// Geometry and intensities of one flat part. The silhouette is a pure
/// function of the spec (shape_seed drives kind-specific parameters such
/// as aspect ratio and polygon vertices), so a part can be regenerated
/// bit-exactly from its spec alone.
struct PartSpec {
    ShapeKind shape_kind = ShapeKind::rectangle;
    int size_px = 96;  // major extent of the silhouette
    double center_x = 64.0;
    double center_y = 64.0;
    std::vector<Hole> hole_pattern;
    std::uint8_t base_intensity = 200;
    std::uint8_t background_intensity = 90;
    std::uint64_t shape_seed = 0;
};

/// Crescent material-removal defect: a circle centered just outside the
/// part boundary; the removed region is circle-intersect-part.
struct DefectSpec {
    int diameter_px = 8;
    double bite_depth_fraction = 0.5;  // outward offset as fraction of radius
    int count = 1;
};

/// Acquisition-condition change applied to the holdout batch; stands in
/// for "photographed on a separate occasion".
struct BatchShift {
    int brightness_delta = 0;
    double noise_sigma = 0.0;
    int blur_radius = 0;
    int translation_jitter = 0;
};

/// Which augmentation ops a dataset permits downstream.
struct AugmentSpec {
    bool rotate90k = true;
    bool flip_h = true;
    bool flip_v = true;
    bool gaussian_noise = false;
    double gaussian_noise_sigma = 0.0;
    bool illumination = false;
    double illumination_gain = 1.0;
    double illumination_bias = 0.0;
};

enum class AugmentOp { rotate90k, flip_h, flip_v, gaussian_noise, illumination };

struct Augmentation {
    AugmentOp op = AugmentOp::rotate90k;
    int quarter_turns = 1;  // rotate90k only
    double sigma = 0.0;     // gaussian_noise only
    double gain = 1.0;      // illumination only
    double bias = 0.0;      // illumination only
};

/// Binary part silhouette, same layout as Image.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> on;

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), on(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}
    bool at(int x, int y) const {
        return on[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] != 0;
    }
    void set(int x, int y, bool value) {
        on[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = value ? 1 : 0;
    }
    long long count() const;
};

/// Rasterizes the silhouette at pixel centers; validates the >=4 px margin
/// and the >=40 level base/background contrast.
Mask rasterize_part(const PartSpec& spec, int image_size);

/// Textured rendering of the part: base intensity on the silhouette,
/// background elsewhere, each with mild Gaussian texture noise.
Image gen_part(const PartSpec& spec, int image_size, std::uint64_t rng_seed);

struct DefectResult {
    Image image;
    std::vector<BBox> boxes;  // tight bounds of changed pixels, one per defect
    int retries = 0;
};

/// Removes `spec.count` crescents from the part. Changed pixels always
/// differ from their previous value by >= 40 intensity levels. Throws
/// Error when no valid edge placement is found after bounded retries.
DefectResult apply_defect(const Image& image, const Mask& part_mask, const DefectSpec& spec,
                          std::uint64_t rng_seed);

struct ShiftedSample {
    Image image;
    std::vector<BBox> boxes;
};

/// Translate -> blur -> brightness -> noise; boxes follow the translation.
ShiftedSample apply_batch_shift(const Image& image, const std::vector<BBox>& boxes,
                                const BatchShift& shift, std::uint8_t fill_intensity,
                                std::uint64_t rng_seed);

struct AugmentedSample {
    Image image;
    std::vector<BBox> boxes;
};

/// Pure geometric/photometric augmentation; gt boxes follow geometric ops
/// and are untouched by photometric ones.
AugmentedSample augment(const Image& image, const std::vector<BBox>& boxes,
                        const Augmentation& aug, std::uint64_t rng_seed);

/// Throws ConfigError when `aug` is not enabled by `spec`.
void ensure_enabled(const AugmentSpec& spec, const Augmentation& aug);

// Quarter-turn and mirror primitives shared by augment and the generator.
Image rotate90(const Image& image);
BBox rotate_box_90(const BBox& box, int width, int height);
Image flip_horizontal(const Image& image);
BBox flip_box_horizontal(const BBox& box, int width);
Image flip_vertical(const Image& image);
BBox flip_box_vertical(const BBox& box, int height);

/// bite_depth_fraction is the outward offset of the tool circle, so small
/// values cut deep crescents and values near 1 leave shallow slivers.
struct DefectRange {
    int diameter_min = 9;
    int diameter_max = 13;
    double bite_min = 0.15;
    double bite_max = 0.35;
    int count = 1;
};

/// Full dataset recipe. For the uniform family n_train_val / n_holdout
/// count images (one fixed part, rotation 0); for the diverse family they
/// count parts, each rendered in all four planar rotations.
struct GeneratorConfig {
    std::string family;  // "uniform" | "diverse"
    std::string name;    // output directory name; defaults to family
    int n_train_val = 0;
    int n_holdout = 0;
    double defect_rate = 0.5;
    int image_size = 128;
    std::uint64_t seed = 0;
    double validation_fraction = 0.25;
    BatchShift batch_shift{12, 6.0, 1, 2};
    AugmentSpec augment;
    DefectRange defect;
};

GeneratorConfig generator_config_from_json(const std::string& text);
GeneratorConfig load_generator_config(const std::filesystem::path& path);

/// Canonical JSON (alphabetical keys); hashed into generator_config_hash.
std::string generator_config_to_json(const GeneratorConfig& config);

struct GeneratedDataset {
    DatasetManifest manifest;
    std::filesystem::path dir;  // <out_root>/<name>
};

/// Writes `<out>/<name>/images/*.pgm` and `<out>/<name>/manifest.json`.
/// Pure function of (config, seed): regeneration is byte-identical.
GeneratedDataset gen_dataset(const GeneratorConfig& config, const std::filesystem::path& out_root);

/// The fixed part used by every uniform-family image.
PartSpec uniform_part_spec(int image_size);

/// Deterministic per-part spec draw for the diverse family.
PartSpec diverse_part_spec(int image_size, std::uint64_t master_seed, int part_index);

}  // namespace inspecta::syngen
