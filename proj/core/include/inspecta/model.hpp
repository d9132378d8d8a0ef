#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "inspecta/features.hpp"

namespace inspecta {

enum class ModelKind : std::uint8_t { classifier = 0, detector = 1 };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);

/// Linear scorer over fixed features. For detectors, `features.input_size`
/// is the scan window side and `window_stride` the scan step.
struct ModelParams {
    static constexpr std::uint32_t kFormatVersion = 1;

    ModelKind kind = ModelKind::classifier;
    FeatureConfig features;
    int window_stride = 0;  // detector only
    std::vector<double> weights;
    double bias = 0.0;
    std::string training_config_hash;
};

/// p = logistic(w . x + b). Throws ValidationError on length mismatch.
double sigmoid_score(const ModelParams& params, const FeatureVector& features);

/// Versioned little-endian binary format with trailing CRC32:
/// "INSP" | version u32 | kind u8 | feature block | stride u32 |
/// hash string | weight count u64 | bias f64 | weights f64[] | crc32 u32.
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace inspecta
