#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "inspecta/metrics.hpp"

namespace inspecta {

/// Standalone SVG: unit axes, dashed diagonal reference, one polyline per
/// curve and a legend carrying AUC to 3 decimals. Throws on an empty list.
std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves);

void render_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves,
                    const std::filesystem::path& out_path);

}  // namespace inspecta
