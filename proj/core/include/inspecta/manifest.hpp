#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "inspecta/image.hpp"
#include "inspecta/types.hpp"

namespace inspecta {

/// A dataset: named sample list plus the train/validation/holdout protocol.
///
/// Invariants enforced by validate_manifest:
///  - image_id unique within the manifest,
///  - every sample's label matches its gt_boxes (NG iff nonempty),
///  - split assignments are exactly one per listed sample,
///  - no batch_id is shared between holdout and non-holdout samples,
///  - every box satisfies x_min < x_max, y_min < y_max with nonnegative
///    coordinates (bounds against pixels are checked where images load).
struct DatasetManifest {
    std::string name;
    std::uint64_t seed = 0;
    std::string generator_config_hash;
    std::vector<Sample> samples;
    std::map<std::string, Split> split_assignments;
};

/// Parses and fully validates a manifest file. Error messages name the
/// offending image_id and field.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Canonical serialization: alphabetical keys, 2-space indent, trailing
/// newline. load(save(m)) and save(load(file)) are byte-identical.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text, const std::string& source_name);

void validate_manifest(const DatasetManifest& manifest);

/// Deterministic random split over opaque ids: |validation| = round(f*n).
/// Throws ConfigError on empty input or fraction outside (0,1).
std::map<std::string, Split> split_ids(const std::vector<std::string>& ids,
                                       double validation_fraction, std::uint64_t seed);

/// Split protocol over a sample pool (holdout batches excluded upstream).
std::map<std::string, Split> split_dataset(const std::vector<Sample>& samples,
                                           double validation_fraction, std::uint64_t seed);

Split split_of(const DatasetManifest& manifest, const std::string& image_id);

std::vector<const Sample*> samples_in_split(const DatasetManifest& manifest, Split split);

/// A sample with its pixels materialized; unit of work for training and
/// evaluation.
struct LoadedSample {
    std::string image_id;
    Image image;
    std::vector<BBox> gt_boxes;
    Label label = Label::ok;
};

/// Loads every image of a split; `root` is the manifest's directory.
/// Verifies that each gt box lies within its image bounds.
std::vector<LoadedSample> load_split(const DatasetManifest& manifest,
                                     const std::filesystem::path& root, Split split);

}  // namespace inspecta
