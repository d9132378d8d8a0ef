#include "inspecta/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "inspecta/error.hpp"
#include "inspecta/rng.hpp"

namespace inspecta {

namespace {

using nlohmann::json;

json require_key(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError("manifest schema violation: missing key '" + std::string(key) + "' in " + where);
    return *it;
}

BBox box_from_json(const json& node, const std::string& where) {
    if (!node.is_object()) throw ValidationError("manifest schema violation: gt_box is not an object in " + where);
    BBox box;
    box.x_min = require_key(node, "x_min", where).get<int>();
    box.y_min = require_key(node, "y_min", where).get<int>();
    box.x_max = require_key(node, "x_max", where).get<int>();
    box.y_max = require_key(node, "y_max", where).get<int>();
    return box;
}

json box_to_json(const BBox& box) {
    return json{{"x_min", box.x_min}, {"y_min", box.y_min}, {"x_max", box.x_max}, {"y_max", box.y_max}};
}

}  // namespace

DatasetManifest manifest_from_json(const std::string& text, const std::string& source_name) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded())
        throw ValidationError("manifest schema violation: invalid JSON in " + source_name);
    if (!root.is_object())
        throw ValidationError("manifest schema violation: top level is not an object in " + source_name);

    DatasetManifest manifest;
    manifest.name = require_key(root, "name", source_name).get<std::string>();
    manifest.seed = require_key(root, "seed", source_name).get<std::uint64_t>();
    manifest.generator_config_hash =
        require_key(root, "generator_config_hash", source_name).get<std::string>();

    const json samples = require_key(root, "samples", source_name);
    if (!samples.is_array())
        throw ValidationError("manifest schema violation: 'samples' is not an array in " + source_name);

    for (const json& node : samples) {
        Sample sample;
        sample.image_id = require_key(node, "image_id", source_name).get<std::string>();
        const std::string where = "sample '" + sample.image_id + "'";
        sample.image_path = require_key(node, "image_path", where).get<std::string>();
        sample.batch_id = require_key(node, "batch_id", where).get<std::string>();
        sample.rotation = require_key(node, "rotation", where).get<int>();
        for (const json& box : require_key(node, "gt_boxes", where)) {
            sample.gt_boxes.push_back(box_from_json(box, where));
        }
        // Label is derived, never stored. A hand-written manifest may still
        // carry one; it must then agree with the boxes.
        if (auto it = node.find("label"); it != node.end()) {
            sample.label = label_from_string(it->get<std::string>());
            if (sample.label != label_of(sample))
                throw ValidationError("label/box inconsistency: sample '" + sample.image_id + "' is marked " +
                                      to_string(sample.label) + " but has " +
                                      std::to_string(sample.gt_boxes.size()) + " gt_boxes");
        } else {
            sample.label = label_of(sample);
        }
        manifest.samples.push_back(std::move(sample));
    }

    const json assignments = require_key(root, "split_assignments", source_name);
    if (!assignments.is_object())
        throw ValidationError("manifest schema violation: 'split_assignments' is not an object in " + source_name);
    for (auto it = assignments.begin(); it != assignments.end(); ++it) {
        manifest.split_assignments[it.key()] = split_from_string(it.value().get<std::string>());
    }

    validate_manifest(manifest);
    return manifest;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
    json samples = json::array();
    for (const Sample& sample : manifest.samples) {
        json boxes = json::array();
        for (const BBox& box : sample.gt_boxes) boxes.push_back(box_to_json(box));
        samples.push_back(json{{"image_id", sample.image_id},
                               {"image_path", sample.image_path},
                               {"batch_id", sample.batch_id},
                               {"rotation", sample.rotation},
                               {"gt_boxes", std::move(boxes)}});
    }
    json assignments = json::object();
    for (const auto& [id, split] : manifest.split_assignments) assignments[id] = to_string(split);

    const json root{{"name", manifest.name},
                    {"seed", manifest.seed},
                    {"generator_config_hash", manifest.generator_config_hash},
                    {"samples", std::move(samples)},
                    {"split_assignments", std::move(assignments)}};
    return root.dump(2) + "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return manifest_from_json(buffer.str(), path.string());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    validate_manifest(manifest);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest file: " + path.string());
    out << manifest_to_json(manifest);
    if (!out) throw IoError("short write on manifest file: " + path.string());
}

void validate_manifest(const DatasetManifest& manifest) {
    std::set<std::string> seen_ids;
    std::set<std::string> holdout_batches;
    std::set<std::string> pool_batches;

    for (const Sample& sample : manifest.samples) {
        if (sample.image_id.empty()) throw ValidationError("sample with empty image_id");
        if (!seen_ids.insert(sample.image_id).second)
            throw ValidationError("duplicate image_id '" + sample.image_id + "'");

        if (sample.rotation != 0 && sample.rotation != 90 && sample.rotation != 180 && sample.rotation != 270)
            throw ValidationError("sample '" + sample.image_id + "': field rotation must be one of 0/90/180/270, got " +
                                  std::to_string(sample.rotation));

        if (sample.label != label_of(sample))
            throw ValidationError("label/box inconsistency: sample '" + sample.image_id + "' is marked " +
                                  to_string(sample.label) + " but has " +
                                  std::to_string(sample.gt_boxes.size()) + " gt_boxes");

        for (const BBox& box : sample.gt_boxes) {
            if (!box.valid() || box.x_min < 0 || box.y_min < 0)
                throw ValidationError("sample '" + sample.image_id + "': field gt_boxes has degenerate box [" +
                                      std::to_string(box.x_min) + "," + std::to_string(box.y_min) + "," +
                                      std::to_string(box.x_max) + "," + std::to_string(box.y_max) + ")");
        }

        auto it = manifest.split_assignments.find(sample.image_id);
        if (it == manifest.split_assignments.end())
            throw ValidationError("sample '" + sample.image_id + "': field split_assignments has no entry");
        if (it->second == Split::holdout)
            holdout_batches.insert(sample.batch_id);
        else
            pool_batches.insert(sample.batch_id);
    }

    if (manifest.split_assignments.size() != manifest.samples.size())
        throw ValidationError("split_assignments do not cover exactly the listed samples (" +
                              std::to_string(manifest.split_assignments.size()) + " assignments for " +
                              std::to_string(manifest.samples.size()) + " samples)");

    for (const std::string& batch : holdout_batches) {
        if (pool_batches.count(batch))
            throw ValidationError("holdout batch overlap: batch_id '" + batch +
                                  "' appears in both holdout and train/validation");
    }
}

std::map<std::string, Split> split_ids(const std::vector<std::string>& ids,
                                       double validation_fraction, std::uint64_t seed) {
    if (ids.empty()) throw ConfigError("split: empty input");
    if (!(validation_fraction > 0.0) || !(validation_fraction < 1.0))
        throw ConfigError("split: validation_fraction must lie in (0,1), got " +
                          std::to_string(validation_fraction));

    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Rng rng = Rng::for_stream(seed, /*stream=*/0x5eedu, /*index=*/0);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = rng.next_u64() % i;
        std::swap(order[i - 1], order[j]);
    }

    const auto n_validation =
        static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(ids.size())));

    std::map<std::string, Split> assignments;
    for (std::size_t i = 0; i < order.size(); ++i) {
        assignments[ids[order[i]]] = i < n_validation ? Split::validation : Split::train;
    }
    return assignments;
}

std::map<std::string, Split> split_dataset(const std::vector<Sample>& samples,
                                           double validation_fraction, std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(samples.size());
    for (const Sample& sample : samples) ids.push_back(sample.image_id);
    return split_ids(ids, validation_fraction, seed);
}

Split split_of(const DatasetManifest& manifest, const std::string& image_id) {
    auto it = manifest.split_assignments.find(image_id);
    if (it == manifest.split_assignments.end())
        throw ValidationError("no split assignment for image_id '" + image_id + "'");
    return it->second;
}

std::vector<const Sample*> samples_in_split(const DatasetManifest& manifest, Split split) {
    std::vector<const Sample*> out;
    for (const Sample& sample : manifest.samples) {
        if (split_of(manifest, sample.image_id) == split) out.push_back(&sample);
    }
    return out;
}

std::vector<LoadedSample> load_split(const DatasetManifest& manifest,
                                     const std::filesystem::path& root, Split split) {
    std::vector<LoadedSample> out;
    for (const Sample* sample : samples_in_split(manifest, split)) {
        LoadedSample loaded;
        loaded.image_id = sample->image_id;
        loaded.image = read_pgm(root / sample->image_path);
        loaded.gt_boxes = sample->gt_boxes;
        loaded.label = label_of(*sample);
        for (const BBox& box : loaded.gt_boxes) {
            if (box.x_max > loaded.image.width || box.y_max > loaded.image.height)
                throw ValidationError("sample '" + sample->image_id + "': gt_box exceeds image bounds");
        }
        out.push_back(std::move(loaded));
    }
    return out;
}

}  // namespace inspecta
