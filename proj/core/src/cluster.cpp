#include "inspecta/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "inspecta/error.hpp"
#include "inspecta/hash.hpp"

namespace inspecta {

namespace {

constexpr const char* kCurationLayout = "pool16x16-unitnorm";

// Shared Ward engine: merges until `k_stop` clusters remain, snapshotting
// the partition at every requested size. Pair deltas are maintained with
// the Lance-Williams update; the brute-force test oracle recomputes them
// from member lists instead.
struct WardEngine {
    explicit WardEngine(const std::vector<std::vector<double>>& features) : n(features.size()) {
        const std::size_t dim = features.empty() ? 0 : features[0].size();
        for (const auto& f : features) {
            if (f.size() != dim) throw ValidationError("agglomerate: inconsistent feature lengths");
            for (double v : f) {
                if (!std::isfinite(v)) throw ValidationError("agglomerate: non-finite feature value");
            }
        }
        centroids = features;
        counts.assign(n, 1);
        active.assign(n, true);
        min_member.resize(n);
        members.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            min_member[i] = static_cast<int>(i);
            members[i] = {static_cast<int>(i)};
        }
        delta.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                delta[i * n + j] = ward_delta(i, j);
            }
        }
    }

    double ward_delta(std::size_t i, std::size_t j) const {
        double dist2 = 0.0;
        for (std::size_t d = 0; d < centroids[i].size(); ++d) {
            const double diff = centroids[i][d] - centroids[j][d];
            dist2 += diff * diff;
        }
        const double na = static_cast<double>(counts[i]);
        const double nb = static_cast<double>(counts[j]);
        return na * nb / (na + nb) * dist2;
    }

    double& pair_delta(std::size_t i, std::size_t j) { return delta[std::min(i, j) * n + std::max(i, j)]; }

    // One merge of the best pair; returns the merge record.
    MergeStep merge_best() {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = n, best_j = n;
        // Slots are scanned ascending, so the first minimum seen is the
        // lexicographically smallest (i,j) pair among ties.
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (delta[i * n + j] < best) {
                    best = delta[i * n + j];
                    best_i = i;
                    best_j = j;
                }
            }
        }

        MergeStep step{min_member[best_i], min_member[best_j], best};

        const double ni = static_cast<double>(counts[best_i]);
        const double nj = static_cast<double>(counts[best_j]);
        for (std::size_t h = 0; h < n; ++h) {
            if (!active[h] || h == best_i || h == best_j) continue;
            const double nh = static_cast<double>(counts[h]);
            const double updated =
                ((ni + nh) * pair_delta(h, best_i) + (nj + nh) * pair_delta(h, best_j) -
                 nh * best) /
                (ni + nj + nh);
            pair_delta(h, best_i) = updated;
        }
        for (std::size_t d = 0; d < centroids[best_i].size(); ++d) {
            centroids[best_i][d] =
                (ni * centroids[best_i][d] + nj * centroids[best_j][d]) / (ni + nj);
        }
        counts[best_i] += counts[best_j];
        members[best_i].insert(members[best_i].end(), members[best_j].begin(), members[best_j].end());
        min_member[best_i] = std::min(min_member[best_i], min_member[best_j]);
        active[best_j] = false;
        return step;
    }

    // Cluster labels for the current partition: clusters ordered by their
    // smallest member index.
    std::vector<int> snapshot_labels() const {
        std::vector<std::pair<int, std::size_t>> order;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i]) order.emplace_back(min_member[i], i);
        }
        std::sort(order.begin(), order.end());
        std::vector<int> labels(n, -1);
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            for (int sample : members[order[rank].second]) labels[static_cast<std::size_t>(sample)] = static_cast<int>(rank);
        }
        return labels;
    }

    std::size_t n;
    std::vector<std::vector<double>> centroids;
    std::vector<long long> counts;
    std::vector<bool> active;
    std::vector<int> min_member;
    std::vector<std::vector<int>> members;
    std::vector<double> delta;
};

ClusterAssignment assignment_from_labels(const std::vector<int>& labels,
                                         const std::vector<std::string>& ids, int k) {
    ClusterAssignment assignment;
    assignment.k = k;
    assignment.feature_config_hash = curation_feature_config_hash();
    for (std::size_t i = 0; i < ids.size(); ++i) assignment.labels[ids[i]] = labels[i];
    return assignment;
}

std::vector<std::vector<double>> pairwise_distances(const std::vector<std::vector<double>>& features) {
    const std::size_t n = features.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < features[i].size(); ++d) {
                const double diff = features[i][d] - features[j][d];
                d2 += diff * diff;
            }
            dist[i][j] = dist[j][i] = std::sqrt(d2);
        }
    }
    return dist;
}

std::vector<double> silhouette_from_distances(const std::vector<std::vector<double>>& dist,
                                              const std::vector<int>& labels, int k) {
    const std::size_t n = labels.size();
    std::vector<long long> cluster_size(static_cast<std::size_t>(k), 0);
    for (int label : labels) {
        if (label < 0 || label >= k) throw ValidationError("silhouette: label out of range");
        ++cluster_size[static_cast<std::size_t>(label)];
    }
    for (long long size : cluster_size) {
        if (size == 0) throw ValidationError("silhouette: empty cluster");
    }

    std::vector<double> values(n, 0.0);
    std::vector<double> mean_to_cluster(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        const int own = labels[i];
        if (cluster_size[static_cast<std::size_t>(own)] == 1) {
            values[i] = 0.0;  // singleton convention
            continue;
        }
        std::fill(mean_to_cluster.begin(), mean_to_cluster.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_to_cluster[static_cast<std::size_t>(labels[j])] += dist[i][j];
        }
        double a = 0.0;
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const long long size = cluster_size[static_cast<std::size_t>(c)];
            if (c == own) {
                a = mean_to_cluster[static_cast<std::size_t>(c)] / static_cast<double>(size - 1);
            } else {
                b = std::min(b, mean_to_cluster[static_cast<std::size_t>(c)] / static_cast<double>(size));
            }
        }
        const double denom = std::max(a, b);
        values[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return values;
}

}  // namespace

std::vector<double> curation_features(const Image& image) {
    constexpr int kGrid = 16;
    if (image.width != image.height || image.width % kGrid != 0 || image.width == 0)
        throw ValidationError("curation_features: image side must be a positive multiple of 16");
    const int cell = image.width / kGrid;
    const double cell_px = static_cast<double>(cell) * static_cast<double>(cell);

    std::vector<double> pooled(kGrid * kGrid, 0.0);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            pooled[static_cast<std::size_t>((y / cell) * kGrid + x / cell)] += image.at(x, y);
        }
    }
    double norm2 = 0.0;
    for (double& v : pooled) {
        v /= cell_px;
        norm2 += v * v;
    }
    // An all-black image has no direction; it stays at the origin, which
    // keeps it maximally far from every unit-norm signature.
    if (norm2 == 0.0) return pooled;
    const double norm = std::sqrt(norm2);
    for (double& v : pooled) v /= norm;
    return pooled;
}

std::string curation_feature_config_hash() {
    return hash_hex(kCurationLayout);
}

AgglomerateResult agglomerate(const std::vector<std::vector<double>>& features,
                              const std::vector<std::string>& ids, int k) {
    if (features.size() != ids.size())
        throw ValidationError("agglomerate: features/ids length mismatch");
    if (k < 2) throw ValidationError("agglomerate: k must be >= 2");
    if (features.size() < static_cast<std::size_t>(k))
        throw ValidationError("agglomerate: need n >= k (" + std::to_string(features.size()) +
                              " < " + std::to_string(k) + ")");

    WardEngine engine(features);
    AgglomerateResult result;
    for (std::size_t remaining = features.size(); remaining > static_cast<std::size_t>(k); --remaining) {
        result.merge_log.push_back(engine.merge_best());
    }
    result.assignment = assignment_from_labels(engine.snapshot_labels(), ids, k);
    return result;
}

std::vector<double> silhouette_values(const std::vector<std::vector<double>>& features,
                                      const std::vector<int>& labels, int k) {
    if (k < 2) throw ValidationError("silhouette: k must be >= 2");
    if (features.size() != labels.size())
        throw ValidationError("silhouette: features/labels length mismatch");
    if (features.size() < static_cast<std::size_t>(k))
        throw ValidationError("silhouette: need n >= k");
    return silhouette_from_distances(pairwise_distances(features), labels, k);
}

double silhouette_score(const std::vector<std::vector<double>>& features,
                        const std::vector<int>& labels, int k) {
    const std::vector<double> values = silhouette_values(features, labels, k);
    double sum = 0.0;
    for (double v : values) sum += v;
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

SilhouetteReport select_k(const std::vector<std::vector<double>>& features,
                          const std::vector<std::string>& ids, int k_min, int k_max) {
    if (k_min < 2) throw ValidationError("select_k: k_min must be >= 2");
    const int n = static_cast<int>(features.size());
    if (n <= k_min)
        throw ValidationError("select_k: need n > k_min (" + std::to_string(n) +
                              " <= " + std::to_string(k_min) + ")");
    if (features.size() != ids.size())
        throw ValidationError("select_k: features/ids length mismatch");

    SilhouetteReport report;
    report.k_min = k_min;
    report.k_max = std::min(k_max, n - 1);

    const auto distances = pairwise_distances(features);

    // Ward partitions are nested, so one merge run yields every k.
    WardEngine engine(features);
    std::map<int, std::vector<int>> partitions;
    for (int remaining = n; remaining > k_min; --remaining) {
        if (remaining <= report.k_max) partitions[remaining] = engine.snapshot_labels();
        engine.merge_best();
    }
    partitions[k_min] = engine.snapshot_labels();

    report.chosen_k = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = report.k_min; k <= report.k_max; ++k) {
        const std::vector<double> values = silhouette_from_distances(distances, partitions[k], k);
        double sum = 0.0;
        for (double v : values) sum += v;
        const double score = sum / static_cast<double>(values.size());
        report.scores[k] = score;
        if (score > best_score) {  // strict: ties keep the smaller k
            best_score = score;
            report.chosen_k = k;
        }
    }

    report.sample_values = silhouette_from_distances(distances, partitions[report.chosen_k], report.chosen_k);
    report.chosen = assignment_from_labels(partitions[report.chosen_k], ids, report.chosen_k);
    return report;
}

std::string cluster_report_to_json(const SilhouetteReport& report) {
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [k, score] : report.scores) scores[std::to_string(k)] = score;
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [id, cluster] : report.chosen.labels) labels[id] = cluster;
    const nlohmann::json root{{"feature_config_hash", report.chosen.feature_config_hash},
                              {"k_min", report.k_min},
                              {"k_max", report.k_max},
                              {"scores", std::move(scores)},
                              {"chosen_k", report.chosen_k},
                              {"labels", std::move(labels)}};
    return root.dump(2) + "\n";
}

std::vector<AblationManifest> ablation_manifests(const DatasetManifest& manifest,
                                                 const ClusterAssignment& assignment) {
    if (assignment.k < 2) throw ValidationError("ablation_manifests: assignment must have k >= 2");

    std::set<std::string> train_ids;
    for (const Sample& sample : manifest.samples) {
        if (split_of(manifest, sample.image_id) == Split::train) train_ids.insert(sample.image_id);
    }
    // Exact cover: the assignment was computed on this train split.
    if (train_ids.size() != assignment.labels.size())
        throw ValidationError("ablation_manifests: assignment/manifest mismatch (assignment covers " +
                              std::to_string(assignment.labels.size()) + " ids, train split has " +
                              std::to_string(train_ids.size()) + ")");
    for (const auto& [id, cluster] : assignment.labels) {
        if (!train_ids.count(id))
            throw ValidationError("ablation_manifests: assignment/manifest mismatch (id '" + id +
                                  "' is not in the train split)");
        if (cluster < 0 || cluster >= assignment.k)
            throw ValidationError("ablation_manifests: cluster index out of range for id '" + id + "'");
    }

    std::vector<AblationManifest> out;
    const double train_count = static_cast<double>(train_ids.size());
    for (int cluster = 0; cluster < assignment.k; ++cluster) {
        AblationManifest ablation;
        ablation.cluster = cluster;
        ablation.manifest.name = manifest.name + "-excl-" + std::to_string(cluster);
        ablation.manifest.seed = manifest.seed;
        ablation.manifest.generator_config_hash = manifest.generator_config_hash;
        for (const Sample& sample : manifest.samples) {
            const Split split = split_of(manifest, sample.image_id);
            if (split == Split::train) {
                auto it = assignment.labels.find(sample.image_id);
                if (it->second == cluster) {
                    ++ablation.excluded_count;
                    continue;
                }
            }
            ablation.manifest.samples.push_back(sample);
            ablation.manifest.split_assignments[sample.image_id] = split;
        }
        if (ablation.excluded_count == 0)
            throw ValidationError("ablation_manifests: assignment/manifest mismatch (cluster " +
                                  std::to_string(cluster) + " excludes no train image)");
        ablation.excluded_fraction = static_cast<double>(ablation.excluded_count) / train_count;
        out.push_back(std::move(ablation));
    }
    return out;
}

}  // namespace inspecta
