#pragma once

#include <map>
#include <string>
#include <vector>

#include "inspecta/image.hpp"
#include "inspecta/manifest.hpp"

namespace inspecta {

/// Image signature for data curation: mean-pooled to 16x16, flattened and
/// scaled to unit Euclidean norm. Requires side divisible by 16.
std::vector<double> curation_features(const Image& image);

/// Identifier of the curation feature recipe, recorded in reports.
std::string curation_feature_config_hash();

struct ClusterAssignment {
    int k = 0;
    std::map<std::string, int> labels;  // image_id -> cluster index in [0,k)
    std::string feature_config_hash;
};

/// One Ward merge: cluster ids are the smallest member index, delta the
/// Ward criterion of the merge.
struct MergeStep {
    int a = 0;
    int b = 0;
    double delta = 0.0;
};

struct AgglomerateResult {
    ClusterAssignment assignment;
    std::vector<MergeStep> merge_log;
};

/// Bottom-up Ward/Euclidean agglomeration to k clusters. At each step the
/// pair minimizing |A||B|/(|A|+|B|) * ||centroid(A)-centroid(B)||^2 merges;
/// ties break on the smallest (i,j) id pair. Cluster indices are assigned
/// by ascending smallest-member order.
AgglomerateResult agglomerate(const std::vector<std::vector<double>>& features,
                              const std::vector<std::string>& ids, int k);

/// Mean silhouette with plain Euclidean distances; samples in singleton
/// clusters score 0 by convention. `labels` holds cluster indices in [0,k).
double silhouette_score(const std::vector<std::vector<double>>& features,
                        const std::vector<int>& labels, int k);

/// Per-sample silhouette values, aligned with `features`.
std::vector<double> silhouette_values(const std::vector<std::vector<double>>& features,
                                      const std::vector<int>& labels, int k);

struct SilhouetteReport {
    int k_min = 0;
    int k_max = 0;  // effective range after clipping to n - 1
    std::map<int, double> scores;
    int chosen_k = 0;
    std::vector<double> sample_values;  // for chosen_k
    ClusterAssignment chosen;
};

/// Evaluates agglomerate + silhouette for each k in [k_min, min(k_max,n-1)];
/// chosen_k maximizes the score, ties to the smaller k. A single merge run
/// provides every k (Ward partitions are nested).
SilhouetteReport select_k(const std::vector<std::vector<double>>& features,
                          const std::vector<std::string>& ids, int k_min = 3, int k_max = 25);

/// Cluster report JSON per the external interface.
std::string cluster_report_to_json(const SilhouetteReport& report);

struct AblationManifest {
    DatasetManifest manifest;
    int cluster = 0;
    int excluded_count = 0;
    double excluded_fraction = 0.0;
};

/// One manifest per cluster, with that cluster's images removed from the
/// train split (validation/holdout untouched); names suffixed "-excl-<j>".
/// The assignment must cover the manifest's train split exactly.
std::vector<AblationManifest> ablation_manifests(const DatasetManifest& manifest,
                                                 const ClusterAssignment& assignment);

}  // namespace inspecta
