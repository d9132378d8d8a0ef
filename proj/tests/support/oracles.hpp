// Independent reference implementations used to freeze expected values.
// These deliberately take different routes than the library code: pairwise
// counting instead of trapezoids, threshold-set enumeration instead of rank
// prefixes, recomputed-from-members Ward deltas instead of Lance-Williams
// updates.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "inspecta/image.hpp"
#include "inspecta/metrics.hpp"
#include "inspecta/types.hpp"

namespace oracle {

/// Mann-Whitney statistic: fraction of (positive, negative) pairs ordered
/// correctly, ties credited one half.
inline double pairwise_auc(const std::vector<inspecta::ScoredLabel>& scored) {
    double wins = 0.0;
    long long pairs = 0;
    for (const auto& pos : scored) {
        if (pos.truth != inspecta::Label::ng) continue;
        for (const auto& neg : scored) {
            if (neg.truth != inspecta::Label::ok) continue;
            ++pairs;
            if (pos.score > neg.score)
                wins += 1.0;
            else if (pos.score == neg.score)
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// Interpolated AP by enumerating the precision-recall staircase over
/// threshold sets (one PR point per distinct score). Assumes detection
/// scores are pairwise distinct, where this construction provably agrees
/// with rank-by-rank accumulation.
inline double staircase_ap(const std::vector<std::vector<inspecta::Detection>>& detections,
                           const std::vector<std::vector<inspecta::BBox>>& gts,
                           double iou_threshold) {
    long long n_gt = 0;
    for (const auto& g : gts) n_gt += static_cast<long long>(g.size());

    std::set<double, std::greater<double>> thresholds;
    for (const auto& per_image : detections) {
        for (const auto& d : per_image) thresholds.insert(d.score);
    }
    if (thresholds.empty()) return 0.0;

    struct PrPoint {
        double recall;
        double precision;
    };
    std::vector<PrPoint> points;
    for (double t : thresholds) {
        long long tp = 0, n_det = 0;
        for (std::size_t img = 0; img < detections.size(); ++img) {
            std::vector<inspecta::Detection> kept;
            for (const auto& d : detections[img]) {
                if (d.score >= t) kept.push_back(d);
            }
            std::sort(kept.begin(), kept.end(),
                      [](const inspecta::Detection& a, const inspecta::Detection& b) {
                          return a.score > b.score;
                      });
            std::vector<bool> matched(gts[img].size(), false);
            for (const auto& d : kept) {
                ++n_det;
                double best = 0.0;
                std::size_t best_g = gts[img].size();
                for (std::size_t g = 0; g < gts[img].size(); ++g) {
                    if (matched[g]) continue;
                    const double overlap = inspecta::iou(d.box, gts[img][g]);
                    if (overlap > best) {
                        best = overlap;
                        best_g = g;
                    }
                }
                if (best_g < gts[img].size() && best >= iou_threshold) {
                    matched[best_g] = true;
                    ++tp;
                }
            }
        }
        points.push_back({static_cast<double>(tp) / static_cast<double>(n_gt),
                          n_det == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_det)});
    }

    std::sort(points.begin(), points.end(),
              [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
    double area = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double interp = 0.0;
        for (std::size_t j = i; j < points.size(); ++j) interp = std::max(interp, points[j].precision);
        area += (points[i].recall - prev_recall) * interp;
        prev_recall = points[i].recall;
    }
    return area;
}

/// Naive Ward agglomeration: every step recomputes all pair deltas from the
/// member lists. Returns labels by ascending smallest-member order, plus the
/// merge deltas.
struct WardOracleResult {
    std::vector<int> labels;
    std::vector<double> merge_deltas;
};

inline WardOracleResult ward_bruteforce(const std::vector<std::vector<double>>& features, int k) {
    struct Cluster {
        std::vector<int> members;
        int min_member;
    };
    std::vector<Cluster> clusters;
    for (int i = 0; i < static_cast<int>(features.size()); ++i) clusters.push_back({{i}, i});

    auto centroid = [&](const Cluster& c) {
        std::vector<double> mean(features[0].size(), 0.0);
        for (int m : c.members) {
            for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += features[static_cast<std::size_t>(m)][d];
        }
        for (double& v : mean) v /= static_cast<double>(c.members.size());
        return mean;
    };

    WardOracleResult result;
    while (static_cast<int>(clusters.size()) > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0, best_j = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const auto ci = centroid(clusters[i]);
                const auto cj = centroid(clusters[j]);
                double dist2 = 0.0;
                for (std::size_t d = 0; d < ci.size(); ++d) {
                    const double diff = ci[d] - cj[d];
                    dist2 += diff * diff;
                }
                const double na = static_cast<double>(clusters[i].members.size());
                const double nb = static_cast<double>(clusters[j].members.size());
                const double delta = na * nb / (na + nb) * dist2;
                const auto key = std::minmax(clusters[i].min_member, clusters[j].min_member);
                const auto best_key = std::minmax(clusters[best_i].min_member, clusters[best_j].min_member);
                if (delta < best || (delta == best && key < best_key)) {
                    best = delta;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        result.merge_deltas.push_back(best);
        Cluster merged;
        merged.members = clusters[best_i].members;
        merged.members.insert(merged.members.end(), clusters[best_j].members.begin(),
                              clusters[best_j].members.end());
        merged.min_member = std::min(clusters[best_i].min_member, clusters[best_j].min_member);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_j));
        clusters[best_i > best_j ? best_i - 1 : best_i] = std::move(merged);
    }

    std::sort(clusters.begin(), clusters.end(),
              [](const Cluster& a, const Cluster& b) { return a.min_member < b.min_member; });
    result.labels.assign(features.size(), -1);
    for (std::size_t rank = 0; rank < clusters.size(); ++rank) {
        for (int m : clusters[rank].members) result.labels[static_cast<std::size_t>(m)] = static_cast<int>(rank);
    }
    return result;
}

/// Direct window enumeration: positions and coverage-based labels.
struct WindowCounts {
    long long positives = 0;
    long long negatives = 0;
    long long discarded = 0;
};

inline WindowCounts enumerate_windows(int image_size, const std::vector<inspecta::BBox>& gts,
                                      int window, int stride, double tau_pos, double tau_neg,
                                      int origin_x = 0, int origin_y = 0) {
    WindowCounts counts;
    for (int y0 = origin_y; y0 + window <= image_size; y0 += stride) {
        for (int x0 = origin_x; x0 + window <= image_size; x0 += stride) {
            double coverage = 0.0;
            for (const inspecta::BBox& gt : gts) {
                const long long ix =
                    std::max(0, std::min(x0 + window, gt.x_max) - std::max(x0, gt.x_min));
                const long long iy =
                    std::max(0, std::min(y0 + window, gt.y_max) - std::max(y0, gt.y_min));
                coverage = std::max(coverage, static_cast<double>(ix * iy) /
                                                  static_cast<double>(gt.area()));
            }
            if (coverage >= tau_pos)
                ++counts.positives;
            else if (coverage <= tau_neg)
                ++counts.negatives;
            else
                ++counts.discarded;
        }
    }
    return counts;
}

/// Coordinates at which two equal-sized images differ.
inline std::vector<std::pair<int, int>> diff_pixels(const inspecta::Image& a, const inspecta::Image& b) {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (a.at(x, y) != b.at(x, y)) out.emplace_back(x, y);
        }
    }
    return out;
}

inline inspecta::BBox tight_bounds(const std::vector<std::pair<int, int>>& pixels) {
    inspecta::BBox box{1 << 20, 1 << 20, -(1 << 20), -(1 << 20)};
    for (const auto& [x, y] : pixels) {
        box.x_min = std::min(box.x_min, x);
        box.y_min = std::min(box.y_min, y);
        box.x_max = std::max(box.x_max, x + 1);
        box.y_max = std::max(box.y_max, y + 1);
    }
    return box;
}

/// 8-connected component count of a pixel set.
inline int connected_components(const std::vector<std::pair<int, int>>& pixels) {
    std::set<std::pair<int, int>> remaining(pixels.begin(), pixels.end());
    int components = 0;
    while (!remaining.empty()) {
        ++components;
        std::vector<std::pair<int, int>> stack{*remaining.begin()};
        remaining.erase(remaining.begin());
        while (!stack.empty()) {
            const auto [x, y] = stack.back();
            stack.pop_back();
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto it = remaining.find({x + dx, y + dy});
                    if (it != remaining.end()) {
                        stack.push_back(*it);
                        remaining.erase(it);
                    }
                }
            }
        }
    }
    return components;
}

/// Rasterize a box, transform the raster per-pixel, and report the tight
/// bounds: the geometric-oracle route for box transforms.
template <typename PixelMap>
inline inspecta::BBox map_box_by_pixels(const inspecta::BBox& box, PixelMap&& map) {
    std::vector<std::pair<int, int>> pixels;
    for (int y = box.y_min; y < box.y_max; ++y) {
        for (int x = box.x_min; x < box.x_max; ++x) {
            pixels.push_back(map(x, y));
        }
    }
    return tight_bounds(pixels);
}

/// Central finite difference d/dz f(z).
template <typename F>
inline double central_difference(F&& f, double z, double h = 1e-6) {
    return (f(z + h) - f(z - h)) / (2.0 * h);
}

}  // namespace oracle
