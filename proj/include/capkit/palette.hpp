#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "capkit/color.hpp"
#include "capkit/error.hpp"
#include "capkit/image.hpp"

namespace capkit {

/// Boolean object mask; true marks foreground (object) pixels.
struct ForegroundMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> fg;

    [[nodiscard]] bool at(int x, int y) const {
        return fg[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)] != 0;
    }
    [[nodiscard]] std::size_t count() const {
        return static_cast<std::size_t>(std::count(fg.begin(), fg.end(), std::uint8_t{1}));
    }
};

/// Separates the object from a white backdrop: background is every pixel
/// reachable by 4-connected flood fill from border pixels whose channels
/// all reach white_threshold; the complement is then eroded `erosion`
/// times (4-neighborhood, out-of-image counts as background) to drop
/// anti-aliased fringe pixels. Throws EmptyForegroundError when nothing
/// survives.
inline ForegroundMask extract_foreground(const Image& img, int white_threshold = 245,
                                         int erosion = 1) {
    if (img.width < 1 || img.height < 1) throw Error("extract_foreground: empty image");
    const int w = img.width;
    const int h = img.height;
    const auto idx = [w](int x, int y) {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
               static_cast<std::size_t>(x);
    };
    const auto is_white = [&](int x, int y) {
        const RgbColor& c = img.at(x, y);
        return c.r >= white_threshold && c.g >= white_threshold && c.b >= white_threshold;
    };

    std::vector<std::uint8_t> background(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    std::vector<std::pair<int, int>> stack;
    const auto seed = [&](int x, int y) {
        if (!background[idx(x, y)] && is_white(x, y)) {
            background[idx(x, y)] = 1;
            stack.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        constexpr int dx[4] = {1, -1, 0, 0};
        constexpr int dy[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int nx = x + dx[d];
            const int ny = y + dy[d];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            if (!background[idx(nx, ny)] && is_white(nx, ny)) {
                background[idx(nx, ny)] = 1;
                stack.emplace_back(nx, ny);
            }
        }
    }

    ForegroundMask mask{w, h, {}};
    mask.fg.resize(background.size());
    for (std::size_t i = 0; i < background.size(); ++i) {
        mask.fg[i] = background[i] ? 0 : 1;
    }

    for (int pass = 0; pass < erosion; ++pass) {
        std::vector<std::uint8_t> eroded(mask.fg.size(), 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!mask.fg[idx(x, y)]) continue;
                const bool keep = x > 0 && x < w - 1 && y > 0 && y < h - 1 &&
                                  mask.fg[idx(x - 1, y)] && mask.fg[idx(x + 1, y)] &&
                                  mask.fg[idx(x, y - 1)] && mask.fg[idx(x, y + 1)];
                eroded[idx(x, y)] = keep ? 1 : 0;
            }
        }
        mask.fg = std::move(eroded);
    }

    if (mask.count() == 0) {
        throw EmptyForegroundError("extract_foreground: no object pixels found");
    }
    return mask;
}

/// Lab values of the masked object pixels, in row-major pixel order.
inline std::vector<LabColor> foreground_lab_pixels(const Image& img, const ForegroundMask& mask) {
    std::vector<LabColor> out;
    out.reserve(mask.count());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (mask.at(x, y)) out.push_back(srgb_to_lab(img.at(x, y)));
        }
    }
    return out;
}

struct Cluster {
    LabColor center;
    double weight = 0.0;  // fraction of foreground pixels, in [0,1]
};

struct PaletteResult {
    std::vector<Cluster> clusters;
    int k = 0;                              // requested cluster count
    std::size_t total_foreground_pixels = 0;
};

struct KmeansConfig {
    std::uint64_t seed = 0;
    int max_iter = 100;
    double tol = 1e-4;  // stop when max center movement falls below this
};

/// Per-iteration diagnostics; inertia is the sum of squared Lab distances
/// of points to their assigned centers, recorded after each assignment.
struct KmeansTrace {
    std::vector<double> inertia;
};

namespace detail {

inline double lab_dist2(const LabColor& p, const LabColor& q) {
    const double dl = p.L - q.L;
    const double da = p.a - q.a;
    const double db = p.b - q.b;
    return dl * dl + da * da + db * db;
}

// Implementation-defined std::uniform_* would break cross-platform
// reproducibility; map raw mt19937_64 output ourselves.
inline double unit_uniform(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline std::size_t index_uniform(std::mt19937_64& gen, std::size_t n) {
    const auto i = static_cast<std::size_t>(unit_uniform(gen) * static_cast<double>(n));
    return std::min(i, n - 1);
}

inline std::vector<LabColor> kmeanspp_init(const std::vector<LabColor>& pts, int k,
                                           std::mt19937_64& gen) {
    std::vector<LabColor> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(pts[index_uniform(gen, pts.size())]);

    std::vector<double> d2(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = lab_dist2(pts[i], centers[0]);

    while (centers.size() < static_cast<std::size_t>(k)) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total <= 0.0) {
            pick = index_uniform(gen, pts.size());
        } else {
            const double r = unit_uniform(gen) * total;
            double cum = 0.0;
            pick = pts.size() - 1;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        }
        centers.push_back(pts[pick]);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            d2[i] = std::min(d2[i], lab_dist2(pts[i], centers.back()));
        }
    }
    return centers;
}

}  // namespace detail

/// Lloyd's K-means over Lab pixels with k-means++ initialization.
/// Deterministic for a fixed (pixel order, k, seed). Empty clusters are
/// re-seeded from the point farthest from its assigned center. Returned
/// clusters are ordered by center index; weights sum to 1.
inline PaletteResult kmeans_lab(const std::vector<LabColor>& pixels, int k,
                                const KmeansConfig& cfg = {}, KmeansTrace* trace = nullptr) {
    if (pixels.empty()) throw Error("kmeans_lab: no pixels");
    if (k < 1) throw Error("kmeans_lab: k must be >= 1");

    const std::size_t n = pixels.size();
    const auto uk = static_cast<std::size_t>(k);
    std::mt19937_64 gen(cfg.seed);
    std::vector<LabColor> centers = detail::kmeanspp_init(pixels, k, gen);

    std::vector<std::size_t> assign(n, 0);
    std::vector<std::size_t> counts(uk, 0);

    const auto assign_all = [&]() {
        double inertia = 0.0;
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d2 = detail::lab_dist2(pixels[i], centers[0]);
            for (std::size_t c = 1; c < uk; ++c) {
                const double d2 = detail::lab_dist2(pixels[i], centers[c]);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            assign[i] = best;
            counts[best]++;
            inertia += best_d2;
        }
        return inertia;
    };

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const double inertia = assign_all();
        if (trace) trace->inertia.push_back(inertia);

        std::vector<double> sl(uk, 0.0), sa(uk, 0.0), sb(uk, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sl[assign[i]] += pixels[i].L;
            sa[assign[i]] += pixels[i].a;
            sb[assign[i]] += pixels[i].b;
        }
        double movement = 0.0;
        std::vector<LabColor> next = centers;
        for (std::size_t c = 0; c < uk; ++c) {
            if (counts[c] == 0) continue;  // re-seeded below
            const double m = static_cast<double>(counts[c]);
            next[c] = {sl[c] / m, sa[c] / m, sb[c] / m};
        }

        // Re-seed each empty cluster from the point currently farthest
        // from its assigned center (ties: lowest point index).
        for (std::size_t c = 0; c < uk; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far_i = 0;
            double far_d2 = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d2 = detail::lab_dist2(pixels[i], next[assign[i]]);
                if (d2 > far_d2) {
                    far_d2 = d2;
                    far_i = i;
                }
            }
            next[c] = pixels[far_i];
            counts[assign[far_i]]--;
            assign[far_i] = c;
            counts[c] = 1;
        }

        for (std::size_t c = 0; c < uk; ++c) {
            movement = std::max(movement, std::sqrt(detail::lab_dist2(centers[c], next[c])));
        }
        centers = std::move(next);
        if (movement < cfg.tol) break;
    }

    assign_all();  // final weights reflect the final centers

    PaletteResult result;
    result.k = k;
    result.total_foreground_pixels = n;
    result.clusters.reserve(uk);
    for (std::size_t c = 0; c < uk; ++c) {
        result.clusters.push_back(
            {centers[c], static_cast<double>(counts[c]) / static_cast<double>(n)});
    }
    return result;
}

/// Drops clusters holding less than min_fraction of object pixels;
/// order is preserved.
inline PaletteResult filter_clusters(PaletteResult p, double min_fraction = 0.05) {
    std::vector<Cluster> kept;
    kept.reserve(p.clusters.size());
    for (const Cluster& c : p.clusters) {
        if (c.weight >= min_fraction) kept.push_back(c);
    }
    if (kept.empty()) {
        throw Error("filter_clusters: every cluster fell below the minimum fraction");
    }
    p.clusters = std::move(kept);
    return p;
}

enum class ColorMetric { delta_e00, ab };

struct NearestCluster {
    Cluster cluster;
    int index = -1;       // index within the (filtered) palette
    double distance = 0;  // under the chosen metric
};

/// Cluster with minimum distance to the target color under the chosen
/// metric. Ties break toward larger weight, then lower index.
inline NearestCluster nearest_cluster(const PaletteResult& p, RgbColor target,
                                      ColorMetric metric) {
    if (p.clusters.empty()) throw Error("nearest_cluster: empty palette");
    const LabColor t = srgb_to_lab(target);

    NearestCluster best;
    for (std::size_t i = 0; i < p.clusters.size(); ++i) {
        const Cluster& c = p.clusters[i];
        const double d = metric == ColorMetric::delta_e00 ? ciede2000(c.center, t)
                                                          : ab_distance(c.center, t);
        const bool better =
            best.index < 0 || d < best.distance ||
            (d == best.distance && c.weight > best.cluster.weight);
        if (better) best = {c, static_cast<int>(i), d};
    }
    return best;
}

struct ColorEvalConfig {
    int white_threshold = 245;
    int erosion = 1;
    double min_fraction = 0.05;
    KmeansConfig kmeans{};
};

/// One scored color-fidelity case; selection is independent per metric.
struct ColorCaseResult {
    std::string case_id;
    RgbColor target;
    int k = 0;
    NearestCluster by_delta_e00;
    NearestCluster by_ab;
};

/// Full per-case protocol: mask the white background, K-means the object
/// pixels in Lab, drop sub-threshold clusters, pick the nearest cluster
/// per metric. Propagates EmptyForegroundError for blank images.
inline ColorCaseResult eval_color_case(const Image& img, RgbColor target, int k,
                                       const ColorEvalConfig& cfg = {}) {
    const ForegroundMask mask = extract_foreground(img, cfg.white_threshold, cfg.erosion);
    const std::vector<LabColor> pixels = foreground_lab_pixels(img, mask);
    const PaletteResult palette =
        filter_clusters(kmeans_lab(pixels, k, cfg.kmeans), cfg.min_fraction);

    ColorCaseResult result;
    result.target = target;
    result.k = k;
    result.by_delta_e00 = nearest_cluster(palette, target, ColorMetric::delta_e00);
    result.by_ab = nearest_cluster(palette, target, ColorMetric::ab);
    return result;
}

/// p-th percentile by linear interpolation between closest ranks
/// (rank 1 + p(n-1)/100 on the sorted sample).
inline double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw Error("percentile: empty sample");
    std::sort(values.begin(), values.end());
    const double rank = 1.0 + p * (static_cast<double>(values.size()) - 1.0) / 100.0;
    const auto lo = static_cast<std::size_t>(rank);  // 1-based whole part
    const double frac = rank - static_cast<double>(lo);
    if (lo >= values.size()) return values.back();
    return values[lo - 1] + frac * (values[lo] - values[lo - 1]);
}

struct StatSummary {
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
};

inline StatSummary summarize(const std::vector<double>& values) {
    if (values.empty()) throw Error("summarize: empty sample");
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    return {mean, percentile(values, 50.0), percentile(values, 90.0)};
}

struct ColorStats {
    StatSummary delta_e00;
    StatSummary ab;
};

/// Mean / median / p90 per metric over scored cases. Order-insensitive.
inline ColorStats aggregate_color(const std::vector<ColorCaseResult>& results) {
    if (results.empty()) throw Error("aggregate_color: no usable results");
    std::vector<double> de, ab;
    de.reserve(results.size());
    ab.reserve(results.size());
    for (const ColorCaseResult& r : results) {
        de.push_back(r.by_delta_e00.distance);
        ab.push_back(r.by_ab.distance);
    }
    return {summarize(de), summarize(ab)};
}

}  // namespace capkit
