#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "capkit/error.hpp"
#include "capkit/geometry.hpp"

namespace capkit {

/// One detector output. Boxes are normalized internally; pixel-space
/// inputs are converted at load time.
struct Detection {
    std::string image_id;
    std::string category;
    double score = 1.0;
    BoundingBox box;
};

/// One conditioning box treated as ground truth. area_pixels is derived
/// from the image dimensions when those are known (0 = unknown).
struct GroundTruthBox {
    std::string image_id;
    std::string category;
    BoundingBox box;
    double area_pixels = 0.0;
};

struct ImageDims {
    int width = 0;
    int height = 0;
};
using DimsMap = std::map<std::string, ImageDims>;

enum class Rarity { rare, common, frequent };
using CategoryMeta = std::map<std::string, Rarity>;

/// COCO/LVIS-style score table. Buckets without any ground truth (and
/// rarity classes without categories) stay unset.
struct ApReport {
    double ap = 0.0;    // mean over IoU 0.50:0.05:0.95
    double ap50 = 0.0;  // at IoU 0.50
    double ar = 0.0;    // max recall at 100 detections/image, mean over the IoU range
    std::optional<double> ap_small;
    std::optional<double> ap_medium;
    std::optional<double> ap_large;
    std::optional<double> ap_rare;
    std::optional<double> ap_common;
    std::optional<double> ap_frequent;
};

namespace boxdetail {

constexpr double kAreaSmallMax = 32.0 * 32.0;
constexpr double kAreaMediumMax = 96.0 * 96.0;

inline std::vector<double> iou_thresholds() {
    std::vector<double> out;
    for (int i = 0; i < 10; ++i) out.push_back(0.50 + 0.05 * i);
    return out;
}

// Deterministic, input-order-independent detection ordering: score
// descending, then content key; input index only separates exact
// duplicates (which are interchangeable anyway).
inline bool det_before(const Detection& a, std::size_t ia, const Detection& b, std::size_t ib) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    if (a.category != b.category) return a.category < b.category;
    if (a.box != b.box) return a.box < b.box;
    return ia < ib;
}

struct FlaggedDet {
    double score = 0.0;
    std::size_t rank = 0;  // position in the global canonical order
    bool matched = false;
    bool ignored = false;
};

struct CategoryOutcome {
    std::vector<FlaggedDet> dets;  // across images, unsorted
    std::size_t gt_total = 0;      // non-ignored ground truths
    std::size_t gt_matched = 0;    // matched non-ignored ground truths
};

struct Grouped {
    // (category, image) -> det indices (canonically sorted, truncated) / gt indices
    std::map<std::string, std::map<std::string, std::vector<std::size_t>>> dets;
    std::map<std::string, std::map<std::string, std::vector<std::size_t>>> gts;
    std::vector<std::size_t> det_rank;  // input index -> canonical rank
    std::set<std::string> gt_categories;
};

inline Grouped group_inputs(const std::vector<Detection>& dets,
                            const std::vector<GroundTruthBox>& gts, int max_dets) {
    Grouped g;
    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return det_before(dets[a], a, dets[b], b);
    });
    g.det_rank.resize(dets.size());
    for (std::size_t r = 0; r < order.size(); ++r) g.det_rank[order[r]] = r;

    for (const std::size_t i : order) {
        auto& bucket = g.dets[dets[i].category][dets[i].image_id];
        if (max_dets < 0 || bucket.size() < static_cast<std::size_t>(max_dets)) {
            bucket.push_back(i);
        }
    }
    for (std::size_t i = 0; i < gts.size(); ++i) {
        g.gts[gts[i].category][gts[i].image_id].push_back(i);
        g.gt_categories.insert(gts[i].category);
    }
    return g;
}

/// Greedy matching and flagging for one category at one IoU threshold,
/// optionally with a pixel-area gate (COCO ignore semantics). det_area
/// returns the detection's pixel area, or a negative value when unknown.
template <typename DetArea>
inline CategoryOutcome run_category(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruthBox>& gts, const Grouped& g,
                                    const std::string& category, double thresh,
                                    const double* area_lo, const double* area_hi,
                                    DetArea&& det_area) {
    CategoryOutcome out;
    const bool use_area = area_lo != nullptr;
    const auto gt_ignored = [&](std::size_t gi) {
        return use_area &&
               !(gts[gi].area_pixels >= *area_lo && gts[gi].area_pixels < *area_hi);
    };

    const auto git = g.gts.find(category);
    const auto dit = g.dets.find(category);

    std::set<std::string> images;
    if (git != g.gts.end()) {
        for (const auto& [img, _] : git->second) images.insert(img);
    }
    if (dit != g.dets.end()) {
        for (const auto& [img, _] : dit->second) images.insert(img);
    }

    for (const std::string& img : images) {
        static const std::vector<std::size_t> kNone;
        const auto find_in = [&](const auto& outer) -> const std::vector<std::size_t>& {
            if (outer == nullptr) return kNone;
            const auto it = outer->find(img);
            return it == outer->end() ? kNone : it->second;
        };
        const auto& img_dets = find_in(dit == g.dets.end() ? nullptr : &dit->second);
        const auto& img_gts = find_in(git == g.gts.end() ? nullptr : &git->second);

        // Non-ignored ground truths come first so greedy matching prefers them.
        std::vector<std::size_t> gt_order(img_gts.begin(), img_gts.end());
        std::stable_sort(gt_order.begin(), gt_order.end(), [&](std::size_t a, std::size_t b) {
            return !gt_ignored(a) && gt_ignored(b);
        });
        for (const std::size_t gi : img_gts) {
            if (!gt_ignored(gi)) out.gt_total++;
        }

        std::vector<bool> taken(gt_order.size(), false);
        for (const std::size_t di : img_dets) {
            int best = -1;
            double best_iou = thresh;
            for (std::size_t j = 0; j < gt_order.size(); ++j) {
                if (taken[j]) continue;
                if (best >= 0 && !gt_ignored(gt_order[static_cast<std::size_t>(best)]) &&
                    gt_ignored(gt_order[j])) {
                    break;
                }
                const double v = iou(dets[di].box, gts[gt_order[j]].box);
                if (v < best_iou) continue;
                if (v > best_iou || best < 0) {
                    best_iou = v;
                    best = static_cast<int>(j);
                }
            }
            FlaggedDet flag{dets[di].score, g.det_rank[di], false, false};
            if (best >= 0) {
                const std::size_t gi = gt_order[static_cast<std::size_t>(best)];
                taken[static_cast<std::size_t>(best)] = true;
                flag.matched = true;
                flag.ignored = gt_ignored(gi);
                if (!flag.ignored) out.gt_matched++;
            } else if (use_area) {
                const double a = det_area(di);
                flag.ignored = !(a >= *area_lo && a < *area_hi);
            }
            out.dets.push_back(flag);
        }
    }
    return out;
}

/// 101-point interpolated AP from one category's flagged detections.
inline double accumulate_ap(CategoryOutcome outcome) {
    std::sort(outcome.dets.begin(), outcome.dets.end(), [](const FlaggedDet& a, const FlaggedDet& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.rank < b.rank;
    });

    std::vector<double> recall, precision;
    std::size_t tp = 0, fp = 0;
    for (const FlaggedDet& d : outcome.dets) {
        if (d.ignored) continue;
        (d.matched ? tp : fp)++;
        recall.push_back(static_cast<double>(tp) / static_cast<double>(outcome.gt_total));
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    }
    for (std::size_t i = precision.size(); i > 1; --i) {
        precision[i - 2] = std::max(precision[i - 2], precision[i - 1]);
    }

    double total = 0.0;
    for (int r = 0; r <= 100; ++r) {
        const double want = static_cast<double>(r) / 100.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), want);
        if (it != recall.end()) {
            total += precision[static_cast<std::size_t>(it - recall.begin())];
        }
    }
    return total / 101.0;
}

}  // namespace boxdetail

/// Greedy COCO-style matching at one IoU threshold: per category per
/// image, detections in descending-score order each take the unmatched
/// same-category ground truth of highest IoU >= iou_thresh. Outputs index
/// into the input vectors. Invariant to detection input order.
struct MatchResult {
    struct Match {
        int det = -1;
        int gt = -1;
        double iou = 0.0;
    };
    std::vector<Match> matches;
    std::vector<int> unmatched_dets;  // false positives
    std::vector<int> unmatched_gts;   // false negatives
};

inline MatchResult match_detections(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruthBox>& gts,
                                    double iou_thresh) {
    const boxdetail::Grouped g = boxdetail::group_inputs(dets, gts, -1);

    MatchResult result;
    std::vector<bool> det_matched(dets.size(), false), gt_matched(gts.size(), false);
    std::set<std::string> categories;
    for (const auto& [cat, _] : g.dets) categories.insert(cat);
    for (const auto& [cat, _] : g.gts) categories.insert(cat);

    for (const std::string& cat : categories) {
        const auto dit = g.dets.find(cat);
        if (dit == g.dets.end()) continue;
        for (const auto& [img, det_indices] : dit->second) {
            const auto git = g.gts.find(cat);
            const std::vector<std::size_t>* gt_indices = nullptr;
            if (git != g.gts.end()) {
                const auto it = git->second.find(img);
                if (it != git->second.end()) gt_indices = &it->second;
            }
            for (const std::size_t di : det_indices) {
                int best = -1;
                double best_iou = iou_thresh;
                if (gt_indices) {
                    for (const std::size_t gi : *gt_indices) {
                        if (gt_matched[gi]) continue;
                        const double v = iou(dets[di].box, gts[gi].box);
                        if (v < best_iou) continue;
                        if (v > best_iou || best < 0) {
                            best_iou = v;
                            best = static_cast<int>(gi);
                        }
                    }
                }
                if (best >= 0) {
                    gt_matched[static_cast<std::size_t>(best)] = true;
                    det_matched[di] = true;
                    result.matches.push_back({static_cast<int>(di), best, best_iou});
                }
            }
        }
    }
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (!det_matched[i]) result.unmatched_dets.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < gts.size(); ++i) {
        if (!gt_matched[i]) result.unmatched_gts.push_back(static_cast<int>(i));
    }
    return result;
}

/// 101-point interpolated average precision at a fixed IoU threshold,
/// averaged over categories with at least one ground truth.
inline double average_precision(const std::vector<Detection>& dets,
                                const std::vector<GroundTruthBox>& gts, double iou_thresh) {
    const boxdetail::Grouped g = boxdetail::group_inputs(dets, gts, -1);
    const auto no_area = [](std::size_t) { return -1.0; };

    double total = 0.0;
    std::size_t scored = 0;
    for (const std::string& cat : g.gt_categories) {
        boxdetail::CategoryOutcome outcome = boxdetail::run_category(
            dets, gts, g, cat, iou_thresh, nullptr, nullptr, no_area);
        if (outcome.gt_total == 0) continue;
        total += boxdetail::accumulate_ap(std::move(outcome));
        scored++;
    }
    if (scored == 0) throw Error("average_precision: no category has ground truth");
    return total / static_cast<double>(scored);
}

struct BoxEvalOptions {
    const DimsMap* dims = nullptr;         // enables size buckets
    const CategoryMeta* rarity = nullptr;  // enables rarity buckets
    int max_dets_per_image = 100;
};

/// Full COCO-style evaluation: AP over IoU 0.50:0.05:0.95, AP50, AR@100,
/// area buckets at 32^2 / 96^2 (with dims), LVIS rarity buckets (with
/// meta). Categories without ground truth are skipped, never scored 0.
inline ApReport evaluate_boxes(const std::vector<Detection>& dets,
                               const std::vector<GroundTruthBox>& gts,
                               const BoxEvalOptions& opts = {}) {
    using namespace boxdetail;
    const Grouped g = group_inputs(dets, gts, opts.max_dets_per_image);
    const std::vector<double> thresholds = iou_thresholds();

    const auto det_area = [&](std::size_t di) -> double {
        if (!opts.dims) return -1.0;
        const auto it = opts.dims->find(dets[di].image_id);
        if (it == opts.dims->end()) {
            throw Error("evaluate_boxes: no image dimensions for \"" + dets[di].image_id + "\"");
        }
        return dets[di].box.area() * it->second.width * it->second.height;
    };

    if (opts.dims) {
        for (const GroundTruthBox& gt : gts) {
            if (gt.area_pixels <= 0.0) {
                throw Error("evaluate_boxes: ground truth for \"" + gt.image_id +
                            "\" lacks a pixel area (dimensions unknown at load?)");
            }
        }
    }
    if (opts.rarity) {
        for (const std::string& cat : g.gt_categories) {
            if (!opts.rarity->count(cat)) {
                throw Error("evaluate_boxes: no rarity metadata for category \"" + cat + "\"");
            }
        }
    }

    // category -> (mean AP over thresholds, AP at 0.50, mean recall)
    struct PerCategory {
        double ap_sum = 0.0;
        double ap50 = 0.0;
        double recall_sum = 0.0;
        bool scored = false;
    };
    std::map<std::string, PerCategory> overall;

    const auto bucket_ap = [&](const double* lo, const double* hi) -> std::optional<double> {
        double total = 0.0;
        std::size_t count = 0;
        for (const std::string& cat : g.gt_categories) {
            double cat_sum = 0.0;
            bool cat_scored = true;
            for (const double t : thresholds) {
                CategoryOutcome outcome = run_category(dets, gts, g, cat, t, lo, hi, det_area);
                if (outcome.gt_total == 0) {
                    cat_scored = false;
                    break;
                }
                cat_sum += accumulate_ap(std::move(outcome));
            }
            if (!cat_scored) continue;
            total += cat_sum / static_cast<double>(thresholds.size());
            count++;
        }
        if (count == 0) return std::nullopt;
        return total / static_cast<double>(count);
    };

    for (const std::string& cat : g.gt_categories) {
        PerCategory& pc = overall[cat];
        for (const double t : thresholds) {
            CategoryOutcome outcome =
                run_category(dets, gts, g, cat, t, nullptr, nullptr, det_area);
            if (outcome.gt_total == 0) break;
            pc.scored = true;
            pc.recall_sum +=
                static_cast<double>(outcome.gt_matched) / static_cast<double>(outcome.gt_total);
            const double ap = accumulate_ap(std::move(outcome));
            pc.ap_sum += ap;
            if (t == thresholds.front()) pc.ap50 = ap;
        }
    }

    ApReport report;
    std::size_t scored = 0;
    for (const auto& [cat, pc] : overall) {
        if (!pc.scored) continue;
        report.ap += pc.ap_sum / static_cast<double>(thresholds.size());
        report.ap50 += pc.ap50;
        report.ar += pc.recall_sum / static_cast<double>(thresholds.size());
        scored++;
    }
    if (scored == 0) throw Error("evaluate_boxes: no category has ground truth");
    report.ap /= static_cast<double>(scored);
    report.ap50 /= static_cast<double>(scored);
    report.ar /= static_cast<double>(scored);

    if (opts.dims) {
        const double zero = 0.0, huge = std::numeric_limits<double>::infinity();
        const double s_hi = kAreaSmallMax, m_hi = kAreaMediumMax;
        report.ap_small = bucket_ap(&zero, &s_hi);
        report.ap_medium = bucket_ap(&s_hi, &m_hi);
        report.ap_large = bucket_ap(&m_hi, &huge);
    }

    if (opts.rarity) {
        const auto rarity_ap = [&](Rarity r) -> std::optional<double> {
            double total = 0.0;
            std::size_t count = 0;
            for (const auto& [cat, pc] : overall) {
                if (!pc.scored || opts.rarity->at(cat) != r) continue;
                total += pc.ap_sum / static_cast<double>(thresholds.size());
                count++;
            }
            if (count == 0) return std::nullopt;
            return total / static_cast<double>(count);
        };
        report.ap_rare = rarity_ap(Rarity::rare);
        report.ap_common = rarity_ap(Rarity::common);
        report.ap_frequent = rarity_ap(Rarity::frequent);
    }

    return report;
}

}  // namespace capkit
