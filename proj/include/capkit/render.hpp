#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "capkit/boxeval.hpp"
#include "capkit/caption.hpp"
#include "capkit/error.hpp"
#include "capkit/image.hpp"

namespace capkit {

enum class ObjectShape { rectangle, ellipse };

/// Deterministic rasterizer settings. No anti-aliasing, ever: the
/// renderer is a metrics oracle, and exact pixel coverage is the point.
struct RenderConfig {
    int width = 512;
    int height = 512;
    ObjectShape shape = ObjectShape::rectangle;
    RgbColor background{255, 255, 255};
    bool palette_background = false;  // fill with the caption's first palette color
};

/// Renders a caption as flat hard-edged shapes. Objects are drawn in
/// painter order from largest depth (farthest) to smallest, ties broken
/// by object index (later objects on top). A pixel belongs to a box iff
/// its center does: x0*W <= x+0.5 < x1*W, same for y.
inline Image rasterize(const StructuredCaption& c, const RenderConfig& cfg) {
    if (cfg.width < 1 || cfg.height < 1) throw Error("rasterize: image dimensions must be >= 1");
    for (std::size_t i = 0; i < c.objects.size(); ++i) {
        if (!c.objects[i].box) {
            throw Error("rasterize: objects[" + std::to_string(i) + "] has no box");
        }
        if (c.objects[i].colors.empty()) {
            throw Error("rasterize: objects[" + std::to_string(i) + "] has no colors");
        }
    }

    RgbColor background = cfg.background;
    if (cfg.palette_background) {
        if (!c.palette || c.palette->colors.empty()) {
            throw Error("rasterize: palette background requested but caption has no palette");
        }
        background = c.palette->colors.front();
    }
    Image img(cfg.width, cfg.height, background);

    std::vector<std::size_t> order(c.objects.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return c.objects[a].depth.value_or(0.0) > c.objects[b].depth.value_or(0.0);
    });

    for (const std::size_t oi : order) {
        const ObjectSpec& obj = c.objects[oi];
        const BoundingBox& box = *obj.box;
        const RgbColor fill = obj.colors.front();

        const double px0 = box.x0 * cfg.width;
        const double px1 = box.x1 * cfg.width;
        const double py0 = box.y0 * cfg.height;
        const double py1 = box.y1 * cfg.height;

        const int x_begin = std::max(0, static_cast<int>(std::ceil(px0 - 0.5)));
        const int x_end = std::min(cfg.width, static_cast<int>(std::ceil(px1 - 0.5)));
        const int y_begin = std::max(0, static_cast<int>(std::ceil(py0 - 0.5)));
        const int y_end = std::min(cfg.height, static_cast<int>(std::ceil(py1 - 0.5)));

        if (cfg.shape == ObjectShape::rectangle) {
            for (int y = y_begin; y < y_end; ++y) {
                for (int x = x_begin; x < x_end; ++x) {
                    img.at(x, y) = fill;
                }
            }
        } else {
            const double cx = 0.5 * (px0 + px1);
            const double cy = 0.5 * (py0 + py1);
            const double rx = 0.5 * (px1 - px0);
            const double ry = 0.5 * (py1 - py0);
            for (int y = y_begin; y < y_end; ++y) {
                for (int x = x_begin; x < x_end; ++x) {
                    const double nx = (x + 0.5 - cx) / rx;
                    const double ny = (y + 0.5 - cy) / ry;
                    if (nx * nx + ny * ny <= 1.0) img.at(x, y) = fill;
                }
            }
        }
    }
    return img;
}

/// Draws rectangle outlines of the given stroke width just inside each
/// box edge; box interiors and everything outside the boxes stay intact.
inline Image overlay_boxes(Image img, const std::vector<std::pair<BoundingBox, RgbColor>>& boxes,
                           int stroke_px = 2) {
    if (stroke_px < 1) throw Error("overlay_boxes: stroke must be >= 1");
    for (const auto& [box, color] : boxes) {
        const int x_begin = std::max(0, static_cast<int>(std::ceil(box.x0 * img.width - 0.5)));
        const int x_end =
            std::min(img.width, static_cast<int>(std::ceil(box.x1 * img.width - 0.5)));
        const int y_begin = std::max(0, static_cast<int>(std::ceil(box.y0 * img.height - 0.5)));
        const int y_end =
            std::min(img.height, static_cast<int>(std::ceil(box.y1 * img.height - 0.5)));
        for (int y = y_begin; y < y_end; ++y) {
            for (int x = x_begin; x < x_end; ++x) {
                const bool on_stroke = x < x_begin + stroke_px || x >= x_end - stroke_px ||
                                       y < y_begin + stroke_px || y >= y_end - stroke_px;
                if (on_stroke) img.at(x, y) = color;
            }
        }
    }
    return img;
}

/// Category label for scoring: the object's "category" attribute when
/// present, else the first description token that is not an article,
/// else the object id.
inline std::string object_category(const ObjectSpec& obj) {
    if (const auto it = obj.attributes.find("category"); it != obj.attributes.end()) {
        return it->second;
    }
    std::size_t pos = 0;
    while (pos < obj.description.size()) {
        const std::size_t start = obj.description.find_first_not_of(" \t\n", pos);
        if (start == std::string::npos) break;
        const std::size_t end = obj.description.find_first_of(" \t\n", start);
        std::string token = obj.description.substr(
            start, end == std::string::npos ? end : end - start);
        if (token != "a" && token != "an" && token != "the" && token != "A" && token != "An" &&
            token != "The") {
            return token;
        }
        if (end == std::string::npos) break;
        pos = end;
    }
    return obj.id;
}

/// Perfect-oracle detections for a caption: one score-1 detection per
/// object with its box copied and object_category as the label.
inline std::vector<Detection> boxes_as_detections(const StructuredCaption& c,
                                                  const std::string& image_id) {
    std::vector<Detection> out;
    out.reserve(c.objects.size());
    for (std::size_t i = 0; i < c.objects.size(); ++i) {
        const ObjectSpec& obj = c.objects[i];
        if (!obj.box) {
            throw Error("boxes_as_detections: objects[" + std::to_string(i) + "] has no box");
        }
        out.push_back({image_id, object_category(obj), 1.0, *obj.box});
    }
    return out;
}

}  // namespace capkit
