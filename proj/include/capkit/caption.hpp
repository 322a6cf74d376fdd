#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capkit/color.hpp"
#include "capkit/geometry.hpp"

namespace capkit {

/// One object of a structured caption. Parametric fields (box, colors,
/// depth) are optional until the caption has been enriched; everything
/// non-parametric lives in the open attributes map.
struct ObjectSpec {
    std::string id;           // unique within the caption
    std::string description;  // free text
    std::optional<BoundingBox> box;
    std::vector<RgbColor> colors;  // dominant first; empty = unset
    std::optional<double> depth;   // unitless, larger = farther
    std::map<std::string, std::string> attributes;

    friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

/// Global color scheme of the scene, dominant first.
struct ScenePalette {
    std::vector<RgbColor> colors;  // 1..16 entries

    friend bool operator==(const ScenePalette&, const ScenePalette&) = default;
};

/// Width:height ratio, e.g. 16:9.
struct AspectRatio {
    int w = 1;
    int h = 1;

    friend bool operator==(const AspectRatio&, const AspectRatio&) = default;
};

/// Machine-readable scene description: scene text plus per-object
/// parametric fields, and optionally a global palette and aspect ratio.
struct StructuredCaption {
    std::string scene;
    std::vector<ObjectSpec> objects;
    std::optional<ScenePalette> palette;
    std::optional<AspectRatio> aspect;

    [[nodiscard]] int object_index(std::string_view id) const {
        for (std::size_t i = 0; i < objects.size(); ++i) {
            if (objects[i].id == id) return static_cast<int>(i);
        }
        return -1;
    }

    [[nodiscard]] const ObjectSpec* find_object(std::string_view id) const {
        const int i = object_index(id);
        return i < 0 ? nullptr : &objects[static_cast<std::size_t>(i)];
    }

    friend bool operator==(const StructuredCaption&, const StructuredCaption&) = default;
};

/// A single invariant violation: document path plus message.
struct Violation {
    std::string path;
    std::string message;
};

namespace detail {

inline void check_color(const RgbColor& c, const std::string& path,
                        std::vector<Violation>& out) {
    if (c.r < 0 || c.r > 255) out.push_back({path + "[0]", "channel value out of [0,255]"});
    if (c.g < 0 || c.g > 255) out.push_back({path + "[1]", "channel value out of [0,255]"});
    if (c.b < 0 || c.b > 255) out.push_back({path + "[2]", "channel value out of [0,255]"});
}

inline void check_box(const BoundingBox& b, const std::string& path,
                      std::vector<Violation>& out) {
    if (!(b.x0 >= 0.0) || !(b.x1 <= 1.0)) out.push_back({path, "x coordinates out of [0,1]"});
    if (!(b.y0 >= 0.0) || !(b.y1 <= 1.0)) out.push_back({path, "y coordinates out of [0,1]"});
    if (!(b.x0 < b.x1)) out.push_back({path, "x1 <= x0"});
    if (!(b.y0 < b.y1)) out.push_back({path, "y1 <= y0"});
}

}  // namespace detail

/// Checks every type invariant; empty result iff the caption is valid.
/// Violations are values, not errors.
inline std::vector<Violation> validate_caption(const StructuredCaption& c) {
    std::vector<Violation> out;

    if (c.aspect && (c.aspect->w <= 0 || c.aspect->h <= 0)) {
        out.push_back({"aspect", "ratio terms must be positive"});
    }

    if (c.palette) {
        if (c.palette->colors.empty()) {
            out.push_back({"palette", "palette present but empty"});
        }
        if (c.palette->colors.size() > 16) {
            out.push_back({"palette", "palette has more than 16 colors"});
        }
        for (std::size_t i = 0; i < c.palette->colors.size(); ++i) {
            detail::check_color(c.palette->colors[i], "palette[" + std::to_string(i) + "]", out);
        }
    }

    std::map<std::string_view, int> seen;
    for (std::size_t i = 0; i < c.objects.size(); ++i) {
        const ObjectSpec& obj = c.objects[i];
        const std::string path = "objects[" + std::to_string(i) + "]";

        if (obj.id.empty()) {
            out.push_back({path + ".id", "object id is empty"});
        } else if (auto [it, inserted] = seen.emplace(obj.id, static_cast<int>(i)); !inserted) {
            out.push_back({path + ".id", "duplicate object id \"" + obj.id + "\""});
        }

        if (obj.box) detail::check_box(*obj.box, path + ".box", out);
        for (std::size_t j = 0; j < obj.colors.size(); ++j) {
            detail::check_color(obj.colors[j], path + ".colors[" + std::to_string(j) + "]", out);
        }
        if (obj.depth) {
            if (!std::isfinite(*obj.depth) || *obj.depth < 0.0) {
                out.push_back({path + ".depth", "depth must be finite and >= 0"});
            }
        }
    }

    return out;
}

}  // namespace capkit
