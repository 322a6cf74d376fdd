#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capkit/caption.hpp"
#include "capkit/caption_io.hpp"
#include "capkit/error.hpp"

namespace capkit {

/// Perception output for one object: the numeric fields that replace its
/// semantic location/color wording.
struct ObjectAnnotation {
    BoundingBox box;
    std::vector<RgbColor> colors;  // dominant first
    std::optional<double> depth;
};

/// File-borne perception outputs for a whole caption.
struct AnnotationBundle {
    std::map<std::string, ObjectAnnotation> objects;  // keyed by object id
    std::optional<ScenePalette> palette;
};

struct EnrichOptions {
    // Attribute keys whose wording the numeric fields replace.
    std::vector<std::string> semantic_keys{"location", "position", "color"};
};

struct EnrichResult {
    StructuredCaption caption;
    std::vector<std::string> unannotated;  // object ids the bundle did not cover
};

/// Parses the annotation bundle format:
/// {"objects": {id: {"box", "colors", "depth"?}}, "palette"?: [[r,g,b],...]}.
inline AnnotationBundle parse_annotation_bundle(std::string_view text) {
    using detail::json;
    const json doc = detail::parse_json(text, "annotation bundle");
    if (!doc.is_object()) throw Error("annotation bundle: expected a JSON object");
    detail::reject_unknown_keys(doc, {"objects", "palette"}, "bundle");

    AnnotationBundle bundle;
    const json& objects = detail::require_key(doc, "objects", "bundle");
    if (!objects.is_object()) throw Error("bundle.objects: expected an object keyed by id");
    for (const auto& [id, node] : objects.items()) {
        const std::string path = "bundle.objects." + id;
        if (!node.is_object()) throw Error(path + ": expected an object");
        detail::reject_unknown_keys(node, {"box", "colors", "depth"}, path);
        ObjectAnnotation ann;
        ann.box = detail::get_box(detail::require_key(node, "box", path), path + ".box");
        ann.colors = detail::get_color_list(detail::require_key(node, "colors", path),
                                            path + ".colors");
        if (const auto dit = node.find("depth"); dit != node.end()) {
            ann.depth = detail::get_number(*dit, path + ".depth");
        }
        bundle.objects.emplace(id, std::move(ann));
    }
    if (const auto pit = doc.find("palette"); pit != doc.end()) {
        bundle.palette = ScenePalette{detail::get_color_list(*pit, "bundle.palette")};
    }
    return bundle;
}

/// Replaces semantic location/color wording with the bundle's numeric
/// fields: sets box, colors, and depth per annotated object, strips the
/// configured semantic attribute keys there, and attaches the scene
/// palette. Unannotated objects are left untouched and reported.
inline EnrichResult enrich_caption(const StructuredCaption& base, const AnnotationBundle& ann,
                                   const EnrichOptions& opts = {}) {
    for (const auto& [id, entry] : ann.objects) {
        if (base.object_index(id) < 0) {
            throw Error("enrich: annotation references unknown object id \"" + id + "\"");
        }
        if (!entry.box.valid()) {
            throw Error("enrich: annotation box for \"" + id + "\" is invalid");
        }
        for (const RgbColor& c : entry.colors) {
            if (!c.valid()) {
                throw Error("enrich: annotation color for \"" + id + "\" is out of range");
            }
        }
        if (entry.depth && !(*entry.depth >= 0.0)) {
            throw Error("enrich: annotation depth for \"" + id + "\" must be >= 0");
        }
    }

    EnrichResult result{base, {}};
    for (ObjectSpec& obj : result.caption.objects) {
        const auto it = ann.objects.find(obj.id);
        if (it == ann.objects.end()) {
            result.unannotated.push_back(obj.id);
            continue;
        }
        obj.box = it->second.box;
        obj.colors = it->second.colors;
        if (it->second.depth) obj.depth = it->second.depth;
        for (const std::string& key : opts.semantic_keys) {
            obj.attributes.erase(key);
        }
    }
    if (ann.palette) {
        result.caption.palette = ann.palette;
    }
    return result;
}

}  // namespace capkit
