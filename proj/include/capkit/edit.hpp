#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capkit/caption.hpp"
#include "capkit/caption_io.hpp"
#include "capkit/error.hpp"

namespace capkit {

enum class EditKind {
    move_box,      // translate an object's box by (dx, dy)
    resize_box,    // set an object's box to an absolute new box
    swap_boxes,    // exchange the boxes of two objects
    set_color,     // replace an object's color list
    set_palette,   // replace the scene palette
    set_attribute  // set one attribute key on an object
};

/// One deterministic parametric edit. Which payload fields apply depends
/// on kind; parse_edit_script enforces presence.
struct EditOp {
    EditKind kind = EditKind::move_box;
    std::string target;                 // object id; first id for swap_boxes
    std::string target2;                // second id for swap_boxes
    std::array<double, 2> delta{0, 0};  // move_box
    std::optional<BoundingBox> box;     // resize_box
    std::vector<RgbColor> colors;       // set_color / set_palette
    std::string attr_key;               // set_attribute
    std::string attr_value;
};

inline const char* edit_kind_name(EditKind k) {
    switch (k) {
        case EditKind::move_box: return "move-box";
        case EditKind::resize_box: return "resize-box";
        case EditKind::swap_boxes: return "swap-boxes";
        case EditKind::set_color: return "set-color";
        case EditKind::set_palette: return "set-palette";
        case EditKind::set_attribute: return "set-attribute";
    }
    return "?";
}

namespace detail {

inline int require_target(const StructuredCaption& c, const std::string& id,
                          const EditOp& e) {
    const int idx = c.object_index(id);
    if (idx < 0) {
        throw Error(std::string(edit_kind_name(e.kind)) + ": unknown target id \"" + id + "\"");
    }
    return idx;
}

inline void require_valid_colors(const std::vector<RgbColor>& colors, const EditOp& e) {
    if (colors.empty()) {
        throw Error(std::string(edit_kind_name(e.kind)) + ": empty color list");
    }
    for (const RgbColor& c : colors) {
        if (!c.valid()) {
            throw Error(std::string(edit_kind_name(e.kind)) + ": channel value out of [0,255]");
        }
    }
}

}  // namespace detail

/// Applies one edit, returning a new caption in which only the fields
/// addressed by the edit differ from the input. Pure: the input caption is
/// untouched and repeated calls yield identical results.
inline StructuredCaption apply_edit(const StructuredCaption& c, const EditOp& e) {
    StructuredCaption out = c;
    switch (e.kind) {
        case EditKind::move_box: {
            ObjectSpec& obj = out.objects[static_cast<std::size_t>(
                detail::require_target(out, e.target, e))];
            if (!obj.box) {
                throw Error("move-box: object \"" + e.target + "\" has no box");
            }
            const BoundingBox moved{obj.box->x0 + e.delta[0], obj.box->y0 + e.delta[1],
                                    obj.box->x1 + e.delta[0], obj.box->y1 + e.delta[1]};
            if (!moved.valid()) {
                throw Error("move-box: resulting box leaves the unit square");
            }
            obj.box = moved;
            break;
        }
        case EditKind::resize_box: {
            ObjectSpec& obj = out.objects[static_cast<std::size_t>(
                detail::require_target(out, e.target, e))];
            if (!e.box) throw Error("resize-box: missing box payload");
            if (!e.box->valid()) throw Error("resize-box: new box is invalid");
            obj.box = e.box;
            break;
        }
        case EditKind::swap_boxes: {
            const int i = detail::require_target(out, e.target, e);
            const int j = detail::require_target(out, e.target2, e);
            if (i == j) throw Error("swap-boxes: both targets are \"" + e.target + "\"");
            std::swap(out.objects[static_cast<std::size_t>(i)].box,
                      out.objects[static_cast<std::size_t>(j)].box);
            break;
        }
        case EditKind::set_color: {
            ObjectSpec& obj = out.objects[static_cast<std::size_t>(
                detail::require_target(out, e.target, e))];
            detail::require_valid_colors(e.colors, e);
            obj.colors = e.colors;
            break;
        }
        case EditKind::set_palette: {
            detail::require_valid_colors(e.colors, e);
            if (e.colors.size() > 16) throw Error("set-palette: more than 16 colors");
            out.palette = ScenePalette{e.colors};
            break;
        }
        case EditKind::set_attribute: {
            ObjectSpec& obj = out.objects[static_cast<std::size_t>(
                detail::require_target(out, e.target, e))];
            if (e.attr_key.empty()) throw Error("set-attribute: empty attribute key");
            obj.attributes[e.attr_key] = e.attr_value;
            break;
        }
    }
    return out;
}

/// Canonical-document paths an edit is allowed to change; the edit-locality
/// property asserts the serialized diff is a subset of these.
inline std::vector<std::string> addressed_paths(const StructuredCaption& c, const EditOp& e) {
    const auto box_path = [&](const std::string& id) {
        return "objects[" + std::to_string(c.object_index(id)) + "].box";
    };
    switch (e.kind) {
        case EditKind::move_box:
        case EditKind::resize_box:
            return {box_path(e.target)};
        case EditKind::swap_boxes:
            return {box_path(e.target), box_path(e.target2)};
        case EditKind::set_color:
            return {"objects[" + std::to_string(c.object_index(e.target)) + "].colors"};
        case EditKind::set_palette:
            return {"palette"};
        case EditKind::set_attribute:
            return {"objects[" + std::to_string(c.object_index(e.target)) +
                    "].attributes." + e.attr_key};
    }
    return {};
}

/// Parses a JSON edit script: an array of op records, applied in order.
inline std::vector<EditOp> parse_edit_script(std::string_view text) {
    using detail::json;
    const json doc = detail::parse_json(text, "edit script");
    if (!doc.is_array()) throw Error("edit script: expected a JSON array");

    std::vector<EditOp> ops;
    ops.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string path = "ops[" + std::to_string(i) + "]";
        const json& node = doc[i];
        if (!node.is_object()) throw Error(path + ": expected an object");

        EditOp op;
        const std::string kind =
            detail::get_string(detail::require_key(node, "op", path), path + ".op");
        if (kind == "move-box") {
            op.kind = EditKind::move_box;
            detail::reject_unknown_keys(node, {"op", "id", "delta"}, path);
            op.target = detail::get_string(detail::require_key(node, "id", path), path + ".id");
            const json& d = detail::require_key(node, "delta", path);
            if (!d.is_array() || d.size() != 2) throw Error(path + ".delta: expected [dx, dy]");
            op.delta = {detail::get_number(d[0], path + ".delta[0]"),
                        detail::get_number(d[1], path + ".delta[1]")};
        } else if (kind == "resize-box") {
            op.kind = EditKind::resize_box;
            detail::reject_unknown_keys(node, {"op", "id", "box"}, path);
            op.target = detail::get_string(detail::require_key(node, "id", path), path + ".id");
            op.box = detail::get_box(detail::require_key(node, "box", path), path + ".box");
        } else if (kind == "swap-boxes") {
            op.kind = EditKind::swap_boxes;
            detail::reject_unknown_keys(node, {"op", "ids"}, path);
            const json& ids = detail::require_key(node, "ids", path);
            if (!ids.is_array() || ids.size() != 2) {
                throw Error(path + ".ids: expected exactly two object ids");
            }
            op.target = detail::get_string(ids[0], path + ".ids[0]");
            op.target2 = detail::get_string(ids[1], path + ".ids[1]");
        } else if (kind == "set-color") {
            op.kind = EditKind::set_color;
            detail::reject_unknown_keys(node, {"op", "id", "colors"}, path);
            op.target = detail::get_string(detail::require_key(node, "id", path), path + ".id");
            op.colors = detail::get_color_list(detail::require_key(node, "colors", path),
                                               path + ".colors");
        } else if (kind == "set-palette") {
            op.kind = EditKind::set_palette;
            detail::reject_unknown_keys(node, {"op", "colors"}, path);
            op.colors = detail::get_color_list(detail::require_key(node, "colors", path),
                                               path + ".colors");
        } else if (kind == "set-attribute") {
            op.kind = EditKind::set_attribute;
            detail::reject_unknown_keys(node, {"op", "id", "key", "value"}, path);
            op.target = detail::get_string(detail::require_key(node, "id", path), path + ".id");
            op.attr_key =
                detail::get_string(detail::require_key(node, "key", path), path + ".key");
            op.attr_value =
                detail::get_string(detail::require_key(node, "value", path), path + ".value");
        } else {
            throw Error(path + ".op: unknown edit kind \"" + kind + "\"");
        }
        ops.push_back(std::move(op));
    }
    return ops;
}

}  // namespace capkit
