#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capkit/caption.hpp"
#include "capkit/error.hpp"

namespace capkit {

/// Coordinate form at the serialization boundary. Storage is always
/// normalized [0,1]; percent exists only in documents.
enum class CoordForm { unit, percent };

/// Parse-side form selection. auto_detect treats the document as percent
/// when it carries "coords": "percent" or any box coordinate exceeds 1.
enum class CoordDetect { auto_detect, unit, percent };

namespace detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error("malformed " + what + ": " + e.what());
    }
}

inline const json& require_key(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw Error(path + ": missing required field \"" + key + "\"");
    }
    return *it;
}

inline std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw Error(path + ": expected a string");
    return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw Error(path + ": expected a number");
    return v.get<double>();
}

inline int get_channel(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw Error(path + ": expected an integer channel value");
    return v.get<int>();
}

inline RgbColor get_color(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) {
        throw Error(path + ": expected an [r,g,b] triple");
    }
    return {get_channel(v[0], path + "[0]"),
            get_channel(v[1], path + "[1]"),
            get_channel(v[2], path + "[2]")};
}

inline std::vector<RgbColor> get_color_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw Error(path + ": expected an array of color triples");
    std::vector<RgbColor> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(get_color(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline BoundingBox get_box(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 4) {
        throw Error(path + ": expected an [x0,y0,x1,y1] array");
    }
    return {get_number(v[0], path + "[0]"), get_number(v[1], path + "[1]"),
            get_number(v[2], path + "[2]"), get_number(v[3], path + "[3]")};
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) { ok = true; break; }
        }
        if (!ok) throw Error(path + ": unknown field \"" + key + "\"");
    }
}

/// Fixed-decimal formatting; canonical documents never print "-0.0000".
inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') {
        s.erase(0, 1);
    }
    return s;
}

inline void append_json_string(std::string& out, std::string_view s) {
    out += '"';
    for (const char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

inline void append_color(std::string& out, const RgbColor& c) {
    out += '[';
    out += std::to_string(c.r);
    out += ", ";
    out += std::to_string(c.g);
    out += ", ";
    out += std::to_string(c.b);
    out += ']';
}

inline void append_box(std::string& out, const BoundingBox& b, CoordForm form) {
    const double scale = form == CoordForm::percent ? 100.0 : 1.0;
    const int decimals = form == CoordForm::percent ? 1 : 4;
    out += '[';
    out += format_fixed(b.x0 * scale, decimals);
    out += ", ";
    out += format_fixed(b.y0 * scale, decimals);
    out += ", ";
    out += format_fixed(b.x1 * scale, decimals);
    out += ", ";
    out += format_fixed(b.y1 * scale, decimals);
    out += ']';
}

}  // namespace detail

struct ParsedCaption {
    StructuredCaption caption;
    std::vector<Violation> violations;
};

/// Structural parse: throws on malformed JSON or schema-shape errors, but
/// returns invariant violations as values so callers can list all of them.
inline ParsedCaption parse_caption_lenient(std::string_view text,
                                           CoordDetect form = CoordDetect::auto_detect) {
    using detail::json;
    const json doc = detail::parse_json(text, "caption document");
    if (!doc.is_object()) throw Error("caption document: expected a JSON object");
    detail::reject_unknown_keys(doc, {"scene", "aspect", "coords", "palette", "objects"}, "document");

    StructuredCaption c;
    c.scene = detail::get_string(detail::require_key(doc, "scene", "document"), "scene");

    if (const auto it = doc.find("aspect"); it != doc.end()) {
        const std::string s = detail::get_string(*it, "aspect");
        int w = 0, h = 0;
        char tail = 0;
        if (std::sscanf(s.c_str(), "%d:%d%c", &w, &h, &tail) != 2 || w <= 0 || h <= 0) {
            throw Error("aspect: expected \"W:H\" with positive integers, got \"" + s + "\"");
        }
        c.aspect = AspectRatio{w, h};
    }

    bool percent = false;
    bool form_explicit = form != CoordDetect::auto_detect;
    if (form_explicit) {
        percent = form == CoordDetect::percent;
    }
    if (const auto it = doc.find("coords"); it != doc.end()) {
        const std::string s = detail::get_string(*it, "coords");
        if (s != "unit" && s != "percent") {
            throw Error("coords: expected \"unit\" or \"percent\", got \"" + s + "\"");
        }
        if (!form_explicit) {
            percent = s == "percent";
            form_explicit = true;
        }
    }

    if (const auto it = doc.find("palette"); it != doc.end()) {
        c.palette = ScenePalette{detail::get_color_list(*it, "palette")};
    }

    const json& objects = detail::require_key(doc, "objects", "document");
    if (!objects.is_array()) throw Error("objects: expected an array");

    bool any_coord_above_one = false;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const std::string path = "objects[" + std::to_string(i) + "]";
        const json& node = objects[i];
        if (!node.is_object()) throw Error(path + ": expected an object");
        detail::reject_unknown_keys(
            node, {"id", "description", "box", "colors", "depth", "attributes"}, path);

        ObjectSpec obj;
        obj.id = detail::get_string(detail::require_key(node, "id", path), path + ".id");
        obj.description = detail::get_string(detail::require_key(node, "description", path),
                                             path + ".description");
        if (const auto bit = node.find("box"); bit != node.end()) {
            obj.box = detail::get_box(*bit, path + ".box");
            if (obj.box->x0 > 1.0 || obj.box->y0 > 1.0 || obj.box->x1 > 1.0 || obj.box->y1 > 1.0) {
                any_coord_above_one = true;
            }
        }
        if (const auto cit = node.find("colors"); cit != node.end()) {
            obj.colors = detail::get_color_list(*cit, path + ".colors");
        }
        if (const auto dit = node.find("depth"); dit != node.end()) {
            obj.depth = detail::get_number(*dit, path + ".depth");
        }
        if (const auto ait = node.find("attributes"); ait != node.end()) {
            if (!ait->is_object()) throw Error(path + ".attributes: expected an object");
            for (const auto& [key, value] : ait->items()) {
                obj.attributes[key] =
                    detail::get_string(value, path + ".attributes." + key);
            }
        }
        c.objects.push_back(std::move(obj));
    }

    if (!form_explicit && any_coord_above_one) {
        percent = true;
    }
    if (percent) {
        for (ObjectSpec& obj : c.objects) {
            if (obj.box) {
                obj.box = BoundingBox{obj.box->x0 / 100.0, obj.box->y0 / 100.0,
                                      obj.box->x1 / 100.0, obj.box->y1 / 100.0};
            }
        }
    }

    std::vector<Violation> violations = validate_caption(c);
    return {std::move(c), std::move(violations)};
}

/// Parse and fully validate; throws an Error naming the offending path on
/// the first invariant violation.
inline StructuredCaption parse_caption(std::string_view text,
                                       CoordDetect form = CoordDetect::auto_detect) {
    ParsedCaption parsed = parse_caption_lenient(text, form);
    if (!parsed.violations.empty()) {
        const Violation& v = parsed.violations.front();
        std::string msg = v.path + ": " + v.message;
        if (parsed.violations.size() > 1) {
            msg += " (and " + std::to_string(parsed.violations.size() - 1) + " more)";
        }
        throw Error(msg);
    }
    return std::move(parsed.caption);
}

/// Canonical serialization: fixed field order, sorted attribute keys,
/// coordinates at 4 decimal places (unit form) or 1 (percent form).
/// Byte-stable: serialize(parse(s)) is a fixed point.
inline std::string serialize_caption(const StructuredCaption& c,
                                     CoordForm form = CoordForm::unit) {
    using detail::append_box;
    using detail::append_color;
    using detail::append_json_string;
    using detail::format_fixed;

    std::string out;
    out += "{\n";
    out += "  \"scene\": ";
    append_json_string(out, c.scene);

    if (c.aspect) {
        out += ",\n  \"aspect\": \"";
        out += std::to_string(c.aspect->w) + ":" + std::to_string(c.aspect->h);
        out += '"';
    }
    if (form == CoordForm::percent) {
        out += ",\n  \"coords\": \"percent\"";
    }
    if (c.palette) {
        out += ",\n  \"palette\": [";
        for (std::size_t i = 0; i < c.palette->colors.size(); ++i) {
            out += i == 0 ? "\n    " : ",\n    ";
            append_color(out, c.palette->colors[i]);
        }
        out += "\n  ]";
    }

    out += ",\n  \"objects\": [";
    for (std::size_t i = 0; i < c.objects.size(); ++i) {
        const ObjectSpec& obj = c.objects[i];
        out += i == 0 ? "\n" : ",\n";
        out += "    {\n      \"id\": ";
        append_json_string(out, obj.id);
        out += ",\n      \"description\": ";
        append_json_string(out, obj.description);
        if (obj.box) {
            out += ",\n      \"box\": ";
            append_box(out, *obj.box, form);
        }
        if (!obj.colors.empty()) {
            out += ",\n      \"colors\": [";
            for (std::size_t j = 0; j < obj.colors.size(); ++j) {
                out += j == 0 ? "\n        " : ",\n        ";
                append_color(out, obj.colors[j]);
            }
            out += "\n      ]";
        }
        if (obj.depth) {
            out += ",\n      \"depth\": ";
            out += format_fixed(*obj.depth, 4);
        }
        if (!obj.attributes.empty()) {
            out += ",\n      \"attributes\": {";
            bool first = true;
            for (const auto& [key, value] : obj.attributes) {
                out += first ? "\n        " : ",\n        ";
                first = false;
                append_json_string(out, key);
                out += ": ";
                append_json_string(out, value);
            }
            out += "\n      }";
        }
        out += "\n    }";
    }
    out += c.objects.empty() ? "]" : "\n  ]";
    out += "\n}\n";
    return out;
}

}  // namespace capkit
