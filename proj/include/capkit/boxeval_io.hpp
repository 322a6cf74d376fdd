#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capkit/boxeval.hpp"
#include "capkit/caption_io.hpp"
#include "capkit/error.hpp"
#include "capkit/render.hpp"

namespace capkit {

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EnvError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EnvError("cannot write " + path.string());
    out << text;
}

/// Dimensions manifest: {"imageId": [width, height], ...} or
/// {"imageId": {"width": W, "height": H}, ...}.
inline DimsMap load_dims_manifest(const std::filesystem::path& path) {
    using detail::json;
    const json doc = detail::parse_json(read_text_file(path), "dimensions manifest");
    if (!doc.is_object()) throw Error("dimensions manifest: expected a JSON object");
    DimsMap dims;
    for (const auto& [id, node] : doc.items()) {
        ImageDims d;
        if (node.is_array() && node.size() == 2) {
            d.width = detail::get_channel(node[0], id + "[0]");
            d.height = detail::get_channel(node[1], id + "[1]");
        } else if (node.is_object()) {
            d.width = detail::get_channel(detail::require_key(node, "width", id), id + ".width");
            d.height = detail::get_channel(detail::require_key(node, "height", id), id + ".height");
        } else {
            throw Error(id + ": expected [width, height] or {width, height}");
        }
        if (d.width < 1 || d.height < 1) throw Error(id + ": dimensions must be >= 1");
        dims.emplace(id, d);
    }
    return dims;
}

namespace boxdetail {

inline std::string image_id_string(const detail::json& v, const std::string& path) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw Error(path + ": expected a string or integer image id");
}

inline BoundingBox normalize_xywh(double x, double y, double w, double h, const ImageDims& dims,
                                  const std::string& path) {
    const BoundingBox box{x / dims.width, y / dims.height, (x + w) / dims.width,
                          (y + h) / dims.height};
    if (!box.valid()) {
        throw Error(path + ": degenerate or out-of-frame box after normalization");
    }
    return box;
}

}  // namespace boxdetail

/// COCO results format: [{"image_id", "category", "bbox": [x,y,w,h] in
/// absolute pixels, "score"}, ...]. Dimensions are required to normalize.
inline std::vector<Detection> load_coco_detections(const std::filesystem::path& path,
                                                   const DimsMap& dims) {
    using detail::json;
    const json doc = detail::parse_json(read_text_file(path), "detections file");
    if (!doc.is_array()) throw Error("detections file: expected a JSON array");

    std::vector<Detection> dets;
    dets.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string p = "detections[" + std::to_string(i) + "]";
        const json& node = doc[i];
        if (!node.is_object()) throw Error(p + ": expected an object");

        Detection d;
        d.image_id = boxdetail::image_id_string(detail::require_key(node, "image_id", p),
                                                p + ".image_id");
        d.category =
            detail::get_string(detail::require_key(node, "category", p), p + ".category");
        d.score = detail::get_number(detail::require_key(node, "score", p), p + ".score");
        if (d.score < 0.0 || d.score > 1.0) throw Error(p + ".score: expected [0,1]");

        const auto it = dims.find(d.image_id);
        if (it == dims.end()) {
            throw Error(p + ": no dimensions for image \"" + d.image_id + "\"");
        }
        const json& bbox = detail::require_key(node, "bbox", p);
        if (!bbox.is_array() || bbox.size() != 4) throw Error(p + ".bbox: expected [x,y,w,h]");
        d.box = boxdetail::normalize_xywh(
            detail::get_number(bbox[0], p + ".bbox[0]"), detail::get_number(bbox[1], p + ".bbox[1]"),
            detail::get_number(bbox[2], p + ".bbox[2]"), detail::get_number(bbox[3], p + ".bbox[3]"),
            it->second, p + ".bbox");
        dets.push_back(std::move(d));
    }
    return dets;
}

struct GroundTruthSet {
    std::vector<GroundTruthBox> gts;
    DimsMap dims;
};

/// COCO annotations format: {"images": [{"id","width","height"}],
/// "categories": [{"id","name"}], "annotations": [{"image_id",
/// "category_id", "bbox": [x,y,w,h]}]}.
inline GroundTruthSet load_coco_ground_truth(const std::filesystem::path& path) {
    using detail::json;
    const json doc = detail::parse_json(read_text_file(path), "annotations file");
    if (!doc.is_object()) throw Error("annotations file: expected a JSON object");

    GroundTruthSet set;
    std::map<long long, std::string> cat_names;

    const json& images = detail::require_key(doc, "images", "annotations");
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string p = "images[" + std::to_string(i) + "]";
        const json& node = images[i];
        const std::string id =
            boxdetail::image_id_string(detail::require_key(node, "id", p), p + ".id");
        ImageDims d{detail::get_channel(detail::require_key(node, "width", p), p + ".width"),
                    detail::get_channel(detail::require_key(node, "height", p), p + ".height")};
        if (d.width < 1 || d.height < 1) throw Error(p + ": dimensions must be >= 1");
        set.dims.emplace(id, d);
    }
    const json& categories = detail::require_key(doc, "categories", "annotations");
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const std::string p = "categories[" + std::to_string(i) + "]";
        const json& node = categories[i];
        const json& id = detail::require_key(node, "id", p);
        if (!id.is_number_integer()) throw Error(p + ".id: expected an integer");
        cat_names[id.get<long long>()] =
            detail::get_string(detail::require_key(node, "name", p), p + ".name");
    }
    const json& anns = detail::require_key(doc, "annotations", "annotations");
    for (std::size_t i = 0; i < anns.size(); ++i) {
        const std::string p = "annotations[" + std::to_string(i) + "]";
        const json& node = anns[i];

        GroundTruthBox gt;
        gt.image_id = boxdetail::image_id_string(detail::require_key(node, "image_id", p),
                                                 p + ".image_id");
        const json& cat = detail::require_key(node, "category_id", p);
        if (!cat.is_number_integer()) throw Error(p + ".category_id: expected an integer");
        const auto cit = cat_names.find(cat.get<long long>());
        if (cit == cat_names.end()) throw Error(p + ": unknown category id");
        gt.category = cit->second;

        const auto dit = set.dims.find(gt.image_id);
        if (dit == set.dims.end()) {
            throw Error(p + ": no dimensions for image \"" + gt.image_id + "\"");
        }
        const json& bbox = detail::require_key(node, "bbox", p);
        if (!bbox.is_array() || bbox.size() != 4) throw Error(p + ".bbox: expected [x,y,w,h]");
        gt.box = boxdetail::normalize_xywh(
            detail::get_number(bbox[0], p + ".bbox[0]"), detail::get_number(bbox[1], p + ".bbox[1]"),
            detail::get_number(bbox[2], p + ".bbox[2]"), detail::get_number(bbox[3], p + ".bbox[3]"),
            dit->second, p + ".bbox");
        gt.area_pixels = gt.box.area() * dit->second.width * dit->second.height;
        set.gts.push_back(std::move(gt));
    }
    return set;
}

/// Ground truth from a directory of caption documents plus a dimensions
/// manifest; the image id is the caption's file stem.
inline GroundTruthSet load_caption_ground_truth(const std::filesystem::path& captions_dir,
                                                const std::filesystem::path& dims_path) {
    GroundTruthSet set;
    set.dims = load_dims_manifest(dims_path);

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(captions_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    for (const std::filesystem::path& file : files) {
        const std::string image_id = file.stem().string();
        const auto dit = set.dims.find(image_id);
        if (dit == set.dims.end()) {
            throw Error("no dimensions for image \"" + image_id + "\" (" + file.string() + ")");
        }
        StructuredCaption caption;
        try {
            caption = parse_caption(read_text_file(file));
        } catch (const EnvError&) {
            throw;
        } catch (const Error& e) {
            throw Error(file.string() + ": " + e.what());
        }
        for (const Detection& d : boxes_as_detections(caption, image_id)) {
            GroundTruthBox gt;
            gt.image_id = d.image_id;
            gt.category = d.category;
            gt.box = d.box;
            gt.area_pixels = d.box.area() * dit->second.width * dit->second.height;
            set.gts.push_back(std::move(gt));
        }
    }
    return set;
}

/// Category metadata: {"category": "rare" | "common" | "frequent", ...}.
inline CategoryMeta load_category_meta(const std::filesystem::path& path) {
    using detail::json;
    const json doc = detail::parse_json(read_text_file(path), "category metadata");
    if (!doc.is_object()) throw Error("category metadata: expected a JSON object");
    CategoryMeta meta;
    for (const auto& [cat, node] : doc.items()) {
        const std::string r = detail::get_string(node, cat);
        if (r == "rare") {
            meta[cat] = Rarity::rare;
        } else if (r == "common") {
            meta[cat] = Rarity::common;
        } else if (r == "frequent") {
            meta[cat] = Rarity::frequent;
        } else {
            throw Error(cat + ": expected rare, common, or frequent, got \"" + r + "\"");
        }
    }
    return meta;
}

/// Score-table JSON with fixed column order; unset buckets serialize as null.
inline std::string ap_report_to_json(const ApReport& r) {
    nlohmann::ordered_json doc;
    doc["AP"] = r.ap;
    doc["AP50"] = r.ap50;
    doc["AR"] = r.ar;
    const auto put = [&doc](const char* key, const std::optional<double>& v) {
        if (v) {
            doc[key] = *v;
        } else {
            doc[key] = nullptr;
        }
    };
    put("AP_s", r.ap_small);
    put("AP_m", r.ap_medium);
    put("AP_l", r.ap_large);
    put("AP_r", r.ap_rare);
    put("AP_c", r.ap_common);
    put("AP_f", r.ap_frequent);
    return doc.dump(2) + "\n";
}

}  // namespace capkit
