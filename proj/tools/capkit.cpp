// capkit command-line tool: validate/enrich/refine structured captions,
// score color fidelity and box alignment, compute preference win rates,
// and render reference images.
//
// Exit codes: 0 success, 1 domain failure (validation or evaluation
// error), 2 environment failure (I/O, bad flags).

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "capkit/capkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

std::vector<fs::path> caption_files(const fs::path& path) {
    std::error_code ec;
    if (fs::is_regular_file(path, ec)) return {path};
    if (!fs::is_directory(path, ec)) {
        throw capkit::EnvError("no such file or directory: " + path.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw capkit::EnvError("cannot create output directory: " + dir.string());
    }
}

capkit::RgbColor parse_color_flag(const std::string& s, const char* flag) {
    int r = 0, g = 0, b = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d,%d,%d%c", &r, &g, &b, &tail) != 3) {
        throw CLI::ValidationError(flag, "expected R,G,B");
    }
    const capkit::RgbColor c{r, g, b};
    if (!c.valid()) throw CLI::ValidationError(flag, "channels must be in [0,255]");
    return c;
}

// --config <file> supplies defaults for flags the user did not pass.
struct ConfigFile {
    json values = json::object();

    void load(const fs::path& path) {
        try {
            values = capkit::detail::parse_json(capkit::read_text_file(path), "config file");
        } catch (const capkit::EnvError&) {
            throw;
        } catch (const capkit::Error& e) {
            throw capkit::EnvError(e.what());
        }
        if (!values.is_object()) throw capkit::EnvError("config file: expected a JSON object");
    }

    template <typename T>
    void apply(const CLI::Option* opt, const char* key, T& var) const {
        if (opt->count() > 0) return;  // flags override the file
        const auto it = values.find(key);
        if (it == values.end()) return;
        try {
            var = it->get<T>();
        } catch (const json::exception&) {
            throw capkit::EnvError(std::string("config file: bad value for \"") + key + "\"");
        }
    }
};

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const fs::path& input) {
    const std::vector<fs::path> files = caption_files(input);
    std::size_t bad = 0;
    for (const fs::path& file : files) {
        const std::string text = capkit::read_text_file(file);
        try {
            const capkit::ParsedCaption parsed = capkit::parse_caption_lenient(text);
            for (const capkit::Violation& v : parsed.violations) {
                std::cout << file.string() << ": " << v.path << ": " << v.message << "\n";
                bad++;
            }
        } catch (const capkit::Error& e) {
            std::cout << file.string() << ": " << e.what() << "\n";
            bad++;
        }
    }
    return bad == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// enrich
// ---------------------------------------------------------------------------

int cmd_enrich(const fs::path& captions, const fs::path& annotations, const fs::path& out_dir,
               const std::vector<std::string>& semantic_keys, const std::string& report_path) {
    const std::vector<fs::path> files = caption_files(captions);
    ensure_out_dir(out_dir);

    capkit::EnrichOptions opts;
    if (!semantic_keys.empty()) opts.semantic_keys = semantic_keys;

    const bool ann_is_dir = fs::is_directory(annotations);
    json report = json::object();
    report["files"] = json::array();
    bool failed = false;

    for (const fs::path& file : files) {
        json entry;
        entry["file"] = file.filename().string();
        try {
            const capkit::StructuredCaption caption =
                capkit::parse_caption(capkit::read_text_file(file));

            capkit::AnnotationBundle bundle;  // missing bundle = enrich nothing
            const fs::path ann_path = ann_is_dir ? annotations / file.filename() : annotations;
            if (fs::is_regular_file(ann_path)) {
                bundle = capkit::parse_annotation_bundle(capkit::read_text_file(ann_path));
            }

            capkit::EnrichResult result = capkit::enrich_caption(caption, bundle, opts);
            capkit::write_text_file(out_dir / file.filename(),
                                    capkit::serialize_caption(result.caption));
            entry["unannotated"] = result.unannotated;
        } catch (const capkit::Error& e) {
            entry["error"] = e.what();
            failed = true;
        }
        report["files"].push_back(std::move(entry));
    }

    const std::string report_text = report.dump(2) + "\n";
    if (report_path.empty()) {
        std::cout << report_text;
    } else {
        capkit::write_text_file(report_path, report_text);
    }
    return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------
// refine
// ---------------------------------------------------------------------------

int cmd_refine(const fs::path& caption_path, const fs::path& edits_path, const fs::path& out,
               const std::string& form) {
    capkit::StructuredCaption caption =
        capkit::parse_caption(capkit::read_text_file(caption_path));
    const std::vector<capkit::EditOp> ops =
        capkit::parse_edit_script(capkit::read_text_file(edits_path));

    for (std::size_t i = 0; i < ops.size(); ++i) {
        try {
            caption = capkit::apply_edit(caption, ops[i]);
        } catch (const capkit::Error& e) {
            throw capkit::Error("edit " + std::to_string(i) + " failed: " + e.what());
        }
    }
    const capkit::CoordForm coord_form =
        form == "percent" ? capkit::CoordForm::percent : capkit::CoordForm::unit;
    capkit::write_text_file(out, capkit::serialize_caption(caption, coord_form));
    return 0;
}

// ---------------------------------------------------------------------------
// eval-color
// ---------------------------------------------------------------------------

struct ColorCase {
    std::string case_id;
    fs::path image_path;
    capkit::RgbColor target;
};

std::vector<ColorCase> load_color_manifest(const fs::path& path) {
    const json doc = capkit::detail::parse_json(capkit::read_text_file(path), "case manifest");
    if (!doc.is_array()) throw capkit::Error("case manifest: expected a JSON array");

    std::vector<ColorCase> cases;
    std::set<std::string> seen;
    const fs::path base = path.parent_path();
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string p = "cases[" + std::to_string(i) + "]";
        const json& node = doc[i];
        if (!node.is_object()) throw capkit::Error(p + ": expected an object");

        ColorCase c;
        c.case_id = capkit::detail::get_string(capkit::detail::require_key(node, "caseId", p),
                                               p + ".caseId");
        if (!seen.insert(c.case_id).second) {
            throw capkit::Error(p + ": duplicate caseId \"" + c.case_id + "\"");
        }
        const fs::path img(capkit::detail::get_string(
            capkit::detail::require_key(node, "imagePath", p), p + ".imagePath"));
        c.image_path = img.is_absolute() ? img : base / img;
        c.target = capkit::detail::get_color(capkit::detail::require_key(node, "target", p),
                                             p + ".target");
        if (!c.target.valid()) throw capkit::Error(p + ".target: channel out of [0,255]");
        cases.push_back(std::move(c));
    }
    return cases;
}

int cmd_eval_color(const fs::path& manifest, const fs::path& out_dir, std::vector<int> ks,
                   const capkit::ColorEvalConfig& cfg, int workers, const std::string& format) {
    const std::vector<ColorCase> cases = load_color_manifest(manifest);
    if (cases.empty()) throw capkit::Error("case manifest is empty");
    if (ks.empty()) throw capkit::Error("no k values requested");
    std::sort(ks.begin(), ks.end());
    ensure_out_dir(out_dir);

    struct Slot {
        std::optional<capkit::ColorCaseResult> result;
        std::string excluded_reason;
        std::exception_ptr error;
    };
    std::vector<Slot> slots(cases.size() * ks.size());

    // Jobs are (case, k) pairs; slot order is fixed up front so worker
    // count never affects the merged output.
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < slots.size();) {
            const ColorCase& c = cases[j / ks.size()];
            const int k = ks[j % ks.size()];
            try {
                const capkit::Image img = capkit::load_png(c.image_path);
                capkit::ColorCaseResult r = capkit::eval_color_case(img, c.target, k, cfg);
                r.case_id = c.case_id;
                slots[j].result = std::move(r);
            } catch (const capkit::EmptyForegroundError& e) {
                slots[j].excluded_reason = e.what();
            } catch (...) {
                slots[j].error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::max(1, workers);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    for (const Slot& s : slots) {
        if (s.error) std::rethrow_exception(s.error);
    }

    // Merge in (caseId, k) order regardless of manifest or worker order.
    std::vector<std::size_t> case_order(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) case_order[i] = i;
    std::sort(case_order.begin(), case_order.end(), [&](std::size_t a, std::size_t b) {
        return cases[a].case_id < cases[b].case_id;
    });

    json cases_json = json::array();
    json excluded = json::array();
    std::map<int, std::vector<capkit::ColorCaseResult>> per_k;
    std::string csv = "case_id,k,target_r,target_g,target_b,delta_e00,ab_distance\n";

    for (const std::size_t ci : case_order) {
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            const Slot& slot = slots[ci * ks.size() + ki];
            if (slot.result) {
                const capkit::ColorCaseResult& r = *slot.result;
                json entry;
                entry["case_id"] = r.case_id;
                entry["k"] = r.k;
                entry["target"] = {r.target.r, r.target.g, r.target.b};
                entry["delta_e00"] = r.by_delta_e00.distance;
                entry["ab_distance"] = r.by_ab.distance;
                entry["cluster_delta_e00"] = {r.by_delta_e00.cluster.center.L,
                                              r.by_delta_e00.cluster.center.a,
                                              r.by_delta_e00.cluster.center.b};
                entry["cluster_ab"] = {r.by_ab.cluster.center.L, r.by_ab.cluster.center.a,
                                       r.by_ab.cluster.center.b};
                cases_json.push_back(std::move(entry));
                per_k[r.k].push_back(r);

                char nums[80];
                std::snprintf(nums, sizeof(nums), "%.17g,%.17g", r.by_delta_e00.distance,
                              r.by_ab.distance);
                csv += r.case_id + "," + std::to_string(r.k) + "," + std::to_string(r.target.r) +
                       "," + std::to_string(r.target.g) + "," + std::to_string(r.target.b) + "," +
                       nums + "\n";
            } else if (ki == 0) {  // one exclusion entry per case, not per k
                json entry;
                entry["case_id"] = cases[ci].case_id;
                entry["reason"] = slot.excluded_reason;
                excluded.push_back(std::move(entry));
            }
        }
    }

    json stats = json::object();
    for (const int k : ks) {
        const auto it = per_k.find(k);
        if (it == per_k.end()) continue;
        const capkit::ColorStats s = capkit::aggregate_color(it->second);
        json entry;
        entry["ab"] = {{"mean", s.ab.mean}, {"median", s.ab.median}, {"p90", s.ab.p90}};
        entry["delta_e00"] = {
            {"mean", s.delta_e00.mean}, {"median", s.delta_e00.median}, {"p90", s.delta_e00.p90}};
        stats[std::to_string(k)] = std::move(entry);
    }
    if (stats.empty()) throw capkit::Error("eval-color: no usable cases");

    json report;
    report["cases"] = std::move(cases_json);
    report["excluded"] = std::move(excluded);
    report["stats"] = std::move(stats);

    if (format == "json" || format == "both") {
        capkit::write_text_file(out_dir / "color_report.json", report.dump(2) + "\n");
    }
    if (format == "csv" || format == "both") {
        capkit::write_text_file(out_dir / "color_report.csv", csv);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval-box
// ---------------------------------------------------------------------------

int cmd_eval_box(const fs::path& detections, const fs::path& ground_truth,
                 const fs::path& captions, const fs::path& dims, const fs::path& meta,
                 bool rarity, const fs::path& out) {
    capkit::GroundTruthSet gt;
    if (!ground_truth.empty()) {
        gt = capkit::load_coco_ground_truth(ground_truth);
    } else if (!captions.empty() && !dims.empty()) {
        gt = capkit::load_caption_ground_truth(captions, dims);
    } else {
        throw capkit::Error(
            "eval-box: provide --ground-truth, or --captions together with --dims");
    }

    capkit::CategoryMeta category_meta;
    if (!meta.empty()) {
        category_meta = capkit::load_category_meta(meta);
        rarity = true;
    } else if (rarity) {
        throw capkit::Error("eval-box: rarity buckets requested but no --meta file given");
    }

    const std::vector<capkit::Detection> dets =
        capkit::load_coco_detections(detections, gt.dims);

    capkit::BoxEvalOptions opts;
    opts.dims = &gt.dims;
    if (rarity) opts.rarity = &category_meta;
    const capkit::ApReport report = capkit::evaluate_boxes(dets, gt.gts, opts);

    const std::string text = capkit::ap_report_to_json(report);
    if (!out.empty()) capkit::write_text_file(out, text);
    std::cout << text;
    return 0;
}

// ---------------------------------------------------------------------------
// tabr
// ---------------------------------------------------------------------------

int cmd_tabr(const fs::path& records_path, const fs::path& out, double confidence) {
    const std::string text = capkit::read_text_file(records_path);
    const std::vector<capkit::PreferenceRecord> records =
        records_path.extension() == ".json" ? capkit::parse_preference_json(text)
                                            : capkit::parse_preference_csv(text);
    if (records.empty()) throw capkit::Error("tabr: no records");

    const std::vector<capkit::WinRateReport> reports =
        capkit::win_rate_reports(records, confidence);
    std::cout << capkit::win_rate_table(reports);
    if (!out.empty()) {
        capkit::write_text_file(out, capkit::win_rate_reports_to_json(reports));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// render / overlay
// ---------------------------------------------------------------------------

int cmd_render(const fs::path& captions, const fs::path& out_dir,
               const capkit::RenderConfig& cfg) {
    const std::vector<fs::path> files = caption_files(captions);
    if (files.empty()) throw capkit::Error("render: no caption files found");
    ensure_out_dir(out_dir);
    for (const fs::path& file : files) {
        try {
            const capkit::StructuredCaption caption =
                capkit::parse_caption(capkit::read_text_file(file));
            const capkit::Image img = capkit::rasterize(caption, cfg);
            capkit::save_png(img, out_dir / (file.stem().string() + ".png"));
        } catch (const capkit::EnvError&) {
            throw;
        } catch (const capkit::Error& e) {
            throw capkit::Error(file.string() + ": " + e.what());
        }
    }
    return 0;
}

int cmd_overlay(const fs::path& image_path, const fs::path& caption_path, const fs::path& out,
                int stroke, const std::string& color_flag) {
    const capkit::StructuredCaption caption =
        capkit::parse_caption(capkit::read_text_file(caption_path));
    capkit::Image img = capkit::load_png(image_path);

    std::optional<capkit::RgbColor> fixed;
    if (!color_flag.empty()) fixed = parse_color_flag(color_flag, "--color");

    std::vector<std::pair<capkit::BoundingBox, capkit::RgbColor>> boxes;
    for (const capkit::ObjectSpec& obj : caption.objects) {
        if (!obj.box) continue;
        capkit::RgbColor color{255, 0, 0};
        if (fixed) {
            color = *fixed;
        } else if (!obj.colors.empty()) {
            color = obj.colors.front();
        }
        boxes.emplace_back(*obj.box, color);
    }
    capkit::save_png(capkit::overlay_boxes(std::move(img), boxes, stroke), out);
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"Structured-caption toolkit: schema validation, parametric edits, "
                 "enrichment, and deterministic evaluation of color fidelity, box "
                 "alignment, and preference win rates"};
    app.require_subcommand(1);
    app.fallthrough();  // app-level flags like --config work after the subcommand too

    ConfigFile config;
    std::string config_path;
    app.add_option("--config", config_path, "JSON file mirroring flag names; flags override");

    // validate
    auto* validate = app.add_subcommand("validate", "Check caption documents; one violation per line");
    std::string validate_input;
    validate->add_option("input", validate_input, "caption file or directory")->required();

    // enrich
    auto* enrich = app.add_subcommand("enrich", "Merge numeric annotations into captions");
    std::string enrich_captions, enrich_annotations, enrich_out, enrich_report;
    std::vector<std::string> enrich_keys;
    enrich->add_option("--captions", enrich_captions, "caption file or directory")->required();
    enrich->add_option("--annotations", enrich_annotations, "bundle file or directory")->required();
    enrich->add_option("--out", enrich_out, "output directory")->required();
    enrich->add_option("--keys", enrich_keys, "semantic attribute keys to strip")
        ->delimiter(',');
    enrich->add_option("--report", enrich_report, "write the JSON report here instead of stdout");

    // refine
    auto* refine = app.add_subcommand("refine", "Apply a JSON edit script to a caption");
    std::string refine_caption, refine_edits, refine_out, refine_form = "unit";
    refine->add_option("--caption", refine_caption, "input caption")->required();
    refine->add_option("--edits", refine_edits, "edit script (JSON array)")->required();
    refine->add_option("--out", refine_out, "output caption")->required();
    refine->add_option("--form", refine_form, "serialization form")
        ->check(CLI::IsMember({"unit", "percent"}));

    // eval-color
    auto* eval_color = app.add_subcommand("eval-color", "Score color fidelity over a case manifest");
    std::string ec_manifest, ec_out, ec_format = "both";
    std::vector<int> ec_k{5, 8};
    std::uint64_t ec_seed = 0;
    int ec_white = 245, ec_erosion = 1, ec_workers = 1;
    double ec_min_fraction = 0.05;
    eval_color->add_option("--manifest", ec_manifest, "case manifest JSON")->required();
    eval_color->add_option("--out", ec_out, "output directory")->required();
    auto* ec_k_opt = eval_color->add_option("--k", ec_k, "K-means cluster counts")->delimiter(',');
    auto* ec_seed_opt = eval_color->add_option("--seed", ec_seed, "RNG seed for K-means");
    auto* ec_white_opt = eval_color->add_option("--white-threshold", ec_white, "background channel threshold");
    auto* ec_erosion_opt = eval_color->add_option("--erosion", ec_erosion, "mask erosion passes");
    auto* ec_minfrac_opt = eval_color->add_option("--min-fraction", ec_min_fraction, "cluster weight filter");
    auto* ec_workers_opt = eval_color->add_option("--workers", ec_workers, "parallel case workers");
    eval_color->add_option("--format", ec_format, "report format")
        ->check(CLI::IsMember({"json", "csv", "both"}));

    // eval-box
    auto* eval_box = app.add_subcommand("eval-box", "COCO-style AP/AR against caption boxes");
    std::string eb_dets, eb_gt, eb_captions, eb_dims, eb_meta, eb_out;
    bool eb_rarity = false;
    eval_box->add_option("--detections", eb_dets, "COCO results JSON")->required();
    eval_box->add_option("--ground-truth", eb_gt, "COCO annotations JSON");
    eval_box->add_option("--captions", eb_captions, "caption directory as ground truth");
    eval_box->add_option("--dims", eb_dims, "image dimensions manifest");
    eval_box->add_option("--meta", eb_meta, "category rarity metadata");
    eval_box->add_flag("--rarity", eb_rarity, "request rarity buckets (needs --meta)");
    eval_box->add_option("--out", eb_out, "write the report JSON here");

    // tabr
    auto* tabr = app.add_subcommand("tabr", "Pairwise preference win rates with Wilson intervals");
    std::string tabr_records, tabr_out;
    double tabr_confidence = 0.95;
    tabr->add_option("--records", tabr_records, "records CSV or JSON")->required();
    tabr->add_option("--out", tabr_out, "write the report JSON here");
    auto* tabr_conf_opt = tabr->add_option("--confidence", tabr_confidence, "interval confidence");

    // render
    auto* render = app.add_subcommand("render", "Rasterize captions to PNG");
    std::string rd_captions, rd_out, rd_shape = "rectangle", rd_background;
    int rd_width = 512, rd_height = 512;
    bool rd_palette_bg = false;
    render->add_option("--captions", rd_captions, "caption file or directory")->required();
    render->add_option("--out", rd_out, "output directory")->required();
    auto* rd_width_opt = render->add_option("--width", rd_width, "image width");
    auto* rd_height_opt = render->add_option("--height", rd_height, "image height");
    render->add_option("--shape", rd_shape, "object shape")
        ->check(CLI::IsMember({"rectangle", "ellipse"}));
    render->add_option("--background", rd_background, "background color R,G,B");
    render->add_flag("--palette-background", rd_palette_bg, "fill with first palette color");

    // overlay
    auto* overlay = app.add_subcommand("overlay", "Draw caption boxes onto an image");
    std::string ov_image, ov_caption, ov_out, ov_color;
    int ov_stroke = 2;
    overlay->add_option("--image", ov_image, "input PNG")->required();
    overlay->add_option("--caption", ov_caption, "caption supplying the boxes")->required();
    overlay->add_option("--out", ov_out, "output PNG")->required();
    overlay->add_option("--stroke", ov_stroke, "outline width in pixels");
    overlay->add_option("--color", ov_color, "fixed outline color R,G,B");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!config_path.empty()) config.load(config_path);
        // Values a config file may supply for flags the user left unset.
        config.apply(ec_k_opt, "k", ec_k);
        config.apply(ec_seed_opt, "seed", ec_seed);
        config.apply(ec_white_opt, "white-threshold", ec_white);
        config.apply(ec_erosion_opt, "erosion", ec_erosion);
        config.apply(ec_minfrac_opt, "min-fraction", ec_min_fraction);
        config.apply(ec_workers_opt, "workers", ec_workers);
        config.apply(tabr_conf_opt, "confidence", tabr_confidence);
        config.apply(rd_width_opt, "width", rd_width);
        config.apply(rd_height_opt, "height", rd_height);

        if (validate->parsed()) return cmd_validate(validate_input);
        if (enrich->parsed()) {
            return cmd_enrich(enrich_captions, enrich_annotations, enrich_out, enrich_keys,
                              enrich_report);
        }
        if (refine->parsed()) {
            return cmd_refine(refine_caption, refine_edits, refine_out, refine_form);
        }
        if (eval_color->parsed()) {
            capkit::ColorEvalConfig cfg;
            cfg.white_threshold = ec_white;
            cfg.erosion = ec_erosion;
            cfg.min_fraction = ec_min_fraction;
            cfg.kmeans.seed = ec_seed;
            return cmd_eval_color(ec_manifest, ec_out, ec_k, cfg, ec_workers, ec_format);
        }
        if (eval_box->parsed()) {
            return cmd_eval_box(eb_dets, eb_gt, eb_captions, eb_dims, eb_meta, eb_rarity, eb_out);
        }
        if (tabr->parsed()) return cmd_tabr(tabr_records, tabr_out, tabr_confidence);
        if (render->parsed()) {
            capkit::RenderConfig cfg;
            cfg.width = rd_width;
            cfg.height = rd_height;
            cfg.shape = rd_shape == "ellipse" ? capkit::ObjectShape::ellipse
                                              : capkit::ObjectShape::rectangle;
            if (!rd_background.empty()) {
                cfg.background = parse_color_flag(rd_background, "--background");
            }
            cfg.palette_background = rd_palette_bg;
            return cmd_render(rd_captions, rd_out, cfg);
        }
        if (overlay->parsed()) {
            return cmd_overlay(ov_image, ov_caption, ov_out, ov_stroke, ov_color);
        }
        return 2;
    } catch (const capkit::EnvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const capkit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
