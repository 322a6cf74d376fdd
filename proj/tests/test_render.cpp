#include "capkit/render.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <vector>

#include "capkit/boxeval.hpp"
#include "capkit/image.hpp"
#include "capkit/palette.hpp"
#include "test_util.hpp"

using namespace capkit;

namespace {

StructuredCaption one_object_caption(BoundingBox box, RgbColor color,
                                     std::optional<double> depth = {}) {
    StructuredCaption c;
    c.scene = "test scene";
    ObjectSpec obj;
    obj.id = "obj0";
    obj.description = "thing";
    obj.box = box;
    obj.colors = {color};
    obj.depth = depth;
    c.objects.push_back(obj);
    return c;
}

}  // namespace

TEST_CASE("rasterize pixel coverage") {
    const RenderConfig cfg{100, 100};

    SECTION("half-open pixel-center rule") {
        const Image img =
            rasterize(one_object_caption({0.25, 0.25, 0.75, 0.75}, {204, 1, 1}), cfg);
        const RgbColor red{204, 1, 1};
        const RgbColor white{255, 255, 255};
        CHECK(img.at(25, 25) == red);
        CHECK(img.at(74, 74) == red);
        CHECK(img.at(24, 25) == white);
        CHECK(img.at(75, 74) == white);
        CHECK(img.at(50, 24) == white);
        std::size_t reds = 0;
        for (const RgbColor& p : img.pixels) {
            if (p == red) reds++;
        }
        CHECK(reds == 50 * 50);
    }

    SECTION("empty object list yields the uniform background") {
        StructuredCaption c;
        c.scene = "empty";
        const Image img = rasterize(c, cfg);
        for (const RgbColor& p : img.pixels) {
            CHECK(p == RgbColor{255, 255, 255});
        }
    }

    SECTION("painter order: larger depth is farther") {
        StructuredCaption c;
        c.scene = "overlap";
        ObjectSpec far_obj;
        far_obj.id = "far";
        far_obj.description = "blue square";
        far_obj.box = BoundingBox{0.1, 0.1, 0.6, 0.6};
        far_obj.colors = {RgbColor{0, 0, 255}};
        far_obj.depth = 2.0;
        ObjectSpec near_obj;
        near_obj.id = "near";
        near_obj.description = "red square";
        near_obj.box = BoundingBox{0.4, 0.4, 0.9, 0.9};
        near_obj.colors = {RgbColor{255, 0, 0}};
        near_obj.depth = 0.0;
        c.objects = {near_obj, far_obj};  // order in the list must not matter

        const Image img = rasterize(c, cfg);
        CHECK(img.at(20, 20) == RgbColor{0, 0, 255});
        CHECK(img.at(50, 50) == RgbColor{255, 0, 0});  // overlap goes to the near object
        CHECK(img.at(80, 80) == RgbColor{255, 0, 0});
    }

    SECTION("depth ties break toward the later object") {
        StructuredCaption c;
        c.scene = "tie";
        for (int i = 0; i < 2; ++i) {
            ObjectSpec obj;
            obj.id = "obj" + std::to_string(i);
            obj.description = "square";
            obj.box = BoundingBox{0.2, 0.2, 0.8, 0.8};
            obj.colors = {i == 0 ? RgbColor{10, 10, 10} : RgbColor{200, 200, 200}};
            c.objects.push_back(obj);
        }
        const Image img = rasterize(c, cfg);
        CHECK(img.at(50, 50) == RgbColor{200, 200, 200});
    }

    SECTION("ellipse stays inside its box") {
        RenderConfig ellipse_cfg{100, 100, ObjectShape::ellipse};
        const Image img =
            rasterize(one_object_caption({0.2, 0.2, 0.8, 0.8}, {0, 0, 0}), ellipse_cfg);
        CHECK(img.at(50, 50) == RgbColor{0, 0, 0});
        CHECK(img.at(21, 21) == RgbColor{255, 255, 255});  // corner outside the ellipse
        CHECK(img.at(50, 21) == RgbColor{0, 0, 0});        // top of the vertical axis
    }

    SECTION("palette background") {
        StructuredCaption c = one_object_caption({0.4, 0.4, 0.6, 0.6}, {0, 0, 0});
        c.palette = ScenePalette{{RgbColor{10, 20, 30}}};
        RenderConfig pal_cfg{50, 50};
        pal_cfg.palette_background = true;
        const Image img = rasterize(c, pal_cfg);
        CHECK(img.at(0, 0) == RgbColor{10, 20, 30});
    }

    SECTION("determinism: identical calls give identical images") {
        testutil::Rng rng(3);
        const StructuredCaption c = testutil::random_caption(rng);
        StructuredCaption renderable = c;
        for (ObjectSpec& obj : renderable.objects) {
            if (!obj.box) obj.box = rng.box();
            if (obj.colors.empty()) obj.colors = {rng.color()};
        }
        CHECK(rasterize(renderable, cfg) == rasterize(renderable, cfg));
    }

    SECTION("errors") {
        StructuredCaption missing_box;
        missing_box.scene = "s";
        ObjectSpec obj;
        obj.id = "a";
        obj.description = "d";
        obj.colors = {RgbColor{1, 2, 3}};
        missing_box.objects.push_back(obj);
        CHECK_THROWS_WITH(rasterize(missing_box, cfg),
                          Catch::Matchers::ContainsSubstring("has no box"));

        StructuredCaption missing_colors = one_object_caption({0.1, 0.1, 0.5, 0.5}, {0, 0, 0});
        missing_colors.objects[0].colors.clear();
        CHECK_THROWS_WITH(rasterize(missing_colors, cfg),
                          Catch::Matchers::ContainsSubstring("has no colors"));
    }
}

TEST_CASE("rendered support matches box coverage exactly") {
    // Non-overlapping objects: each object's pixel support must equal its
    // box's half-open pixel-center coverage.
    const RenderConfig cfg{64, 64};
    StructuredCaption c;
    c.scene = "grid";
    const BoundingBox boxes[] = {{0.05, 0.05, 0.45, 0.45}, {0.55, 0.05, 0.95, 0.45},
                                 {0.05, 0.55, 0.45, 0.95}};
    const RgbColor colors[] = {{200, 0, 0}, {0, 200, 0}, {0, 0, 200}};
    for (int i = 0; i < 3; ++i) {
        ObjectSpec obj;
        obj.id = "obj" + std::to_string(i);
        obj.description = "square";
        obj.box = boxes[i];
        obj.colors = {colors[i]};
        c.objects.push_back(obj);
    }
    const Image img = rasterize(c, cfg);
    for (int i = 0; i < 3; ++i) {
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                const double cx = x + 0.5;
                const double cy = y + 0.5;
                const bool inside = boxes[i].x0 * 64 <= cx && cx < boxes[i].x1 * 64 &&
                                    boxes[i].y0 * 64 <= cy && cy < boxes[i].y1 * 64;
                if (inside) {
                    REQUIRE(img.at(x, y) == colors[i]);
                } else {
                    REQUIRE(img.at(x, y) != colors[i]);
                }
            }
        }
    }
}

TEST_CASE("single-object fill dominates the foreground mask") {
    const RenderConfig cfg{96, 96};
    const RgbColor fill{37, 120, 210};
    const Image img = rasterize(one_object_caption({0.2, 0.3, 0.7, 0.8}, fill), cfg);
    const ForegroundMask mask = extract_foreground(img);
    std::size_t hits = 0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (mask.at(x, y) && img.at(x, y) == fill) hits++;
        }
    }
    CHECK(static_cast<double>(hits) >= 0.99 * static_cast<double>(mask.count()));
}

TEST_CASE("overlay_boxes") {
    SECTION("zero boxes change nothing") {
        const Image img(32, 32, {128, 128, 128});
        CHECK(overlay_boxes(img, {}, 2) == img);
    }
    SECTION("full-frame box with stroke 1 recolors exactly the border") {
        const Image img(20, 20, {255, 255, 255});
        const Image out = overlay_boxes(img, {{BoundingBox{0, 0, 1, 1}, RgbColor{0, 0, 0}}}, 1);
        for (int y = 0; y < 20; ++y) {
            for (int x = 0; x < 20; ++x) {
                const bool border = x == 0 || x == 19 || y == 0 || y == 19;
                CHECK(out.at(x, y) == (border ? RgbColor{0, 0, 0} : RgbColor{255, 255, 255}));
            }
        }
    }
    SECTION("interior pixels beyond the stroke are untouched") {
        const Image img(100, 100, {200, 200, 200});
        const Image out =
            overlay_boxes(img, {{BoundingBox{0.2, 0.2, 0.8, 0.8}, RgbColor{255, 0, 0}}}, 2);
        CHECK(out.at(50, 50) == RgbColor{200, 200, 200});
        CHECK(out.at(30, 30) == RgbColor{200, 200, 200});
        CHECK(out.at(20, 20) == RgbColor{255, 0, 0});
        CHECK(out.at(21, 21) == RgbColor{255, 0, 0});
        CHECK(out.at(22, 22) == RgbColor{200, 200, 200});
        CHECK(out.at(10, 10) == RgbColor{200, 200, 200});  // outside the box
    }
}

TEST_CASE("boxes_as_detections") {
    StructuredCaption c;
    c.scene = "s";
    for (int i = 0; i < 3; ++i) {
        ObjectSpec obj;
        obj.id = "obj" + std::to_string(i);
        obj.description = i == 0 ? "a zebra crossing a road" : "zebra";
        obj.box = BoundingBox{0.1 * (i + 1), 0.1, 0.1 * (i + 1) + 0.15, 0.4};
        obj.colors = {RgbColor{50, 50, 50}};
        c.objects.push_back(obj);
    }
    c.objects[2].attributes["category"] = "horse";

    const std::vector<Detection> dets = boxes_as_detections(c, "img7");
    REQUIRE(dets.size() == 3);
    CHECK(dets[0].image_id == "img7");
    CHECK(dets[0].category == "zebra");  // leading article skipped
    CHECK(dets[1].category == "zebra");  // shared category is fine
    CHECK(dets[2].category == "horse");  // explicit attribute wins
    for (const Detection& d : dets) {
        CHECK(d.score == 1.0);
    }
    CHECK(dets[1].box == *c.objects[1].box);

    SECTION("they evaluate to a perfect score against their own caption") {
        std::vector<GroundTruthBox> gts;
        for (const Detection& d : dets) {
            gts.push_back({d.image_id, d.category, d.box, d.box.area() * 100 * 100});
        }
        const ApReport r = evaluate_boxes(dets, gts);
        CHECK(r.ap == 1.0);
        CHECK(r.ap50 == 1.0);
        CHECK(r.ar == 1.0);
    }
    SECTION("empty caption gives no detections") {
        StructuredCaption empty;
        empty.scene = "s";
        CHECK(boxes_as_detections(empty, "x").empty());
    }
    SECTION("missing box is an error") {
        c.objects[1].box.reset();
        CHECK_THROWS_AS(boxes_as_detections(c, "x"), Error);
    }
    SECTION("category fallback chain") {
        ObjectSpec obj;
        obj.id = "obj9";
        obj.description = "the quick fox";
        CHECK(object_category(obj) == "quick");
        obj.description = "an  umbrella";
        CHECK(object_category(obj) == "umbrella");
        obj.description = "a the an";  // nothing but articles
        CHECK(object_category(obj) == "obj9");
        obj.description = "";
        CHECK(object_category(obj) == "obj9");
        obj.attributes["category"] = "vehicle";
        CHECK(object_category(obj) == "vehicle");
    }
}

TEST_CASE("png round trip") {
    const auto tmp = std::filesystem::temp_directory_path() / "capkit_render_test.png";
    testutil::Rng rng(9);
    Image img(40, 25);
    for (RgbColor& p : img.pixels) p = rng.color();

    save_png(img, tmp);
    const Image back = load_png(tmp);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    CHECK(back.pixels == img.pixels);
    std::filesystem::remove(tmp);

    CHECK_THROWS_AS(load_png("/nonexistent/file.png"), EnvError);
}
