#include "capkit/caption.hpp"
#include "capkit/caption_io.hpp"
#include "capkit/edit.hpp"
#include "capkit/enrich.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "test_util.hpp"

using namespace capkit;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* kMinimalDoc = R"({
  "scene": "a fire hydrant on a sidewalk",
  "objects": [
    {
      "id": "hydrant",
      "description": "a fire hydrant",
      "box": [0.25, 0.25, 0.75, 0.75],
      "colors": [[204, 1, 1]]
    }
  ]
})";

}  // namespace

TEST_CASE("parse_caption maps fields directly") {
    const StructuredCaption c = parse_caption(kMinimalDoc);
    REQUIRE(c.objects.size() == 1);
    CHECK(c.scene == "a fire hydrant on a sidewalk");
    CHECK(c.objects[0].id == "hydrant");
    REQUIRE(c.objects[0].box.has_value());
    CHECK(c.objects[0].box->x0 == 0.25);
    CHECK(c.objects[0].box->y0 == 0.25);
    CHECK(c.objects[0].box->x1 == 0.75);
    CHECK(c.objects[0].box->y1 == 0.75);
    REQUIRE(c.objects[0].colors.size() == 1);
    CHECK(c.objects[0].colors[0] == RgbColor{204, 1, 1});
}

TEST_CASE("percent coordinates normalize to the unit square") {
    const char* doc = R"({
  "scene": "s",
  "coords": "percent",
  "objects": [
    {"id": "a", "description": "d", "box": [25, 25, 75, 75], "colors": [[204, 1, 1]]}
  ]
})";
    const StructuredCaption expected = parse_caption(kMinimalDoc);

    SECTION("explicit coords key") {
        const StructuredCaption c = parse_caption(doc);
        CHECK(*c.objects[0].box == *expected.objects[0].box);
    }
    SECTION("auto-detection from coordinates above 1") {
        const char* bare = R"({
  "scene": "s",
  "objects": [{"id": "a", "description": "d", "box": [25, 25, 75, 75]}]
})";
        const StructuredCaption c = parse_caption(bare);
        CHECK(*c.objects[0].box == *expected.objects[0].box);
    }
    SECTION("caller override wins") {
        const char* unit_doc = R"({
  "scene": "s",
  "objects": [{"id": "a", "description": "d", "box": [0.25, 0.25, 0.75, 0.75]}]
})";
        const StructuredCaption c = parse_caption(unit_doc, CoordDetect::percent);
        CHECK_THAT(c.objects[0].box->x1, Catch::Matchers::WithinAbs(0.0075, 1e-12));
    }
}

TEST_CASE("parse rejects bad documents with the offending path") {
    SECTION("degenerate box") {
        const char* doc = R"({
  "scene": "s",
  "objects": [{"id": "a", "description": "d", "box": [0.5, 0.2, 0.4, 0.9]}]
})";
        CHECK_THROWS_WITH(parse_caption(doc), ContainsSubstring("x1 <= x0") &&
                                                  ContainsSubstring("objects[0].box"));
    }
    SECTION("missing required field") {
        CHECK_THROWS_WITH(parse_caption(R"({"objects": []})"),
                          ContainsSubstring("missing required field \"scene\""));
        CHECK_THROWS_WITH(parse_caption(R"({"scene": "s", "objects": [{"id": "a"}]})"),
                          ContainsSubstring("description"));
    }
    SECTION("channel out of range") {
        const char* doc = R"({
  "scene": "s",
  "objects": [{"id": "a", "description": "d", "colors": [[300, 0, 0]]}]
})";
        CHECK_THROWS_WITH(parse_caption(doc), ContainsSubstring("objects[0].colors[0][0]"));
    }
    SECTION("malformed JSON") {
        CHECK_THROWS_WITH(parse_caption("{nope"), ContainsSubstring("malformed"));
    }
    SECTION("unknown keys are rejected") {
        CHECK_THROWS_WITH(parse_caption(R"({"scene": "s", "objects": [], "stuff": 1})"),
                          ContainsSubstring("unknown field \"stuff\""));
    }
    SECTION("non-integer channel") {
        const char* doc = R"({
  "scene": "s",
  "objects": [{"id": "a", "description": "d", "colors": [[20.5, 0, 0]]}]
})";
        CHECK_THROWS_WITH(parse_caption(doc), ContainsSubstring("integer"));
    }
}

TEST_CASE("validate_caption reports violations as values") {
    StructuredCaption c = parse_caption(kMinimalDoc);
    CHECK(validate_caption(c).empty());

    SECTION("duplicate ids") {
        c.objects.push_back(c.objects[0]);
        const auto violations = validate_caption(c);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].path == "objects[1].id");
        CHECK_THAT(violations[0].message, ContainsSubstring("hydrant"));
    }
    SECTION("channel out of range") {
        c.objects[0].colors[0].g = 300;
        const auto violations = validate_caption(c);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].path == "objects[0].colors[0][1]");
    }
    SECTION("empty palette") {
        c.palette = ScenePalette{};
        CHECK(validate_caption(c).size() == 1);
    }
    SECTION("negative depth") {
        c.objects[0].depth = -1.0;
        CHECK(validate_caption(c).size() == 1);
    }
}

TEST_CASE("canonical serialization") {
    SECTION("round trip is exact") {
        const StructuredCaption c = parse_caption(kMinimalDoc);
        CHECK(parse_caption(serialize_caption(c)) == c);
    }
    SECTION("serialization is a fixed point") {
        const std::string once = serialize_caption(parse_caption(kMinimalDoc));
        const std::string twice = serialize_caption(parse_caption(once));
        CHECK(once == twice);
    }
    SECTION("percent form prints one decimal, figure style") {
        StructuredCaption c = parse_caption(kMinimalDoc);
        c.objects[0].box = BoundingBox{0.272, 0.363, 0.548, 0.98};
        const std::string doc = serialize_caption(c, CoordForm::percent);
        CHECK_THAT(doc, ContainsSubstring("[27.2, 36.3, 54.8, 98.0]"));
        CHECK_THAT(doc, ContainsSubstring("\"coords\": \"percent\""));
    }
    SECTION("unit form prints four decimals") {
        CHECK_THAT(serialize_caption(parse_caption(kMinimalDoc)),
                   ContainsSubstring("[0.2500, 0.2500, 0.7500, 0.7500]"));
    }
    SECTION("empty object list stays valid") {
        const StructuredCaption c = parse_caption(R"({"scene": "s", "objects": []})");
        CHECK(c.objects.empty());
        CHECK(parse_caption(serialize_caption(c)) == c);
    }
    SECTION("attribute keys serialize sorted") {
        StructuredCaption c = parse_caption(kMinimalDoc);
        c.objects[0].attributes["zeta"] = "1";
        c.objects[0].attributes["alpha"] = "2";
        const std::string doc = serialize_caption(c);
        CHECK(doc.find("alpha") < doc.find("zeta"));
    }
}

TEST_CASE("round trip property over random captions") {
    testutil::Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const StructuredCaption c = testutil::random_caption(rng);
        REQUIRE(validate_caption(c).empty());
        CHECK(parse_caption(serialize_caption(c)) == c);

        // Percent form loses nothing beyond its one-decimal precision.
        const StructuredCaption back = parse_caption(serialize_caption(c, CoordForm::percent));
        for (std::size_t o = 0; o < c.objects.size(); ++o) {
            if (!c.objects[o].box) continue;
            CHECK_THAT(back.objects[o].box->x0,
                       Catch::Matchers::WithinAbs(c.objects[o].box->x0, 5.1e-4));
            CHECK_THAT(back.objects[o].box->y1,
                       Catch::Matchers::WithinAbs(c.objects[o].box->y1, 5.1e-4));
        }
    }
}

TEST_CASE("apply_edit examples") {
    StructuredCaption c = parse_caption(kMinimalDoc);
    ObjectSpec second;
    second.id = "cone";
    second.description = "a traffic cone";
    second.box = BoundingBox{0.1, 0.1, 0.2, 0.3};
    second.colors = {RgbColor{250, 128, 0}};
    c.objects.push_back(second);

    SECTION("swap-boxes exchanges exactly the two boxes") {
        EditOp op;
        op.kind = EditKind::swap_boxes;
        op.target = "hydrant";
        op.target2 = "cone";
        const StructuredCaption out = apply_edit(c, op);
        CHECK(*out.objects[0].box == *c.objects[1].box);
        CHECK(*out.objects[1].box == *c.objects[0].box);
        CHECK(out.objects[0].colors == c.objects[0].colors);
        CHECK(out.scene == c.scene);
    }
    SECTION("set-color changes only that object's colors") {
        EditOp op;
        op.kind = EditKind::set_color;
        op.target = "hydrant";
        op.colors = {RgbColor{212, 106, 140}};
        const StructuredCaption out = apply_edit(c, op);
        CHECK(out.objects[0].colors == op.colors);
        const auto diffs =
            testutil::diff_paths(serialize_caption(c), serialize_caption(out));
        REQUIRE(diffs.size() >= 1);
        for (const std::string& d : diffs) {
            CHECK(testutil::covered_by(d, "objects[0].colors"));
        }
    }
    SECTION("zero-delta move is the identity") {
        EditOp op;
        op.kind = EditKind::move_box;
        op.target = "hydrant";
        op.delta = {0.0, 0.0};
        CHECK(apply_edit(c, op) == c);
        CHECK(serialize_caption(apply_edit(c, op)) == serialize_caption(c));
    }
    SECTION("apply_edit is pure") {
        EditOp op;
        op.kind = EditKind::move_box;
        op.target = "cone";
        op.delta = {0.05, -0.05};
        const StructuredCaption before = c;
        const StructuredCaption out1 = apply_edit(c, op);
        const StructuredCaption out2 = apply_edit(c, op);
        CHECK(c == before);
        CHECK(out1 == out2);
        CHECK(out1 != c);
    }
    SECTION("errors") {
        EditOp op;
        op.kind = EditKind::move_box;
        op.target = "ghost";
        op.delta = {0, 0};
        CHECK_THROWS_WITH(apply_edit(c, op), ContainsSubstring("unknown target id \"ghost\""));

        op.target = "hydrant";
        op.delta = {0.5, 0.0};  // pushes x1 to 1.25
        CHECK_THROWS_WITH(apply_edit(c, op), ContainsSubstring("unit square"));

        EditOp bad_color;
        bad_color.kind = EditKind::set_color;
        bad_color.target = "hydrant";
        bad_color.colors = {RgbColor{256, 0, 0}};
        CHECK_THROWS_WITH(apply_edit(c, bad_color), ContainsSubstring("[0,255]"));

        EditOp empty_colors;
        empty_colors.kind = EditKind::set_color;
        empty_colors.target = "hydrant";
        CHECK_THROWS_WITH(apply_edit(c, empty_colors), ContainsSubstring("empty color list"));
    }
}

TEST_CASE("edit locality property") {
    testutil::Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        const StructuredCaption c = testutil::random_caption(rng);
        const EditOp op = testutil::random_edit(rng, c);
        const StructuredCaption edited = apply_edit(c, op);

        const auto diffs = testutil::diff_paths(serialize_caption(c), serialize_caption(edited));
        const auto allowed = addressed_paths(c, op);
        for (const std::string& d : diffs) {
            bool ok = false;
            for (const std::string& a : allowed) {
                if (testutil::covered_by(d, a)) {
                    ok = true;
                    break;
                }
            }
            CAPTURE(d, edit_kind_name(op.kind), op.target);
            CHECK(ok);
        }
    }
}

TEST_CASE("parse_edit_script") {
    const char* script = R"([
  {"op": "swap-boxes", "ids": ["a", "b"]},
  {"op": "set-color", "id": "a", "colors": [[212, 106, 140]]},
  {"op": "move-box", "id": "b", "delta": [0.1, -0.05]},
  {"op": "resize-box", "id": "a", "box": [0.1, 0.1, 0.4, 0.5]},
  {"op": "set-palette", "colors": [[1, 2, 3], [4, 5, 6]]},
  {"op": "set-attribute", "id": "b", "key": "pose", "value": "sitting"}
])";
    const std::vector<EditOp> ops = parse_edit_script(script);
    REQUIRE(ops.size() == 6);
    CHECK(ops[0].kind == EditKind::swap_boxes);
    CHECK(ops[1].colors[0] == RgbColor{212, 106, 140});
    CHECK(ops[2].delta[1] == -0.05);
    CHECK(ops[3].box->x1 == 0.4);
    CHECK(ops[4].colors.size() == 2);
    CHECK(ops[5].attr_value == "sitting");

    CHECK_THROWS_WITH(parse_edit_script(R"([{"op": "teleport"}])"),
                      ContainsSubstring("unknown edit kind"));
    CHECK_THROWS_WITH(parse_edit_script(R"([{"op": "move-box", "id": "a"}])"),
                      ContainsSubstring("delta"));
}

TEST_CASE("enrich_caption") {
    const char* doc = R"({
  "scene": "s",
  "objects": [
    {"id": "hydrant", "description": "a fire hydrant",
     "attributes": {"location": "bottom right", "color": "red", "pose": "upright"}},
    {"id": "tree", "description": "a tree"}
  ]
})";
    const StructuredCaption base = parse_caption(doc);

    AnnotationBundle bundle;
    bundle.objects["hydrant"] = {BoundingBox{0.6, 0.6, 0.9, 0.95}, {RgbColor{204, 1, 1}}, 2.5};
    bundle.palette = ScenePalette{{RgbColor{204, 1, 1}, RgbColor{34, 120, 40}}};

    SECTION("numeric fields replace semantic wording") {
        const EnrichResult result = enrich_caption(base, bundle);
        const ObjectSpec& obj = result.caption.objects[0];
        CHECK(*obj.box == BoundingBox{0.6, 0.6, 0.9, 0.95});
        CHECK(obj.colors == std::vector<RgbColor>{RgbColor{204, 1, 1}});
        CHECK(obj.depth == 2.5);
        CHECK_FALSE(obj.attributes.count("location"));
        CHECK_FALSE(obj.attributes.count("color"));
        CHECK(obj.attributes.count("pose"));  // non-semantic keys survive
        CHECK(result.caption.palette == bundle.palette);
        CHECK(result.unannotated == std::vector<std::string>{"tree"});
        CHECK(validate_caption(result.caption).empty());
    }
    SECTION("empty bundle is the identity plus a full report") {
        const EnrichResult result = enrich_caption(base, AnnotationBundle{});
        CHECK(result.caption == base);
        CHECK(result.unannotated == std::vector<std::string>{"hydrant", "tree"});
    }
    SECTION("unknown id fails") {
        AnnotationBundle bad = bundle;
        bad.objects["ghost"] = bundle.objects["hydrant"];
        CHECK_THROWS_WITH(enrich_caption(base, bad), ContainsSubstring("\"ghost\""));
    }
    SECTION("invalid annotation box fails") {
        AnnotationBundle bad;
        bad.objects["hydrant"] = {BoundingBox{0.9, 0.6, 0.6, 0.95}, {RgbColor{204, 1, 1}}, {}};
        CHECK_THROWS_WITH(enrich_caption(base, bad), ContainsSubstring("invalid"));
    }
    SECTION("enrich then validate over random captions") {
        testutil::Rng rng(23);
        for (int i = 0; i < 50; ++i) {
            const StructuredCaption c = testutil::random_caption(rng);
            AnnotationBundle b;
            for (const ObjectSpec& obj : c.objects) {
                if (rng.chance(0.7)) {
                    b.objects[obj.id] = {rng.box(), {rng.color()}, rng.quantized(0.0, 5.0)};
                }
            }
            const EnrichResult result = enrich_caption(c, b);
            CHECK(validate_caption(result.caption).empty());
            CHECK(result.unannotated.size() == c.objects.size() - b.objects.size());
        }
    }
}

TEST_CASE("annotation bundle parsing") {
    const char* doc = R"({
  "objects": {
    "hydrant": {"box": [0.6, 0.6, 0.9, 0.95], "colors": [[204, 1, 1]], "depth": 2.5}
  },
  "palette": [[204, 1, 1]]
})";
    const AnnotationBundle bundle = parse_annotation_bundle(doc);
    REQUIRE(bundle.objects.count("hydrant"));
    CHECK(bundle.objects.at("hydrant").depth == 2.5);
    REQUIRE(bundle.palette.has_value());
    CHECK(bundle.palette->colors.size() == 1);

    CHECK_THROWS_WITH(parse_annotation_bundle(R"({"objects": {"a": {}}})"),
                      ContainsSubstring("box"));
}
