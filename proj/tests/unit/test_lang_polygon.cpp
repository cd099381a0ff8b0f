#include "doctest.h"
#include "helpers.hpp"
#include "origami/error.hpp"
#include "origami/lang_polygon.hpp"

using namespace origami;

namespace {

std::vector<int> leaves_of(const LangPolygon& p) {
    std::vector<int> out;
    for (const auto& v : p.vertices) out.push_back(v.leaf);
    return out;
}

}  // namespace

TEST_CASE("random trees give convex polygons without Lang violations") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int leaves = 4 + trial % 37;
        CAPTURE(trial);
        const ShadowTree tree = oracle::random_tree(rng, leaves);
        const LangPolygon p = build_lang_polygon(tree);
        REQUIRE(p.vertices.size() == static_cast<std::size_t>(leaves));
        CHECK(leaves_of(p) == leaf_cycle(tree));
        CHECK(signed_area(p.positions()) > 0.0);
        CHECK(is_convex(p.positions()));
        CHECK(oracle::lang_violations(leaves_of(p), p.positions(), oracle::floyd_warshall(tree), 1e-9).empty());
        CHECK(verify_lang_condition(p, tree).empty());
    }
}

TEST_CASE("minimal scale makes the tightest pair exactly feasible") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        const ShadowTree tree = oracle::random_tree(rng, 5 + trial);
        const LangPolygon base = place_on_rectangle(tree);
        const double s = minimal_scale(base, tree);
        const LangPolygon tight = scaled(base, s);
        CHECK(verify_lang_condition(tight, tree, 1e-9).empty());
        const LangPolygon loose = scaled(base, s * 0.99);
        CHECK_FALSE(verify_lang_condition(loose, tree, 1e-9).empty());
        CHECK(tight.scale == doctest::Approx(s));
    }
}

TEST_CASE("rectangle placement keeps perimeter gaps equal to tree distances") {
    std::mt19937_64 rng(33);
    const ShadowTree tree = oracle::random_tree(rng, 9);
    const LangPolygon p = place_on_rectangle(tree);
    double perimeter_walk = 0.0;
    for (std::size_t j = 0; j < p.vertices.size(); ++j)
        perimeter_walk += tree.distance(p.vertices[j].leaf, p.vertices[(j + 1) % p.vertices.size()].leaf);
    CHECK(2.0 * (p.width + p.height) == doctest::Approx(perimeter_walk));
}

TEST_CASE("canonical face polygon") {
    const ShadowTree tree = testing::canonical_tree();
    const LangPolygon p = build_lang_polygon(tree);
    CHECK(p.vertices.size() == 37);
    CHECK(is_convex(p.positions()));
    CHECK(verify_lang_condition(p, tree).empty());
    CHECK(build_lang_polygon(tree, 0.1).scale > p.scale);
}

TEST_CASE("lang polygon errors") {
    const ShadowTree two = ShadowTree::from_nodes(
        {{{"a", {0, 0, 0}, -1, std::nullopt}, true}, {{"b", {1, 0, 0}, -1, std::nullopt}, true}}, {{0, 1}});
    CHECK_THROWS_AS(place_on_rectangle(two), GeometryError);

    const ShadowTree star = oracle::star_tree(4, 1.0);
    LangPolygon p = build_lang_polygon(star);
    p.vertices.pop_back();
    CHECK_THROWS_AS(verify_lang_condition(p, star), InputError);

    LangPolygon dup = build_lang_polygon(star);
    dup.vertices[1].position = dup.vertices[0].position;
    CHECK_THROWS_AS(minimal_scale(dup, star), GeometryError);
}

TEST_CASE("signed area and convexity helpers") {
    const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(signed_area(sq) == doctest::Approx(1.0));
    CHECK(is_convex(sq));
    const std::vector<Vec2> dart{{0, 0}, {2, 0}, {1, 0.3}, {1, 2}};
    CHECK_FALSE(is_convex(dart));
}
