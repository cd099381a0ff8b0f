#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "oracles/reference.hpp"
#include "origami/lang_polygon.hpp"
#include "origami/landmarks.hpp"
#include "origami/molecule.hpp"
#include "origami/shadow_tree.hpp"
#include "origami/synthetic.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) {
    return std::string(ORIGAMI_SOURCE_DIR) + "/" + rel;
}

// Regular polygon around the origin whose adjacent chords equal the star's
// leaf-to-leaf tree distance, counter-clockwise in leaf-cycle order.
inline origami::LangPolygon regular_star_polygon(const origami::ShadowTree& star, double leg) {
    const auto cycle = origami::leaf_cycle(star);
    const int p = static_cast<int>(cycle.size());
    const double pi = 3.14159265358979323846;
    const double radius = leg / std::sin(pi / p);
    origami::LangPolygon poly;
    for (int j = 0; j < p; ++j) {
        const double a = 2.0 * pi * j / p;
        poly.vertices.push_back({cycle[static_cast<std::size_t>(j)], {radius * std::cos(a), radius * std::sin(a)}});
    }
    poly.width = poly.height = 2.0 * radius;
    return poly;
}

// Shadow tree of the canonical face under the shipped topology.
inline origami::ShadowTree canonical_tree() {
    const auto frame = origami::normalize_to_nose(origami::canonical_face(2));
    return origami::build_shadow_tree(frame, origami::default_topology());
}

inline double point_segment_distance(origami::Vec2 p, origami::Vec2 a, origami::Vec2 b) {
    const origami::Vec2 ab = b - a;
    const double len2 = origami::dot(ab, ab);
    if (len2 == 0.0) return origami::distance(p, a);
    const double t = std::clamp(origami::dot(p - a, ab) / len2, 0.0, 1.0);
    return origami::distance(p, a + ab * t);
}

}  // namespace testing
