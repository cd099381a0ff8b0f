#pragma once

#include <vector>

#include "origami/shadow_tree.hpp"
#include "origami/vec.hpp"

namespace origami {

inline constexpr double kLangTolerance = 1e-9;

struct PolygonVertex {
    NodeId leaf = 0;
    Vec2 position;
};

// Convex doubling-cycle polygon. Vertices follow the leaf cycle, clockwise on
// screen (image coordinates, y down), which is counter-clockwise in the
// usual y-up orientation.
struct LangPolygon {
    std::vector<PolygonVertex> vertices;
    double scale = 1.0;   // uniform factor applied after rectangle placement
    double width = 0.0;   // bounding rectangle, after scaling
    double height = 0.0;

    std::vector<Vec2> positions() const;
};

// Leaves on a rectangle perimeter in leaf-cycle order, with perimeter gaps
// equal to consecutive tree distances. Sides come from the tree's side map
// (top run centred on the top edge) or, without one, a square starting at the
// top midpoint. Throws GeometryError for fewer than three leaves, InputError
// when a leaf's region has no side.
LangPolygon place_on_rectangle(const ShadowTree& tree);

// max over leaf pairs of d_T / d_P. Throws GeometryError on coincident leaves.
double minimal_scale(const LangPolygon& poly, const ShadowTree& tree);

LangPolygon scaled(const LangPolygon& poly, double factor);

// place_on_rectangle followed by a uniform scale of minimal_scale * (1 + margin).
LangPolygon build_lang_polygon(const ShadowTree& tree, double margin = 0.05);

struct LeafPairViolation {
    NodeId a = 0;
    NodeId b = 0;
    double planar = 0.0;
    double tree = 0.0;
};

// Every leaf pair with d_P < d_T - tol. Empty means the polygon satisfies the
// Lang condition. Throws InputError when the polygon's leaves are not exactly
// the tree's leaves.
std::vector<LeafPairViolation> verify_lang_condition(const LangPolygon& poly,
                                                     const ShadowTree& tree,
                                                     double tol = kLangTolerance);

// Signed area (positive for the library's vertex order).
double signed_area(const std::vector<Vec2>& pts);
bool is_convex(const std::vector<Vec2>& pts, double tol = kLangTolerance);

}  // namespace origami
