#include "origami/lang_polygon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "origami/error.hpp"
#include "origami/simd.hpp"

namespace origami {

std::vector<Vec2> LangPolygon::positions() const {
    std::vector<Vec2> out;
    out.reserve(vertices.size());
    for (const auto& v : vertices) out.push_back(v.position);
    return out;
}

namespace {

// Point at arc length `a` along the rectangle boundary, starting at the
// top-left corner and running clockwise on screen.
Vec2 point_on_rectangle(double a, double w, double h) {
    const double perimeter = 2.0 * (w + h);
    a = std::fmod(a, perimeter);
    if (a < 0.0) a += perimeter;
    if (a < w) return {-w / 2 + a, -h / 2};
    a -= w;
    if (a < h) return {w / 2, -h / 2 + a};
    a -= h;
    if (a < w) return {w / 2 - a, h / 2};
    a -= w;
    return {-w / 2, h / 2 - a};
}

}  // namespace

LangPolygon place_on_rectangle(const ShadowTree& tree) {
    if (tree.leaf_count() < 3) throw GeometryError("Lang polygon needs at least three leaves");
    const std::vector<NodeId> cycle = leaf_cycle(tree);
    const std::size_t p = cycle.size();

    std::vector<double> gap(p);
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        gap[i] = tree.distance(cycle[i], cycle[(i + 1) % p]);
        total += gap[i];
    }
    if (!(total > 0.0)) throw GeometryError("Lang polygon: all leaves coincide");

    double ratio = 1.0;
    double anchor_arc = 0.0;  // arc position of cycle[anchor]
    std::size_t anchor = 0;
    if (tree.sides()) {
        std::vector<Side> side(p);
        for (std::size_t i = 0; i < p; ++i) {
            const TreeNode& n = tree.node(cycle[i]);
            const auto it = n.region ? tree.sides()->find(*n.region) : tree.sides()->end();
            if (it == tree.sides()->end())
                throw InputError("leaf '" + n.name + "': region " +
                                 (n.region ? std::string(region_name(*n.region)) : "<none>") +
                                 " is mapped to no side");
            side[i] = it->second;
        }
        std::array<double, 4> span{};
        for (std::size_t i = 0; i < p; ++i) {
            const Side a = side[i];
            const Side b = side[(i + 1) % p];
            if (a == b) {
                span[static_cast<std::size_t>(a)] += gap[i];
            } else {
                span[static_cast<std::size_t>(a)] += gap[i] / 2;
                span[static_cast<std::size_t>(b)] += gap[i] / 2;
            }
        }
        const double horizontal = (span[0] + span[2]) / 2;
        const double vertical = (span[1] + span[3]) / 2;
        if (vertical <= 0.0)
            ratio = 4.0;
        else
            ratio = std::clamp(horizontal / vertical, 0.25, 4.0);

        // Centre the first top run on the top edge.
        const auto is_top = [&](std::size_t i) { return side[i % p] == Side::top; };
        std::size_t first = p;
        for (std::size_t i = 0; i < p; ++i)
            if (is_top(i) && !is_top(i + p - 1)) {
                first = i;
                break;
            }
        if (first == p && is_top(0)) first = 0;  // every leaf on top
        if (first != p) {
            double run = gap[(first + p - 1) % p] / 2;  // half gap before the run
            std::size_t i = first;
            for (std::size_t k = 0; k < p && is_top(i + 1) && (i + 1) % p != first; ++k) {
                run += gap[i % p];
                i = (i + 1) % p;
            }
            run += gap[i % p] / 2;
            const double h = total / (2.0 * (1.0 + ratio));
            const double w = ratio * h;
            anchor = first;
            anchor_arc = w / 2 - run / 2 + gap[(first + p - 1) % p] / 2;
        }
    } else {
        const double h = total / 4.0;
        anchor_arc = h / 2;
    }

    const double h = total / (2.0 * (1.0 + ratio));
    const double w = ratio * h;
    LangPolygon poly;
    poly.width = w;
    poly.height = h;
    poly.vertices.resize(p);
    double arc = anchor_arc;
    for (std::size_t k = 0; k < p; ++k) {
        const std::size_t i = (anchor + k) % p;
        poly.vertices[i] = {cycle[i], point_on_rectangle(arc, w, h)};
        arc += gap[i];
    }
    return poly;
}

double minimal_scale(const LangPolygon& poly, const ShadowTree& tree) {
    const std::size_t p = poly.vertices.size();
    std::vector<double> xs(p), ys(p), d(p);
    for (std::size_t i = 0; i < p; ++i) {
        xs[i] = poly.vertices[i].position.x;
        ys[i] = poly.vertices[i].position.y;
    }
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < p; ++i) {
        const std::size_t rest = p - i - 1;
        simd::distances_from({xs.data() + i + 1, rest}, {ys.data() + i + 1, rest},
                             poly.vertices[i].position, {d.data(), rest});
        for (std::size_t k = 0; k < rest; ++k) {
            const std::size_t j = i + 1 + k;
            if (d[k] == 0.0)
                throw GeometryError("coincident leaf placements for leaves " +
                                    std::to_string(poly.vertices[i].leaf) + " and " +
                                    std::to_string(poly.vertices[j].leaf));
            best = std::max(best,
                            tree.distance(poly.vertices[i].leaf, poly.vertices[j].leaf) / d[k]);
        }
    }
    return best;
}

LangPolygon scaled(const LangPolygon& poly, double factor) {
    LangPolygon out = poly;
    for (auto& v : out.vertices) v.position *= factor;
    out.scale *= factor;
    out.width *= factor;
    out.height *= factor;
    return out;
}

LangPolygon build_lang_polygon(const ShadowTree& tree, double margin) {
    if (!(margin >= 0.0)) throw ConfigError("Lang polygon margin must be non-negative");
    const LangPolygon raw = place_on_rectangle(tree);
    return scaled(raw, minimal_scale(raw, tree) * (1.0 + margin));
}

std::vector<LeafPairViolation> verify_lang_condition(const LangPolygon& poly,
                                                     const ShadowTree& tree, double tol) {
    const std::size_t p = poly.vertices.size();
    if (p != tree.leaf_count()) throw InputError("polygon and tree have different leaf counts");
    std::vector<char> seen(p, 0);
    for (const auto& v : poly.vertices) {
        if (!tree.is_leaf(v.leaf) || v.leaf < 0 || seen[static_cast<std::size_t>(v.leaf)])
            throw InputError("polygon vertices do not match the tree leaves");
        seen[static_cast<std::size_t>(v.leaf)] = 1;
    }
    std::vector<double> xs(p), ys(p), d(p);
    for (std::size_t i = 0; i < p; ++i) {
        xs[i] = poly.vertices[i].position.x;
        ys[i] = poly.vertices[i].position.y;
    }
    std::vector<LeafPairViolation> out;
    for (std::size_t i = 0; i + 1 < p; ++i) {
        const std::size_t rest = p - i - 1;
        simd::distances_from({xs.data() + i + 1, rest}, {ys.data() + i + 1, rest},
                             poly.vertices[i].position, {d.data(), rest});
        for (std::size_t k = 0; k < rest; ++k) {
            const std::size_t j = i + 1 + k;
            const double dt = tree.distance(poly.vertices[i].leaf, poly.vertices[j].leaf);
            if (d[k] < dt - tol)
                out.push_back({poly.vertices[i].leaf, poly.vertices[j].leaf, d[k], dt});
        }
    }
    return out;
}

double signed_area(const std::vector<Vec2>& pts) {
    double a = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        a += cross(pts[i], pts[(i + 1) % pts.size()]);
    return a / 2;
}

bool is_convex(const std::vector<Vec2>& pts, double tol) {
    const std::size_t n = pts.size();
    if (n < 3) return false;
    const double orient = signed_area(pts) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e1 = pts[(i + 1) % n] - pts[i];
        const Vec2 e2 = pts[(i + 2) % n] - pts[(i + 1) % n];
        const double l1 = norm(e1), l2 = norm(e2);
        if (l1 == 0.0 || l2 == 0.0) continue;
        if (orient * cross(e1, e2) / (l1 * l2) < -tol) return false;
    }
    return true;
}

}  // namespace origami
