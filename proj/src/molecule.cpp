#include "origami/molecule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <tuple>

#include "json.hpp"

namespace origami {

namespace {

constexpr double kSpikeGuard = 1e-12;  // 1 + n_in . n_out below this: edges fold back
constexpr double kConvexTol = 1e-7;

std::string depth_text(double depth) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", depth);
    return buf;
}

std::size_t prev_index(std::size_t i, std::size_t n) { return i == 0 ? n - 1 : i - 1; }
std::size_t next_index(std::size_t i, std::size_t n) { return i + 1 == n ? 0 : i + 1; }

double polygon_area2(const std::vector<Vec2>& pts) {
    double a = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[next_index(i, pts.size())]);
    return a;
}

double polygon_perimeter(const std::vector<Vec2>& pts) {
    double p = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) p += distance(pts[i], pts[next_index(i, pts.size())]);
    return p;
}

}  // namespace

std::string_view tree_metric_name(TreeMetric m) {
    return m == TreeMetric::fixed ? "fixed" : "lang-reduced";
}

std::optional<TreeMetric> parse_tree_metric(std::string_view name) {
    if (name == "fixed") return TreeMetric::fixed;
    if (name == "lang-reduced") return TreeMetric::lang_reduced;
    return std::nullopt;
}

std::string_view event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::contraction: return "contraction";
        case EventKind::split: return "split";
        case EventKind::terminal: return "terminal";
    }
    return "?";
}

ShrinkConfig ShrinkConfig::resolved(const LangPolygon& poly) const {
    ShrinkConfig out = *this;
    const auto pts = poly.positions();
    if (pts.size() < 3) throw GeometryError("shrink needs a polygon with at least three vertices");
    double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
    for (const auto& p : pts) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    if (out.th == 0.0) out.th = 1e-6 * std::hypot(maxx - minx, maxy - miny);
    if (out.step == 0.0) out.step = polygon_perimeter(pts) / 2000.0;
    if (out.max_events == 0) out.max_events = 8 * pts.size();
    if (!(out.th > 0.0) || !std::isfinite(out.th)) throw ConfigError("shrink: th must be positive");
    if (!(out.step > 0.0) || !std::isfinite(out.step))
        throw ConfigError("shrink: step must be positive");
    if (!(out.refine_tol > 0.0)) throw ConfigError("shrink: refine_tol must be positive");
    if (!(out.refine_tol < out.th))
        throw ConfigError("shrink: refine_tol must be smaller than th");
    return out;
}

std::vector<Vec2> ActivePolygon::positions() const {
    std::vector<Vec2> out;
    out.reserve(vertices.size());
    for (const auto& v : vertices) out.push_back(v.position);
    return out;
}

std::vector<NodeId> ActivePolygon::leaf_set() const {
    std::vector<NodeId> out;
    for (const auto& v : vertices)
        for (const auto& l : v.leaves) out.push_back(l.leaf);
    std::sort(out.begin(), out.end());
    return out;
}

void update_kinematics(ActivePolygon& poly, std::size_t i) {
    const std::size_t n = poly.size();
    const Vec2 n_in = perp(poly.edge_dirs[prev_index(i, n)]) * poly.orient;
    const Vec2 n_out = perp(poly.edge_dirs[i]) * poly.orient;
    const double denom = std::max(1.0 + dot(n_in, n_out), kSpikeGuard);
    ActiveVertex& v = poly.vertices[i];
    v.velocity = (n_in + n_out) * (1.0 / denom);
    v.rate = std::sqrt(std::max(0.0, dot(v.velocity, v.velocity) - 1.0));
}

int ShrinkRecorder::open_trajectory(int node, Vec2 at, double depth) {
    TrajectoryRecord r;
    r.from_node = node;
    r.start = at;
    r.start_depth = depth;
    r.samples.push_back(at);
    trajectories.push_back(std::move(r));
    return static_cast<int>(trajectories.size()) - 1;
}

void ShrinkRecorder::sample(int trajectory, Vec2 at) {
    if (trajectory >= 0) trajectories[static_cast<std::size_t>(trajectory)].samples.push_back(at);
}

void ShrinkRecorder::close_trajectory(int trajectory, int node, Vec2 at, double depth) {
    if (trajectory < 0) return;
    auto& r = trajectories[static_cast<std::size_t>(trajectory)];
    r.to_node = node;
    r.end = at;
    r.end_depth = depth;
    r.samples.push_back(at);
    builder.add_edge(r.from_node, node, EdgeKind::trajectory);
}

ActivePolygon make_active_polygon(const LangPolygon& lp, ShrinkRecorder& recorder) {
    if (recorder.builder.node_count() != 0)
        throw GeometryError("make_active_polygon needs an empty recorder");
    const std::size_t n = lp.vertices.size();
    if (n < 3) throw GeometryError("shrink needs a polygon with at least three vertices");
    const auto pts = lp.positions();
    const double area2 = polygon_area2(pts);
    if (area2 == 0.0) throw GeometryError("shrink: polygon has zero area");

    ActivePolygon poly;
    poly.orient = area2 > 0.0 ? 1.0 : -1.0;
    NodeId max_leaf = 0;
    for (const auto& v : lp.vertices) max_leaf = std::max(max_leaf, v.leaf);
    auto cycle = std::make_shared<std::vector<int>>(static_cast<std::size_t>(max_leaf) + 1, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const PolygonVertex& pv = lp.vertices[i];
        (*cycle)[static_cast<std::size_t>(pv.leaf)] = static_cast<int>(i);
        const int node = recorder.builder.add_node(pv.position, NodeKind::boundary_leaf);
        ActiveVertex v;
        v.position = pv.position;
        v.leaves = {{pv.leaf, 0.0}};
        v.crease_node = node;
        v.trajectory = recorder.open_trajectory(node, pv.position, 0.0);
        poly.vertices.push_back(std::move(v));
    }
    poly.cycle_index = std::move(cycle);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 d = pts[next_index(i, n)] - pts[i];
        if (norm(d) == 0.0) throw GeometryError("shrink: coincident consecutive vertices");
        poly.edge_dirs.push_back(normalized(d));
        recorder.builder.add_edge(static_cast<int>(i), static_cast<int>(next_index(i, n)),
                                  EdgeKind::boundary);
    }
    for (std::size_t i = 0; i < n; ++i) update_kinematics(poly, i);
    return poly;
}

double edge_length(const ActivePolygon& poly, std::size_t i) {
    const std::size_t j = next_index(i, poly.size());
    return dot(poly.vertices[j].position - poly.vertices[i].position, poly.edge_dirs[i]);
}

ActivePolygon offset_step(const ActivePolygon& poly, double delta, double th,
                          ShrinkRecorder* recorder) {
    if (!(delta >= 0.0)) throw GeometryError("offset step must be non-negative");
    ActivePolygon out = poly;
    out.depth += delta;
    for (auto& v : out.vertices) {
        v.position += v.velocity * delta;
        for (auto& l : v.leaves) l.reduction += v.rate * delta;
        if (recorder != nullptr) recorder->sample(v.trajectory, v.position);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        if (edge_length(out, i) < -th)
            throw GeometryError("offset inverted edge " + std::to_string(i) + " at inset depth " +
                                depth_text(out.depth));
    return out;
}

std::vector<std::size_t> detect_contraction(const ActivePolygon& poly, double th) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < poly.size(); ++i)
        if (edge_length(poly, i) <= th) out.push_back(i);
    return out;
}

SplitCandidate pair_distance(const ActivePolygon& poly, const ShadowTree& tree, std::size_t u,
                             std::size_t v, TreeMetric metric) {
    SplitCandidate c;
    c.i = u;
    c.k = v;
    c.planar = distance(poly.vertices[u].position, poly.vertices[v].position);
    c.tree = std::numeric_limits<double>::infinity();
    for (const auto& a : poly.vertices[u].leaves)
        for (const auto& b : poly.vertices[v].leaves) {
            double d = tree.distance(a.leaf, b.leaf);
            if (metric == TreeMetric::lang_reduced) d -= a.reduction + b.reduction;
            if (d < c.tree) {
                c.tree = d;
                c.leaf_a = a.leaf;
                c.leaf_b = b.leaf;
            }
        }
    return c;
}

namespace {

bool separated(std::size_t i, std::size_t k, std::size_t n) { return k - i >= 2 && n - (k - i) >= 2; }

bool shares_original_edge(const ActivePolygon& poly, std::size_t u, std::size_t v) {
    if (!poly.cycle_index) return false;
    const auto& idx = *poly.cycle_index;
    int p = 0;
    for (int x : idx) p += x >= 0 ? 1 : 0;
    for (const auto& a : poly.vertices[u].leaves)
        for (const auto& b : poly.vertices[v].leaves) {
            const int d = std::abs(idx[static_cast<std::size_t>(a.leaf)] -
                                   idx[static_cast<std::size_t>(b.leaf)]);
            if (d == 1 || d == p - 1) return true;
        }
    return false;
}

}  // namespace

std::vector<SplitCandidate> detect_split(const ActivePolygon& poly, const ShadowTree& tree,
                                         double th, TreeMetric metric) {
    std::vector<SplitCandidate> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 2; k < n; ++k) {
            if (!separated(i, k, n)) continue;
            SplitCandidate c = pair_distance(poly, tree, i, k, metric);
            if (c.planar > c.tree + th) continue;
            if (poly.depth == 0.0 && shares_original_edge(poly, i, k)) continue;
            out.push_back(c);
        }
    return out;
}

namespace {

int node_near(const ShrinkRecorder& rec, int candidate, Vec2 at, double th) {
    if (candidate >= 0 && distance(rec.builder.position(candidate), at) <= th) return candidate;
    return -1;
}

ActivePolygon rotated_left(const ActivePolygon& poly, std::size_t r) {
    ActivePolygon out = poly;
    std::rotate(out.vertices.begin(), out.vertices.begin() + static_cast<std::ptrdiff_t>(r),
                out.vertices.end());
    std::rotate(out.edge_dirs.begin(), out.edge_dirs.begin() + static_cast<std::ptrdiff_t>(r),
                out.edge_dirs.end());
    return out;
}

std::vector<LeafState> merged_leaves(const std::vector<LeafState>& a,
                                     const std::vector<LeafState>& b) {
    std::vector<LeafState> out = a;
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end(),
              [](const LeafState& x, const LeafState& y) { return x.leaf < y.leaf; });
    return out;
}

}  // namespace

ActivePolygon apply_contraction(const ActivePolygon& poly, std::size_t i, double th,
                                ShrinkRecorder& recorder, int* merge_node) {
    const std::size_t n = poly.size();
    if (n < 2 || i >= n) throw GeometryError("contraction index out of range");
    if (edge_length(poly, i) > th)
        throw GeometryError("stale contraction at inset depth " + depth_text(poly.depth) +
                            ": vertices " + std::to_string(i) + " and " +
                            std::to_string(next_index(i, n)) + " have separated");

    ActivePolygon work = i + 1 == n ? rotated_left(poly, 1) : poly;
    const std::size_t a = i + 1 == n ? n - 2 : i;
    const std::size_t b = a + 1;
    ActiveVertex& va = work.vertices[a];
    const ActiveVertex& vb = work.vertices[b];
    const Vec2 mid = (va.position + vb.position) * 0.5;

    int node = node_near(recorder, va.crease_node, mid, th);
    if (node < 0) node = node_near(recorder, vb.crease_node, mid, th);
    if (node < 0) node = recorder.builder.add_node(mid, NodeKind::merge);
    recorder.close_trajectory(va.trajectory, node, va.position, work.depth);
    recorder.close_trajectory(vb.trajectory, node, vb.position, work.depth);

    ActiveVertex merged;
    merged.position = mid;
    merged.leaves = merged_leaves(va.leaves, vb.leaves);
    merged.crease_node = node;
    merged.trajectory = recorder.open_trajectory(node, mid, work.depth);
    va = std::move(merged);
    work.vertices.erase(work.vertices.begin() + static_cast<std::ptrdiff_t>(b));
    work.edge_dirs.erase(work.edge_dirs.begin() + static_cast<std::ptrdiff_t>(a));
    if (work.size() >= 2) update_kinematics(work, a);
    if (merge_node != nullptr) *merge_node = node;
    return work;
}

SplitResult apply_split(const ActivePolygon& poly, const SplitCandidate& split,
                        const ShadowTree& tree, double th, TreeMetric metric,
                        ShrinkRecorder& recorder, int first_id, int second_id) {
    const std::size_t n = poly.size();
    const std::size_t i = split.i, k = split.k;
    if (!(i < k && k < n) || !separated(i, k, n))
        throw GeometryError("split endpoints " + std::to_string(i) + " and " + std::to_string(k) +
                            " are adjacent");
    const SplitCandidate now = pair_distance(poly, tree, i, k, metric);
    if (now.planar > now.tree + th)
        throw GeometryError("split condition does not hold at inset depth " +
                            depth_text(poly.depth));

    const ActiveVertex& vi = poly.vertices[i];
    const ActiveVertex& vk = poly.vertices[k];
    int node_a = node_near(recorder, vi.crease_node, vi.position, th);
    if (node_a < 0) node_a = recorder.builder.add_node(vi.position, NodeKind::merge);
    int node_b = node_near(recorder, vk.crease_node, vk.position, th);
    if (node_b < 0) node_b = recorder.builder.add_node(vk.position, NodeKind::merge);
    recorder.close_trajectory(vi.trajectory, node_a, vi.position, poly.depth);
    recorder.close_trajectory(vk.trajectory, node_b, vk.position, poly.depth);

    // Tree path between the representative leaves, laid along the chord.
    const std::vector<NodeId> path = tree.path(now.leaf_a, now.leaf_b);
    std::vector<double> seg;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) seg.push_back(tree.distance(path[s], path[s + 1]));
    if (metric == TreeMetric::lang_reduced && !seg.empty()) {
        auto reduction_of = [](const ActiveVertex& v, NodeId leaf) {
            for (const auto& l : v.leaves)
                if (l.leaf == leaf) return l.reduction;
            return 0.0;
        };
        seg.front() = std::max(0.0, seg.front() - reduction_of(vi, now.leaf_a));
        seg.back() = std::max(0.0, seg.back() - reduction_of(vk, now.leaf_b));
    }
    double total = 0.0;
    for (double s : seg) total += s;

    SplitResult out;
    int prev = node_a;
    double cum = 0.0;
    for (std::size_t s = 1; s + 1 < path.size(); ++s) {
        cum += seg[s - 1];
        const double f = total > 0.0 ? cum / total : 0.5;
        const Vec2 at = vi.position + (vk.position - vi.position) * f;
        int node = node_near(recorder, prev, at, th);
        if (node < 0 && distance(recorder.builder.position(node_b), at) <= th) node = node_b;
        if (node < 0) node = recorder.builder.add_node(at, NodeKind::split_intermediate);
        recorder.builder.add_edge(prev, node, EdgeKind::split_chord);
        out.intermediates.push_back(path[s]);
        prev = node;
    }
    recorder.builder.add_edge(prev, node_b, EdgeKind::split_chord);

    const Vec2 chord = vk.position - vi.position;
    if (norm(chord) == 0.0) throw GeometryError("split chord has zero length");

    auto child = [&](int id) {
        ActivePolygon c;
        c.id = id;
        c.parent = poly.id;
        c.depth = poly.depth;
        c.orient = poly.orient;
        c.cycle_index = poly.cycle_index;
        return c;
    };
    auto endpoint = [&](const ActiveVertex& v, int node) {
        ActiveVertex e = v;
        e.crease_node = node;
        e.trajectory = recorder.open_trajectory(node, v.position, poly.depth);
        return e;
    };

    out.first = child(first_id);
    out.first.vertices.push_back(endpoint(vi, node_a));
    for (std::size_t s = i + 1; s < k; ++s) out.first.vertices.push_back(poly.vertices[s]);
    out.first.vertices.push_back(endpoint(vk, node_b));
    for (std::size_t s = i; s < k; ++s) out.first.edge_dirs.push_back(poly.edge_dirs[s]);
    out.first.edge_dirs.push_back(normalized(-chord));
    update_kinematics(out.first, 0);
    update_kinematics(out.first, out.first.size() - 1);

    out.second = child(second_id);
    out.second.vertices.push_back(endpoint(vk, node_b));
    for (std::size_t s = k + 1; s < n; ++s) out.second.vertices.push_back(poly.vertices[s]);
    for (std::size_t s = 0; s < i; ++s) out.second.vertices.push_back(poly.vertices[s]);
    out.second.vertices.push_back(endpoint(vi, node_a));
    for (std::size_t s = k; s < n; ++s) out.second.edge_dirs.push_back(poly.edge_dirs[s]);
    for (std::size_t s = 0; s < i; ++s) out.second.edge_dirs.push_back(poly.edge_dirs[s]);
    out.second.edge_dirs.push_back(normalized(chord));
    update_kinematics(out.second, 0);
    update_kinematics(out.second, out.second.size() - 1);
    return out;
}

namespace {

// Kinematic snapshot of one polygon: everything is linear in t = depth - poly.depth
// except planar distances.
struct PairTrack {
    std::size_t i, k;
    Vec2 dp, dv;
    double d0, slope;
    NodeId leaf_a, leaf_b;

    double planar(double t) const { return norm(dp + dv * t); }
    double slack(double t, double th) const { return planar(t) - (d0 + slope * t) - th; }
    double slack_rate(double t) const {
        const Vec2 r = dp + dv * t;
        const double len = norm(r);
        return (len > 0.0 ? dot(r, dv) / len : 0.0) - slope;
    }
};

struct EdgeTrack {
    std::size_t i;
    double l0, rate;
    double length(double t) const { return l0 + rate * t; }
};

template <class Cond>
double bisect(double lo, double hi, double tol, Cond holds) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (holds(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

// First t in (a, b] where the convex slack function reaches zero, if any.
std::optional<double> split_crossing(const PairTrack& p, double a, double b, double th,
                                     double tol) {
    auto holds = [&](double t) { return p.slack(t, th) <= 0.0; };
    if (holds(b)) return bisect(a, b, tol, holds);
    if (p.slack_rate(a) < 0.0 && p.slack_rate(b) > 0.0) {
        const double tm = bisect(a, b, tol * 1e-3, [&](double t) { return p.slack_rate(t) >= 0.0; });
        if (holds(tm)) return bisect(a, tm, tol, holds);
    }
    return std::nullopt;
}

}  // namespace

PendingEvent next_event(const ActivePolygon& poly, const ShadowTree& tree, const ShrinkConfig& cfg) {
    const std::size_t n = poly.size();
    PendingEvent ev;
    ev.depth = poly.depth;
    if (n <= 2) return ev;  // terminal

    // Contractions already within th.
    const auto ready = detect_contraction(poly, cfg.th);
    if (!ready.empty()) {
        if (ready.size() + 2 >= n) return ev;
        ev.kind = EventKind::contraction;
        ev.i = ready.front();
        return ev;
    }

    // Collapsed or folded-back polygons end here.
    const auto pts = poly.positions();
    if (std::abs(polygon_area2(pts)) / polygon_perimeter(pts) <= cfg.th) return ev;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = perp(poly.edge_dirs[prev_index(i, n)]), b = perp(poly.edge_dirs[i]);
        if (1.0 + dot(a, b) <= kSpikeGuard) return ev;
    }

    const auto immediate = detect_split(poly, tree, cfg.th, cfg.metric);
    if (!immediate.empty()) {
        ev.kind = EventKind::split;
        ev.split = immediate.front();
        ev.i = ev.split.i;
        return ev;
    }

    std::vector<EdgeTrack> edges;
    double horizon = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = next_index(i, n);
        EdgeTrack e{i, edge_length(poly, i),
                    dot(poly.vertices[j].velocity - poly.vertices[i].velocity, poly.edge_dirs[i])};
        if (e.rate < 0.0) horizon = std::min(horizon, (e.l0 - cfg.th) / -e.rate);
        edges.push_back(e);
    }
    if (!std::isfinite(horizon))
        throw GeometryError("no edge shrinks at inset depth " + depth_text(poly.depth));

    std::vector<PairTrack> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 2; k < n; ++k) {
            if (!separated(i, k, n)) continue;
            const SplitCandidate c = pair_distance(poly, tree, i, k, cfg.metric);
            const ActiveVertex& vi = poly.vertices[i];
            const ActiveVertex& vk = poly.vertices[k];
            const double slope =
                cfg.metric == TreeMetric::lang_reduced ? -(vi.rate + vk.rate) : 0.0;
            pairs.push_back({i, k, vk.position - vi.position, vk.velocity - vi.velocity, c.tree,
                             slope, c.leaf_a, c.leaf_b});
        }

    struct Hit {
        double t;
        bool contraction;
        std::size_t i, k;
        const PairTrack* pair;
    };
    for (double a = 0.0; a <= horizon + cfg.step; a += cfg.step) {
        const double b = a + cfg.step;
        std::vector<Hit> hits;
        for (const auto& e : edges)
            if (e.length(b) <= cfg.th)
                hits.push_back({bisect(a, b, cfg.refine_tol,
                                       [&](double t) { return e.length(t) <= cfg.th; }),
                                true, e.i, 0, nullptr});
        // The stepped search looks for the exact crossing d_P = d_T; the th slack
        // only applies to pairs that are already ready when a polygon is born.
        // A constant slack would fire spurious splits as every distance
        // shrinks towards zero near collapse.
        for (const auto& p : pairs)
            if (auto t = split_crossing(p, a, b, 0.0, cfg.refine_tol))
                hits.push_back({*t, false, p.i, p.k, &p});
        if (hits.empty()) continue;

        double first = hits.front().t;
        for (const auto& h : hits) first = std::min(first, h.t);
        std::vector<Hit> now;
        for (const auto& h : hits)
            if (h.t - first <= cfg.refine_tol) now.push_back(h);
        std::sort(now.begin(), now.end(), [](const Hit& x, const Hit& y) {
            if (x.contraction != y.contraction) return x.contraction;
            return std::tie(x.i, x.k) < std::tie(y.i, y.k);
        });
        double latest = first;
        std::size_t contractions = 0;
        for (const auto& h : now) {
            latest = std::max(latest, h.t);
            contractions += h.contraction ? 1 : 0;
        }
        ev.depth = poly.depth + latest;
        if (contractions > 0) {
            if (contractions + 2 >= n) return ev;  // terminal
            ev.kind = EventKind::contraction;
            ev.i = now.front().i;
            return ev;
        }
        const Hit& h = now.front();
        ev.kind = EventKind::split;
        ev.i = h.i;
        ev.split.i = h.i;
        ev.split.k = h.k;
        ev.split.leaf_a = h.pair->leaf_a;
        ev.split.leaf_b = h.pair->leaf_b;
        ev.split.planar = h.pair->planar(latest);
        ev.split.tree = h.pair->d0 + h.pair->slope * latest;
        return ev;
    }
    throw GeometryError("no event found before collapse at inset depth " + depth_text(poly.depth));
}

namespace {

void check_convex(const ActivePolygon& poly, const std::vector<ShrinkEvent>& log) {
    const std::size_t n = poly.size();
    if (n < 3) return;
    for (std::size_t i = 0; i < n; ++i)
        if (poly.orient * cross(poly.edge_dirs[prev_index(i, n)], poly.edge_dirs[i]) < -kConvexTol)
            throw ShrinkError("convexity violated at inset depth " + depth_text(poly.depth), log);
}

int terminate(const ActivePolygon& poly, double th, ShrinkRecorder& rec) {
    Vec2 c;
    for (const auto& v : poly.vertices) c += v.position;
    c *= 1.0 / static_cast<double>(poly.size());
    int center = -1;
    for (const auto& v : poly.vertices)
        if ((center = node_near(rec, v.crease_node, c, th)) >= 0) break;
    if (center < 0) center = rec.builder.add_node(c, NodeKind::terminal);

    std::vector<int> ridge_ends;
    for (const auto& v : poly.vertices) {
        if (distance(v.position, c) <= th) {
            rec.close_trajectory(v.trajectory, center, v.position, poly.depth);
            continue;
        }
        int end = node_near(rec, v.crease_node, v.position, th);
        for (int r : ridge_ends)
            if (end < 0) end = node_near(rec, r, v.position, th);
        if (end < 0) end = rec.builder.add_node(v.position, NodeKind::merge);
        ridge_ends.push_back(end);
        rec.close_trajectory(v.trajectory, end, v.position, poly.depth);
        rec.builder.add_edge(end, center, EdgeKind::trajectory);
    }
    return center;
}

}  // namespace

ShrinkResult shrink(const LangPolygon& lp, const ShadowTree& tree, const ShrinkConfig& config) {
    ShrinkResult result;
    result.config = config.resolved(lp);
    const ShrinkConfig& cfg = result.config;
    for (const auto& v : lp.vertices)
        if (v.leaf < 0 || !tree.is_leaf(v.leaf) ||
            static_cast<std::size_t>(v.leaf) >= tree.leaf_count())
            throw InputError("polygon vertex names leaf " + std::to_string(v.leaf) +
                             " which is not a tree leaf");

    ShrinkRecorder rec;
    struct Entry {
        ActivePolygon poly;
        PendingEvent next;
    };
    std::map<int, Entry> active;
    int next_id = 1;
    {
        ActivePolygon root = make_active_polygon(lp, rec);
        PendingEvent ev = next_event(root, tree, cfg);
        active.emplace(0, Entry{std::move(root), ev});
    }
    auto& log = result.events;
    auto rank = [](EventKind k) { return k == EventKind::split ? 1 : 0; };
    auto key = [&](const Entry& e) {
        const std::size_t k = e.next.kind == EventKind::split ? e.next.split.k : 0;
        return std::make_tuple(e.next.depth, rank(e.next.kind), e.poly.id, e.next.i, k);
    };
    auto totals = [&](ShrinkEvent& ev) {
        ev.active_polygons = active.size();
        ev.active_vertices = 0;
        for (const auto& [id, e] : active) ev.active_vertices += e.poly.size();
    };

    while (!active.empty()) {
        auto pick = active.begin();
        for (auto it = std::next(active.begin()); it != active.end(); ++it)
            if (key(it->second) < key(pick->second)) pick = it;
        if (log.size() >= cfg.max_events)
            throw ShrinkError("shrink exceeded max_events = " + std::to_string(cfg.max_events), log);

        const PendingEvent pending = pick->second.next;
        ActivePolygon poly = offset_step(pick->second.poly, pending.depth - pick->second.poly.depth,
                                         cfg.th, &rec);
        ShrinkEvent ev;
        ev.kind = pending.kind;
        ev.depth = pending.depth;
        ev.polygon = poly.id;

        switch (pending.kind) {
            case EventKind::contraction: {
                const std::size_t j = next_index(pending.i, poly.size());
                ev.vertices = {pending.i, j};
                for (std::size_t v : ev.vertices)
                    for (const auto& l : poly.vertices[v].leaves) ev.leaves.push_back(l.leaf);
                std::sort(ev.leaves.begin(), ev.leaves.end());
                ActivePolygon next = apply_contraction(poly, pending.i, cfg.th, rec, &ev.crease_node);
                check_convex(next, log);
                PendingEvent upcoming = next_event(next, tree, cfg);
                pick->second = Entry{std::move(next), upcoming};
                break;
            }
            case EventKind::split: {
                ev.vertices = {pending.split.i, pending.split.k};
                for (std::size_t v : ev.vertices)
                    for (const auto& l : poly.vertices[v].leaves) ev.leaves.push_back(l.leaf);
                std::sort(ev.leaves.begin(), ev.leaves.end());
                SplitCandidate cand = pair_distance(poly, tree, pending.split.i, pending.split.k,
                                                    cfg.metric);
                ev.leaf_pair = std::make_pair(cand.leaf_a, cand.leaf_b);
                const int first = next_id++, second = next_id++;
                SplitResult parts = apply_split(poly, cand, tree, cfg.th, cfg.metric, rec, first, second);
                ev.intermediates = parts.intermediates;
                ev.children = {first, second};
                check_convex(parts.first, log);
                check_convex(parts.second, log);
                active.erase(pick);
                for (ActivePolygon* part : {&parts.first, &parts.second}) {
                    PendingEvent upcoming = next_event(*part, tree, cfg);
                    const int id = part->id;
                    active.emplace(id, Entry{std::move(*part), upcoming});
                }
                break;
            }
            case EventKind::terminal: {
                for (std::size_t v = 0; v < poly.size(); ++v) ev.vertices.push_back(v);
                ev.leaves = poly.leaf_set();
                ev.crease_node = terminate(poly, cfg.th, rec);
                active.erase(pick);
                break;
            }
        }
        totals(ev);
        log.push_back(std::move(ev));
    }

    result.pattern = rec.builder.finish();
    result.trajectories = std::move(rec.trajectories);
    return result;
}

std::string events_to_jsonl(const std::vector<ShrinkEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        nlohmann::json j{{"kind", event_kind_name(e.kind)},
                         {"depth", e.depth},
                         {"polygon", e.polygon},
                         {"vertices", e.vertices},
                         {"leaves", e.leaves},
                         {"node", e.crease_node},
                         {"active_polygons", e.active_polygons},
                         {"active_vertices", e.active_vertices}};
        if (e.leaf_pair) {
            j["leaf_pair"] = {e.leaf_pair->first, e.leaf_pair->second};
            j["intermediates"] = e.intermediates;
            j["children"] = e.children;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace origami
