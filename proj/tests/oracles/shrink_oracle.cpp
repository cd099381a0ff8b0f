#include "oracles/shrink_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>

#include "oracles/reference.hpp"

namespace oracle {

using origami::EventKind;
using origami::Vec2;

namespace {

struct Leaf {
    int id;
    double reduction;  // at the polygon's anchor depth
};

struct Vertex {
    Vec2 anchor;  // position at the polygon's anchor depth
    Vec2 vel;
    double rate = 0.0;
    std::vector<Leaf> leaves;
};

struct Poly {
    int id = 0;
    double depth = 0.0;  // anchor depth
    std::vector<Vertex> v;
    std::vector<Vec2> dir;  // unit edge directions, edge j runs v[j] -> v[j+1]
};

struct Pending {
    EventKind kind = EventKind::terminal;
    double depth = 0.0;
    std::size_t i = 0, k = 0;
};

struct Context {
    const OracleConfig& cfg;
    std::vector<std::vector<double>> dist;
    std::vector<int> cycle_pos;  // leaf -> position in the original cycle
    std::size_t leaf_count = 0;
};

Vec2 inward(Vec2 d) { return {-d.y, d.x}; }  // polygons are counter-clockwise (y up)

// Offset speed of the meeting point of two lines moving inward at unit speed:
// n_in . v = 1 and n_out . v = 1.
void solve_vertex(Poly& p, std::size_t j) {
    const std::size_t n = p.v.size();
    const Vec2 a = inward(p.dir[(j + n - 1) % n]);
    const Vec2 b = inward(p.dir[j]);
    const double det = a.x * b.y - a.y * b.x;
    Vertex& vx = p.v[j];
    if (std::abs(det) < 1e-13) {
        vx.vel = a;  // collinear edges: the point slides with the common line
    } else {
        vx.vel = {(b.y - a.y) / det, (a.x - b.x) / det};
    }
    const double along = vx.vel.x * p.dir[j].x + vx.vel.y * p.dir[j].y;
    vx.rate = std::abs(along);
}

Vec2 position(const Poly& p, std::size_t j, double t) {
    return p.v[j].anchor + p.v[j].vel * (t - p.depth);
}

double edge_len(const Poly& p, std::size_t j, double t) {
    const std::size_t n = p.v.size();
    const Vec2 d = position(p, (j + 1) % n, t) - position(p, j, t);
    return d.x * p.dir[j].x + d.y * p.dir[j].y;
}

double tree_gap(const Context& c, const Poly& p, std::size_t i, std::size_t k, double t) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : p.v[i].leaves)
        for (const auto& b : p.v[k].leaves) {
            double d = c.dist[static_cast<std::size_t>(a.id)][static_cast<std::size_t>(b.id)];
            if (c.cfg.metric == origami::TreeMetric::lang_reduced)
                d -= a.reduction + p.v[i].rate * (t - p.depth) + b.reduction + p.v[k].rate * (t - p.depth);
            best = std::min(best, d);
        }
    return best;
}

bool split_holds(const Context& c, const Poly& p, std::size_t i, std::size_t k, double t) {
    const Vec2 d = position(p, k, t) - position(p, i, t);
    return std::sqrt(d.x * d.x + d.y * d.y) <= tree_gap(c, p, i, k, t) + c.cfg.th;
}

// Crossing test of the stepped search: the exact condition d_P <= d_T.
bool split_crossed(const Context& c, const Poly& p, std::size_t i, std::size_t k, double t) {
    const Vec2 d = position(p, k, t) - position(p, i, t);
    return std::sqrt(d.x * d.x + d.y * d.y) <= tree_gap(c, p, i, k, t);
}

bool non_adjacent(std::size_t i, std::size_t k, std::size_t n) { return k - i >= 2 && n - (k - i) >= 2; }

bool original_neighbours(const Context& c, const Poly& p, std::size_t i, std::size_t k) {
    const int total = static_cast<int>(c.leaf_count);
    for (const auto& a : p.v[i].leaves)
        for (const auto& b : p.v[k].leaves) {
            const int d = std::abs(c.cycle_pos[static_cast<std::size_t>(a.id)] -
                                   c.cycle_pos[static_cast<std::size_t>(b.id)]);
            if (d == 1 || d == total - 1) return true;
        }
    return false;
}

// First point of [lo, hi] where `holds` is true, assuming it is false at lo
// and true at hi, to within tol.
template <class F>
double refine(double lo, double hi, double tol, F holds) {
    while (hi - lo > tol) {
        const double h = (hi - lo) / 10.0;
        double next_hi = hi;
        for (int s = 1; s < 10; ++s) {
            const double t = lo + h * s;
            if (holds(t)) {
                next_hi = t;
                break;
            }
        }
        const double next_lo = next_hi - h;
        if (next_hi == hi && next_lo <= lo) break;
        lo = std::max(lo, next_lo);
        hi = next_hi;
    }
    return hi;
}

Pending next_event(const Context& c, const Poly& p) {
    const std::size_t n = p.v.size();
    const double t0 = p.depth;
    Pending ev;
    ev.depth = t0;
    if (n <= 2) return ev;

    std::vector<std::size_t> ready;
    for (std::size_t j = 0; j < n; ++j)
        if (edge_len(p, j, t0) <= c.cfg.th) ready.push_back(j);
    if (!ready.empty()) {
        if (ready.size() + 2 >= n) return ev;
        ev.kind = EventKind::contraction;
        ev.i = ready.front();
        return ev;
    }

    double area2 = 0.0, perimeter = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 a = p.v[j].anchor, b = p.v[(j + 1) % n].anchor;
        area2 += a.x * b.y - a.y * b.x;
        perimeter += std::hypot(b.x - a.x, b.y - a.y);
    }
    if (std::abs(area2) / perimeter <= c.cfg.th) return ev;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 a = inward(p.dir[(j + n - 1) % n]), b = inward(p.dir[j]);
        if (1.0 + a.x * b.x + a.y * b.y <= 1e-12) return ev;
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 2; k < n; ++k) {
            if (!non_adjacent(i, k, n) || !split_holds(c, p, i, k, t0)) continue;
            if (t0 == 0.0 && original_neighbours(c, p, i, k)) continue;
            ev.kind = EventKind::split;
            ev.i = i;
            ev.k = k;
            return ev;
        }

    const double h = c.cfg.step / 100.0;
    const double tol = c.cfg.refine_tol;
    double prev = t0;
    for (long s = 1; s < 50'000'000; ++s) {
        const double t = t0 + h * static_cast<double>(s);
        struct Hit {
            double t;
            bool contraction;
            std::size_t i, k;
        };
        std::vector<Hit> hits;
        for (std::size_t j = 0; j < n; ++j)
            if (edge_len(p, j, t) <= c.cfg.th)
                hits.push_back({refine(prev, t, tol, [&](double x) { return edge_len(p, j, x) <= c.cfg.th; }),
                                true, j, 0});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = i + 2; k < n; ++k)
                if (non_adjacent(i, k, n) && split_crossed(c, p, i, k, t))
                    hits.push_back({refine(prev, t, tol, [&](double x) { return split_crossed(c, p, i, k, x); }),
                                    false, i, k});
        prev = t;
        if (hits.empty()) continue;

        double first = std::numeric_limits<double>::infinity();
        for (const auto& hit : hits) first = std::min(first, hit.t);
        double latest = first;
        std::size_t contractions = 0;
        std::optional<Hit> best_contraction, best_split;
        for (const auto& hit : hits) {
            if (hit.t - first > tol) continue;
            latest = std::max(latest, hit.t);
            if (hit.contraction) {
                ++contractions;
                if (!best_contraction || hit.i < best_contraction->i) best_contraction = hit;
            } else if (!best_split || std::tie(hit.i, hit.k) < std::tie(best_split->i, best_split->k)) {
                best_split = hit;
            }
        }
        ev.depth = latest;
        if (contractions > 0) {
            if (contractions + 2 >= n) return ev;
            ev.kind = EventKind::contraction;
            ev.i = best_contraction->i;
            return ev;
        }
        ev.kind = EventKind::split;
        ev.i = best_split->i;
        ev.k = best_split->k;
        return ev;
    }
    throw std::runtime_error("oracle: no event found");
}

// Re-anchors every vertex at depth t.
Poly advanced(const Poly& p, double t) {
    Poly out = p;
    for (std::size_t j = 0; j < p.v.size(); ++j) {
        out.v[j].anchor = position(p, j, t);
        for (auto& l : out.v[j].leaves) l.reduction += p.v[j].rate * (t - p.depth);
    }
    out.depth = t;
    return out;
}

Vec2 unit(Vec2 d) {
    const double len = std::hypot(d.x, d.y);
    return {d.x / len, d.y / len};
}

}  // namespace

std::vector<OracleEvent> brute_force_shrink(const origami::LangPolygon& lp,
                                            const origami::ShadowTree& tree,
                                            const OracleConfig& cfg) {
    Context c{cfg, floyd_warshall(tree), {}, lp.vertices.size()};
    c.cycle_pos.assign(tree.node_count(), -1);
    Poly root;
    const std::size_t n = lp.vertices.size();
    for (std::size_t j = 0; j < n; ++j) {
        c.cycle_pos[static_cast<std::size_t>(lp.vertices[j].leaf)] = static_cast<int>(j);
        root.v.push_back({lp.vertices[j].position, {}, 0.0, {{lp.vertices[j].leaf, 0.0}}});
    }
    for (std::size_t j = 0; j < n; ++j)
        root.dir.push_back(unit(lp.vertices[(j + 1) % n].position - lp.vertices[j].position));
    for (std::size_t j = 0; j < n; ++j) solve_vertex(root, j);

    std::map<int, std::pair<Poly, Pending>> active;
    active.emplace(0, std::make_pair(root, next_event(c, root)));
    int next_id = 1;
    std::vector<OracleEvent> log;
    auto key = [](const std::pair<const int, std::pair<Poly, Pending>>& e) {
        const Pending& p = e.second.second;
        return std::make_tuple(p.depth, p.kind == EventKind::split ? 1 : 0, e.first, p.i,
                               p.kind == EventKind::split ? p.k : 0);
    };

    while (!active.empty()) {
        if (log.size() >= cfg.max_events) throw std::runtime_error("oracle: too many events");
        auto pick = active.begin();
        for (auto it = std::next(active.begin()); it != active.end(); ++it)
            if (key(*it) < key(*pick)) pick = it;
        const Pending ev = pick->second.second;
        Poly p = advanced(pick->second.first, ev.depth);
        const std::size_t m = p.v.size();
        OracleEvent out{ev.kind, ev.depth, pick->first, ev.i, ev.k, {}};

        if (ev.kind == EventKind::terminal) {
            Vec2 sum;
            for (const auto& v : p.v) sum += v.anchor;
            out.centre = sum * (1.0 / static_cast<double>(m));
            active.erase(pick);
        } else if (ev.kind == EventKind::contraction) {
            const std::size_t a = ev.i, b = (ev.i + 1) % m;
            Vertex merged;
            merged.anchor = (p.v[a].anchor + p.v[b].anchor) * 0.5;
            merged.leaves = p.v[a].leaves;
            merged.leaves.insert(merged.leaves.end(), p.v[b].leaves.begin(), p.v[b].leaves.end());
            std::sort(merged.leaves.begin(), merged.leaves.end(),
                      [](const Leaf& x, const Leaf& y) { return x.id < y.id; });
            Poly q;
            q.depth = p.depth;
            if (b == 0) {
                for (std::size_t j = 1; j + 1 < m; ++j) q.v.push_back(p.v[j]);
                q.v.push_back(merged);
                for (std::size_t j = 1; j + 1 < m; ++j) q.dir.push_back(p.dir[j]);
                q.dir.push_back(p.dir[0]);
            } else {
                for (std::size_t j = 0; j < m; ++j) {
                    if (j == a) q.v.push_back(merged);
                    else if (j != b) q.v.push_back(p.v[j]);
                    if (j != a) q.dir.push_back(p.dir[j]);
                }
            }
            q.id = p.id = pick->first;
            for (std::size_t j = 0; j < q.v.size(); ++j) solve_vertex(q, j);
            pick->second = {q, next_event(c, q)};
        } else {
            const std::size_t i = ev.i, k = ev.k;
            const Vec2 chord = p.v[k].anchor - p.v[i].anchor;
            Poly first, second;
            first.depth = second.depth = p.depth;
            first.id = next_id++;
            second.id = next_id++;
            for (std::size_t j = i; j <= k; ++j) first.v.push_back(p.v[j]);
            for (std::size_t j = i; j < k; ++j) first.dir.push_back(p.dir[j]);
            first.dir.push_back(unit(chord * -1.0));
            second.v.push_back(p.v[k]);
            for (std::size_t j = k + 1; j < m; ++j) second.v.push_back(p.v[j]);
            for (std::size_t j = 0; j < i; ++j) second.v.push_back(p.v[j]);
            second.v.push_back(p.v[i]);
            for (std::size_t j = k; j < m; ++j) second.dir.push_back(p.dir[j]);
            for (std::size_t j = 0; j < i; ++j) second.dir.push_back(p.dir[j]);
            second.dir.push_back(unit(chord));
            for (Poly* q : {&first, &second}) {
                solve_vertex(*q, 0);
                solve_vertex(*q, q->v.size() - 1);
            }
            active.erase(pick);
            active.emplace(first.id, std::make_pair(first, next_event(c, first)));
            active.emplace(second.id, std::make_pair(second, next_event(c, second)));
        }
        log.push_back(out);
    }
    return log;
}

}  // namespace oracle
