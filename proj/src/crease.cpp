#include "origami/crease.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include "json.hpp"

#include "origami/error.hpp"

namespace origami {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, 4> kNodeKinds{"boundary-leaf", "merge",
                                                     "split-intermediate", "terminal"};
constexpr std::array<std::string_view, 3> kEdgeKinds{"boundary", "trajectory", "split-chord"};
constexpr std::string_view kSchema = "origami-crease-pattern/1";
}  // namespace

std::string_view node_kind_name(NodeKind k) { return kNodeKinds[static_cast<std::size_t>(k)]; }
std::string_view edge_kind_name(EdgeKind k) { return kEdgeKinds[static_cast<std::size_t>(k)]; }

void CreasePattern::canonicalize() {
    std::sort(nodes.begin(), nodes.end(),
              [](const CreaseNode& a, const CreaseNode& b) { return a.id < b.id; });
    for (auto& e : edges)
        if (e.a > e.b) std::swap(e.a, e.b);
    std::sort(edges.begin(), edges.end(), [](const CreaseEdge& a, const CreaseEdge& b) {
        return std::pair(a.a, a.b) < std::pair(b.a, b.b);
    });
}

const CreaseNode* CreasePattern::find_node(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const CreaseNode& n, int v) { return n.id < v; });
    if (it != nodes.end() && it->id == id) return &*it;
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

bool is_connected(const CreasePattern& pattern) {
    if (pattern.nodes.empty()) return true;
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < pattern.nodes.size(); ++i) index[pattern.nodes[i].id] = i;
    std::vector<std::vector<std::size_t>> adj(pattern.nodes.size());
    for (const auto& e : pattern.edges) {
        const auto ia = index.find(e.a), ib = index.find(e.b);
        if (ia == index.end() || ib == index.end()) return false;
        adj[ia->second].push_back(ib->second);
        adj[ib->second].push_back(ia->second);
    }
    std::vector<char> seen(pattern.nodes.size(), 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t w : adj[u])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                queue.push_back(w);
            }
    }
    return count == pattern.nodes.size();
}

void validate_pattern(const CreasePattern& pattern) {
    std::set<int> ids;
    for (std::size_t i = 0; i < pattern.nodes.size(); ++i) {
        const auto& n = pattern.nodes[i];
        if (!ids.insert(n.id).second)
            throw InputError("/nodes/" + std::to_string(i) + ": duplicate node id " +
                             std::to_string(n.id));
        if (!std::isfinite(n.x) || !std::isfinite(n.y))
            throw InputError("/nodes/" + std::to_string(i) + ": non-finite coordinate");
    }
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < pattern.edges.size(); ++i) {
        const auto& e = pattern.edges[i];
        const std::string where = "/edges/" + std::to_string(i);
        if (!ids.count(e.a) || !ids.count(e.b))
            throw InputError(where + ": edge (" + std::to_string(e.a) + ", " +
                             std::to_string(e.b) + ") references an unknown node");
        if (e.a == e.b) throw InputError(where + ": self-loop on node " + std::to_string(e.a));
        if (!seen.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second)
            throw InputError(where + ": duplicate edge (" + std::to_string(std::min(e.a, e.b)) +
                             ", " + std::to_string(std::max(e.a, e.b)) + ")");
    }
    if (!is_connected(pattern)) throw InputError("crease pattern graph is not connected");
}

namespace {

// Crossing point of two segments whose endpoints lie strictly on opposite
// sides of the other segment's line, each by more than tol. Collinear and
// nearly collinear pairs never count as crossing.
bool segments_cross(Vec2 p, Vec2 p2, Vec2 q, Vec2 q2, double tol, Vec2& at) {
    const Vec2 r = p2 - p, s = q2 - q;
    const double lr = norm(r), ls = norm(s);
    if (lr == 0.0 || ls == 0.0) return false;
    const double sq = cross(r, q - p) / lr, sq2 = cross(r, q2 - p) / lr;
    const double sp = cross(s, p - q) / ls, sp2 = cross(s, p2 - q) / ls;
    auto straddles = [tol](double u, double v) {
        return (u > tol && v < -tol) || (u < -tol && v > tol);
    };
    if (!straddles(sq, sq2) || !straddles(sp, sp2)) return false;
    at = p + r * (sp / (sp - sp2));
    return true;
}

}  // namespace

std::vector<CrossingEdges> find_crossings(const CreasePattern& pattern, double tol) {
    std::map<int, Vec2> pos;
    for (const auto& n : pattern.nodes) pos[n.id] = n.position();
    std::vector<CrossingEdges> out;
    const auto& E = pattern.edges;
    for (std::size_t i = 0; i < E.size(); ++i) {
        const Vec2 a = pos.at(E[i].a), b = pos.at(E[i].b);
        for (std::size_t j = i + 1; j < E.size(); ++j) {
            if (E[j].a == E[i].a || E[j].a == E[i].b || E[j].b == E[i].a || E[j].b == E[i].b)
                continue;
            const Vec2 c = pos.at(E[j].a), d = pos.at(E[j].b);
            Vec2 at;
            if (!segments_cross(a, b, c, d, tol, at)) continue;
            const double near = std::min({distance(at, a), distance(at, b), distance(at, c),
                                          distance(at, d)});
            if (near > tol) out.push_back({E[i], E[j]});
        }
    }
    return out;
}

int CreaseBuilder::add_node(Vec2 p, NodeKind kind) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({id, p.x, p.y, kind});
    return id;
}

bool CreaseBuilder::add_edge(int a, int b, EdgeKind kind) {
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    if (!edge_set_.insert({a, b}).second) return false;
    edges_.push_back({a, b, kind});
    return true;
}

CreasePattern CreaseBuilder::finish() const {
    CreasePattern p;
    p.nodes = nodes_;
    p.edges = edges_;
    p.canonicalize();
    return p;
}

ComplexEncoding encode_complex(const CreasePattern& pattern) {
    CreasePattern p = pattern;
    p.canonicalize();
    ComplexEncoding enc;
    for (const auto& n : p.nodes) {
        enc.node_ids.push_back(n.id);
        enc.nodes.emplace_back(n.x, n.y);
    }
    for (const auto& e : p.edges)
        enc.edges.emplace_back(static_cast<double>(e.a), static_cast<double>(e.b));
    return enc;
}

CreasePattern decode_complex(const ComplexEncoding& enc) {
    if (enc.node_ids.size() != enc.nodes.size())
        throw InputError("complex encoding: node id and value counts differ");
    CreasePattern p;
    for (std::size_t i = 0; i < enc.nodes.size(); ++i)
        p.nodes.push_back({enc.node_ids[i], enc.nodes[i].real(), enc.nodes[i].imag(),
                           NodeKind::merge});
    for (const auto& e : enc.edges) {
        const double a = e.real(), b = e.imag();
        if (a != std::floor(a) || b != std::floor(b))
            throw InputError("complex encoding: edge code with non-integer node ids");
        p.edges.push_back({static_cast<int>(a), static_cast<int>(b), EdgeKind::trajectory});
    }
    p.canonicalize();
    return p;
}

std::string serialize_pattern(const CreasePattern& pattern) {
    CreasePattern p = pattern;
    p.canonicalize();
    json nodes = json::array();
    for (const auto& n : p.nodes)
        nodes.push_back({{"id", n.id}, {"kind", node_kind_name(n.kind)}, {"x", n.x}, {"y", n.y}});
    json edges = json::array();
    for (const auto& e : p.edges)
        edges.push_back({{"a", e.a}, {"b", e.b}, {"kind", edge_kind_name(e.kind)}});
    json doc{{"schema", kSchema},
             {"nodes", std::move(nodes)},
             {"edges", std::move(edges)},
             {"provenance", p.provenance}};
    return doc.dump(1) + "\n";
}

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw InputError(where + ": expected an object");
    if (!obj.contains(key)) throw InputError(where + "/" + key + ": missing");
    return obj.at(key);
}

double number_at(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) throw InputError(where + "/" + key + ": expected a number");
    return v.get<double>();
}

int int_at(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number_integer()) throw InputError(where + "/" + key + ": expected an integer");
    return v.get<int>();
}

template <std::size_t N>
std::size_t kind_at(const json& obj, const std::array<std::string_view, N>& names,
                    const std::string& where) {
    const json& v = field(obj, "kind", where);
    if (!v.is_string()) throw InputError(where + "/kind: expected a string");
    const auto s = v.get<std::string>();
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return i;
    throw InputError(where + "/kind: unknown kind '" + s + "'");
}

}  // namespace

CreasePattern deserialize_pattern(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed crease pattern JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("/: expected an object");
    if (doc.contains("schema") && doc.at("schema") != kSchema)
        throw InputError("/schema: unsupported schema");
    CreasePattern p;
    const json& nodes = field(doc, "nodes", "");
    if (!nodes.is_array()) throw InputError("/nodes: expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "/nodes/" + std::to_string(i);
        p.nodes.push_back({int_at(nodes[i], "id", where), number_at(nodes[i], "x", where),
                           number_at(nodes[i], "y", where),
                           static_cast<NodeKind>(kind_at(nodes[i], kNodeKinds, where))});
    }
    const json& edges = field(doc, "edges", "");
    if (!edges.is_array()) throw InputError("/edges: expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string where = "/edges/" + std::to_string(i);
        p.edges.push_back({int_at(edges[i], "a", where), int_at(edges[i], "b", where),
                           static_cast<EdgeKind>(kind_at(edges[i], kEdgeKinds, where))});
    }
    if (doc.contains("provenance")) {
        const json& prov = doc.at("provenance");
        if (!prov.is_object()) throw InputError("/provenance: expected an object");
        for (const auto& [k, v] : prov.items()) {
            if (!v.is_string()) throw InputError("/provenance/" + k + ": expected a string");
            p.provenance[k] = v.get<std::string>();
        }
    }
    validate_pattern(p);
    p.canonicalize();
    return p;
}

SvgStyle svg_style_preset(std::string_view name) {
    SvgStyle s;
    if (name == "default") return s;
    if (name == "mono") {
        for (auto& [k, c] : s.edge_colors) c = "#000000";
        for (auto& [k, c] : s.node_colors) c = "#000000";
        return s;
    }
    if (name == "kind-contrast") {
        s.node_colors = {{NodeKind::boundary_leaf, "#e41a1c"},
                         {NodeKind::merge, "#377eb8"},
                         {NodeKind::split_intermediate, "#4daf4a"},
                         {NodeKind::terminal, "#984ea3"}};
        return s;
    }
    throw ConfigError("unknown SVG colour map '" + std::string(name) + "'");
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string to_svg(const CreasePattern& pattern, const SvgStyle& style) {
    CreasePattern p = pattern;
    p.canonicalize();
    double minx = 0, miny = 0, maxx = 0, maxy = 0;
    if (!p.nodes.empty()) {
        minx = maxx = p.nodes.front().x;
        miny = maxy = p.nodes.front().y;
        for (const auto& n : p.nodes) {
            minx = std::min(minx, n.x);
            maxx = std::max(maxx, n.x);
            miny = std::min(miny, n.y);
            maxy = std::max(maxy, n.y);
        }
    }
    double w = maxx - minx, h = maxy - miny;
    if (w <= 0.0) w = 1.0;
    if (h <= 0.0) h = 1.0;
    const double padx = 0.05 * w, pady = 0.05 * h;
    const double vx = minx - padx, vy = miny - pady, vw = w + 2 * padx, vh = h + 2 * pady;
    const double big = std::max(vw, vh);
    const double r = style.node_radius > 0 ? style.node_radius : 0.006 * big;
    const double sw = style.stroke_width > 0 ? style.stroke_width : 0.0025 * big;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" + fmt(vx) +
           " " + fmt(vy) + " " + fmt(vw) + " " + fmt(vh) + "\">\n";
    out += "<g id=\"edges\" stroke-width=\"" + fmt(sw) + "\" stroke-linecap=\"round\">\n";
    for (const auto& e : p.edges) {
        const CreaseNode* a = p.find_node(e.a);
        const CreaseNode* b = p.find_node(e.b);
        if (a == nullptr || b == nullptr) throw InputError("SVG: edge references unknown node");
        out += "<line class=\"" + std::string(edge_kind_name(e.kind)) + "\" x1=\"" + fmt(a->x) +
               "\" y1=\"" + fmt(a->y) + "\" x2=\"" + fmt(b->x) + "\" y2=\"" + fmt(b->y) +
               "\" stroke=\"" + style.edge_colors.at(e.kind) + "\"/>\n";
    }
    out += "</g>\n";
    if (style.draw_nodes) {
        out += "<g id=\"nodes\">\n";
        for (const auto& n : p.nodes)
            out += "<circle class=\"" + std::string(node_kind_name(n.kind)) + "\" cx=\"" +
                   fmt(n.x) + "\" cy=\"" + fmt(n.y) + "\" r=\"" + fmt(r) + "\" fill=\"" +
                   style.node_colors.at(n.kind) + "\"/>\n";
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace origami
