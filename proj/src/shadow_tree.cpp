#include "origami/shadow_tree.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include "json.hpp"
#include <set>

#include "default_topology.hpp"
#include "origami/error.hpp"

namespace origami {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, 4> kSideNames{"top", "right", "bottom", "left"};
}

std::string_view side_name(Side s) { return kSideNames[static_cast<std::size_t>(s)]; }

std::optional<Side> parse_side(std::string_view name) {
    for (std::size_t i = 0; i < kSideNames.size(); ++i)
        if (kSideNames[i] == name) return static_cast<Side>(i);
    return std::nullopt;
}

ShadowTree ShadowTree::from_nodes(std::vector<NodeSpec> nodes,
                                  const std::vector<std::pair<int, int>>& edges,
                                  std::string topology_id, std::optional<SideMap> sides) {
    const std::size_t n = nodes.size();
    if (n < 2) throw GeometryError("shadow tree needs at least two nodes");
    if (edges.size() != n - 1)
        throw GeometryError("shadow tree is not a tree: " + std::to_string(edges.size()) +
                            " edges for " + std::to_string(n) + " nodes");

    // Renumber: leaves first (stable), then internals.
    std::vector<int> remap(n, -1);
    ShadowTree t;
    t.topology_id_ = std::move(topology_id);
    t.sides_ = std::move(sides);
    for (std::size_t i = 0; i < n; ++i)
        if (nodes[i].leaf) {
            remap[i] = static_cast<int>(t.nodes_.size());
            t.nodes_.push_back(std::move(nodes[i].node));
        }
    t.leaf_count_ = t.nodes_.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!nodes[i].leaf) {
            remap[i] = static_cast<int>(t.nodes_.size());
            t.nodes_.push_back(std::move(nodes[i].node));
        }

    t.adjacency_.assign(n, {});
    std::set<std::pair<int, int>> seen;
    for (const auto& [ra, rb] : edges) {
        if (ra < 0 || rb < 0 || static_cast<std::size_t>(ra) >= n ||
            static_cast<std::size_t>(rb) >= n)
            throw GeometryError("shadow tree edge references an unknown node");
        const int a = remap[static_cast<std::size_t>(ra)];
        const int b = remap[static_cast<std::size_t>(rb)];
        if (a == b) throw GeometryError("shadow tree edge is a self-loop");
        if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
            throw GeometryError("shadow tree has a duplicate edge");
        const double len = origami::distance(t.nodes_[static_cast<std::size_t>(a)].position,
                                             t.nodes_[static_cast<std::size_t>(b)].position);
        t.edges_.push_back({a, b, len});
        t.adjacency_[static_cast<std::size_t>(a)].push_back(b);
        t.adjacency_[static_cast<std::size_t>(b)].push_back(a);
    }

    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t deg = t.adjacency_[v].size();
        if (v < t.leaf_count_ && deg != 1)
            throw GeometryError("leaf '" + t.nodes_[v].name + "' has degree " +
                                std::to_string(deg));
        if (v >= t.leaf_count_ && deg < 2)
            throw GeometryError("internal node '" + t.nodes_[v].name + "' has degree " +
                                std::to_string(deg));
    }

    // All-pairs distances and next hops by BFS from every node.
    t.dist_.assign(n * n, std::numeric_limits<double>::infinity());
    t.next_hop_.assign(n * n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<int> parent(n, -1);
        std::vector<char> visited(n, 0);
        std::deque<int> queue{static_cast<int>(s)};
        visited[s] = 1;
        t.dist_[s * n + s] = 0.0;
        std::size_t reached = 1;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int w : t.adjacency_[static_cast<std::size_t>(u)]) {
                const auto wi = static_cast<std::size_t>(w);
                if (visited[wi]) continue;
                visited[wi] = 1;
                ++reached;
                parent[wi] = u;
                t.dist_[s * n + wi] =
                    t.dist_[s * n + static_cast<std::size_t>(u)] +
                    origami::distance(t.nodes_[static_cast<std::size_t>(u)].position,
                                      t.nodes_[wi].position);
                queue.push_back(w);
            }
        }
        if (reached != n) throw GeometryError("shadow tree is not connected");
        // Next hop from s towards w is the child of s on the BFS path to w;
        // record the reverse direction: next_hop[w][s] = parent[w].
        for (std::size_t w = 0; w < n; ++w)
            if (w != s) t.next_hop_[w * n + s] = parent[w];
    }
    return t;
}

void ShadowTree::check(NodeId n) const {
    if (n < 0 || static_cast<std::size_t>(n) >= nodes_.size())
        throw InputError("unknown tree node " + std::to_string(n));
}

const TreeNode& ShadowTree::node(NodeId n) const {
    check(n);
    return nodes_[static_cast<std::size_t>(n)];
}

const std::vector<NodeId>& ShadowTree::neighbors(NodeId n) const {
    check(n);
    return adjacency_[static_cast<std::size_t>(n)];
}

double ShadowTree::distance(NodeId a, NodeId b) const {
    check(a);
    check(b);
    return dist_[static_cast<std::size_t>(a) * nodes_.size() + static_cast<std::size_t>(b)];
}

std::vector<NodeId> ShadowTree::path(NodeId a, NodeId b) const {
    check(a);
    check(b);
    std::vector<NodeId> out{a};
    const std::size_t n = nodes_.size();
    while (out.back() != b)
        out.push_back(next_hop_[static_cast<std::size_t>(out.back()) * n +
                                static_cast<std::size_t>(b)]);
    return out;
}

double ShadowTree::total_length() const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.length;
    return s;
}

NodeId ShadowTree::leaf_for_landmark(int landmark_id) const {
    for (std::size_t i = 0; i < leaf_count_; ++i)
        if (nodes_[i].landmark_id == landmark_id) return static_cast<NodeId>(i);
    return -1;
}

// ---------------------------------------------------------------------------
// Topology files

namespace {

TopologyNode parse_topology_node(const json& j, const std::string& where) {
    TopologyNode node;
    if (!j.is_object()) throw InputError(where + ": expected an object");
    if (j.contains("leaf")) {
        node.leaf_id = j.at("leaf").get<int>();
        if (node.leaf_id < 0) throw InputError(where + ": leaf id must be non-negative");
        node.name = "n" + std::to_string(node.leaf_id);
        return node;
    }
    if (!j.contains("name")) throw InputError(where + ": internal node without 'name'");
    node.name = j.at("name").get<std::string>();
    const std::string here = where + "/" + node.name;
    if (!j.contains("centroid_of") || !j.at("centroid_of").is_array() ||
        j.at("centroid_of").empty())
        throw InputError(here + ": 'centroid_of' must be a non-empty id list");
    node.centroid_of = j.at("centroid_of").get<std::vector<int>>();
    if (!j.contains("children") || !j.at("children").is_array() || j.at("children").empty())
        throw InputError(here + ": 'children' must be a non-empty array");
    const json& kids = j.at("children");
    for (std::size_t i = 0; i < kids.size(); ++i)
        node.children.push_back(parse_topology_node(kids[i], here + "/children/" +
                                                                 std::to_string(i)));
    return node;
}

json topology_node_json(const TopologyNode& n) {
    if (n.leaf_id >= 0) return json{{"leaf", n.leaf_id}};
    json kids = json::array();
    for (const auto& c : n.children) kids.push_back(topology_node_json(c));
    return json{{"name", n.name}, {"centroid_of", n.centroid_of}, {"children", kids}};
}

void collect_leaves(const TopologyNode& n, std::vector<int>& out) {
    if (n.leaf_id >= 0) {
        out.push_back(n.leaf_id);
        return;
    }
    for (const auto& c : n.children) collect_leaves(c, out);
}

}  // namespace

std::vector<int> TreeTopology::leaf_ids() const {
    std::vector<int> out;
    collect_leaves(root, out);
    return out;
}

TreeTopology parse_topology(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed topology JSON: ") + e.what());
    }
    TreeTopology topo;
    try {
        topo.name = doc.value("name", std::string("custom"));
        if (!doc.contains("root")) throw InputError("topology: missing 'root'");
        topo.root = parse_topology_node(doc.at("root"), "root");
        if (topo.root.leaf_id >= 0) throw InputError("topology: root must be an internal node");
        if (doc.contains("sides")) {
            for (const auto& [key, regions] : doc.at("sides").items()) {
                const auto side = parse_side(key);
                if (!side) throw InputError("topology: unknown side '" + key + "'");
                for (const auto& r : regions) {
                    const auto region = parse_region(r.get<std::string>());
                    if (!region)
                        throw InputError("topology: unknown region '" + r.get<std::string>() +
                                         "'");
                    topo.sides[*region] = *side;
                }
            }
        }
        if (doc.contains("mirror"))
            for (const auto& pair : doc.at("mirror"))
                topo.mirror.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    } catch (const json::exception& e) {
        throw InputError(std::string("topology JSON schema error: ") + e.what());
    }
    const auto ids = topo.leaf_ids();
    std::set<int> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) throw InputError("topology: a landmark id is listed twice");
    if (ids.size() < 2) throw InputError("topology: fewer than two leaves");
    return topo;
}

std::string serialize_topology(const TreeTopology& topo) {
    json sides = json::object();
    for (const auto& [region, side] : topo.sides)
        sides[std::string(side_name(side))].push_back(region_name(region));
    json mirror = json::array();
    for (const auto& [a, b] : topo.mirror) mirror.push_back({a, b});
    json doc{{"name", topo.name},
             {"root", topology_node_json(topo.root)},
             {"sides", sides},
             {"mirror", mirror}};
    return doc.dump(2) + "\n";
}

std::string_view default_topology_json() { return generated::kDefaultTopologyJson; }

const TreeTopology& default_topology() {
    static const TreeTopology topo = parse_topology(default_topology_json());
    return topo;
}

namespace {

struct Builder {
    const NormalizedFrame& frame;
    std::vector<ShadowTree::NodeSpec> nodes;
    std::vector<std::pair<int, int>> edges;

    const Landmark& landmark(int id) const {
        const Landmark* l = frame.frame().find(id);
        if (l == nullptr)
            throw InputError("topology references landmark " + std::to_string(id) +
                             " missing from the frame");
        return *l;
    }

    int add(const TopologyNode& t) {
        const int me = static_cast<int>(nodes.size());
        ShadowTree::NodeSpec spec;
        if (t.leaf_id >= 0) {
            const Landmark& l = landmark(t.leaf_id);
            spec.leaf = true;
            spec.node.name = t.name;
            spec.node.position = l.position;
            spec.node.landmark_id = l.id;
            spec.node.region = l.region;
            nodes.push_back(std::move(spec));
            return me;
        }
        Vec3 c;
        for (int id : t.centroid_of) c += landmark(id).position;
        spec.node.name = t.name;
        spec.node.position = c * (1.0 / static_cast<double>(t.centroid_of.size()));
        nodes.push_back(std::move(spec));
        for (const auto& child : t.children) {
            const int k = static_cast<int>(nodes.size());
            edges.emplace_back(me, k);
            add(child);
        }
        return me;
    }
};

}  // namespace

ShadowTree build_shadow_tree(const NormalizedFrame& frame, const TreeTopology& topology) {
    Builder b{frame, {}, {}};
    b.add(topology.root);
    std::optional<SideMap> sides;
    if (!topology.sides.empty()) sides = topology.sides;
    return ShadowTree::from_nodes(std::move(b.nodes), b.edges, topology.name, std::move(sides));
}

std::vector<NodeId> leaf_cycle(const ShadowTree& tree) {
    const NodeId start = 0;
    std::vector<NodeId> order{start};
    NodeId prev = start;
    NodeId cur = tree.neighbors(start).front();
    const std::size_t max_steps = 2 * tree.edges().size() + 1;
    for (std::size_t step = 0; step < max_steps; ++step) {
        NodeId next;
        if (tree.is_leaf(cur)) {
            if (cur == start) break;
            order.push_back(cur);
            next = prev;
        } else {
            const auto& rot = tree.neighbors(cur);
            const auto it = std::find(rot.begin(), rot.end(), prev);
            const auto idx = static_cast<std::size_t>(it - rot.begin());
            next = rot[(idx + 1) % rot.size()];
        }
        prev = cur;
        cur = next;
    }
    return order;
}

}  // namespace origami
