#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "origami/landmarks.hpp"
#include "origami/vec.hpp"

namespace origami {

using NodeId = int;

// Rectangle side a leaf is laid out on, clockwise in image coordinates.
enum class Side { top, right, bottom, left };
std::string_view side_name(Side s);
std::optional<Side> parse_side(std::string_view name);

using SideMap = std::map<Region, Side>;

struct TreeNode {
    std::string name;
    Vec3 position;
    int landmark_id = -1;             // >= 0 for leaves built from landmarks
    std::optional<Region> region;     // leaves built from landmarks
};

struct TreeEdge {
    NodeId a = 0;
    NodeId b = 0;
    double length = 0.0;
};

// Metric tree (T, d). Leaves are numbered 0..p-1 and internal nodes p..p+q-1.
// The order in which edges touch a node defines its rotation, which fixes the
// leaf cycle.
class ShadowTree {
public:
    struct NodeSpec {
        TreeNode node;
        bool leaf = false;
    };

    // Builds and validates a tree. Leaves keep their relative order from
    // `nodes` and move in front of the internal nodes; `edges` index into
    // `nodes`. Edge lengths are the Euclidean distances between endpoints.
    // Throws GeometryError unless the graph is a tree whose degree-1 nodes are
    // exactly the leaves.
    static ShadowTree from_nodes(std::vector<NodeSpec> nodes,
                                 const std::vector<std::pair<int, int>>& edges,
                                 std::string topology_id = "custom",
                                 std::optional<SideMap> sides = std::nullopt);

    std::size_t leaf_count() const { return leaf_count_; }
    std::size_t internal_count() const { return nodes_.size() - leaf_count_; }
    std::size_t node_count() const { return nodes_.size(); }
    bool is_leaf(NodeId n) const { return static_cast<std::size_t>(n) < leaf_count_; }

    const TreeNode& node(NodeId n) const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const std::vector<TreeEdge>& edges() const { return edges_; }
    const std::string& topology_id() const { return topology_id_; }
    const std::optional<SideMap>& sides() const { return sides_; }

    // Neighbours in rotation order.
    const std::vector<NodeId>& neighbors(NodeId n) const;

    // d_T: sum of edge lengths along the unique path.
    double distance(NodeId a, NodeId b) const;

    // Node sequence of the path from a to b, both ends included.
    std::vector<NodeId> path(NodeId a, NodeId b) const;

    double total_length() const;

    // Leaf id of the landmark, or -1.
    NodeId leaf_for_landmark(int landmark_id) const;

private:
    ShadowTree() = default;
    void check(NodeId n) const;

    std::vector<TreeNode> nodes_;
    std::vector<TreeEdge> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<double> dist_;      // node_count^2
    std::vector<NodeId> next_hop_;  // node_count^2
    std::size_t leaf_count_ = 0;
    std::string topology_id_;
    std::optional<SideMap> sides_;
};

// Declarative tree layout over landmark ids. Internal nodes sit at the
// centroid of their listed landmarks; children are visited in declaration
// order, which fixes the rotation at every node.
struct TopologyNode {
    std::string name;
    int leaf_id = -1;                   // >= 0 marks a leaf
    std::vector<int> centroid_of;       // internal nodes only
    std::vector<TopologyNode> children;
};

struct TreeTopology {
    std::string name;
    TopologyNode root;
    SideMap sides;
    std::vector<std::pair<int, int>> mirror;  // landmark id pairs, (id, id) when self-mirrored

    std::vector<int> leaf_ids() const;  // declaration order
};

// Topology JSON:
//   {"name": str,
//    "root": {"name": str, "centroid_of": [ids], "children": [node | {"leaf": id}]},
//    "sides": {"top": [region], "right": [...], "bottom": [...], "left": [...]},
//    "mirror": [[id, id], ...]}
TreeTopology parse_topology(std::string_view text);
std::string serialize_topology(const TreeTopology& topo);

// The 37-leaf face topology shipped in data/face37_topology.json.
const TreeTopology& default_topology();
std::string_view default_topology_json();

ShadowTree build_shadow_tree(const NormalizedFrame& frame, const TreeTopology& topology);

// Doubling-cycle leaf order: an Euler tour from leaf 0 that turns by the
// rotation at every node. Each leaf appears exactly once.
std::vector<NodeId> leaf_cycle(const ShadowTree& tree);

}  // namespace origami
