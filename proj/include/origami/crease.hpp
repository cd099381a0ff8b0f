#pragma once

#include <complex>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "origami/vec.hpp"

namespace origami {

enum class NodeKind { boundary_leaf, merge, split_intermediate, terminal };
enum class EdgeKind { boundary, trajectory, split_chord };

std::string_view node_kind_name(NodeKind k);
std::string_view edge_kind_name(EdgeKind k);

struct CreaseNode {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    NodeKind kind = NodeKind::merge;

    Vec2 position() const { return {x, y}; }
    friend bool operator==(const CreaseNode&, const CreaseNode&) = default;
};

// Undirected edge with a < b.
struct CreaseEdge {
    int a = 0;
    int b = 0;
    EdgeKind kind = EdgeKind::trajectory;

    friend bool operator==(const CreaseEdge&, const CreaseEdge&) = default;
};

struct CreasePattern {
    std::vector<CreaseNode> nodes;   // ascending id
    std::vector<CreaseEdge> edges;   // lexicographic (a, b)
    std::map<std::string, std::string> provenance;

    // Sorts nodes and edges into canonical order.
    void canonicalize();
    const CreaseNode* find_node(int id) const;

    friend bool operator==(const CreasePattern&, const CreasePattern&) = default;
};

// Throws InputError describing the first violated invariant: duplicate node
// ids, edges naming unknown nodes, self-loops, duplicate edges, non-finite
// coordinates, or a disconnected graph.
void validate_pattern(const CreasePattern& pattern);
bool is_connected(const CreasePattern& pattern);

struct CrossingEdges {
    CreaseEdge first;
    CreaseEdge second;
};

// Pairs of edges without a shared endpoint whose segments properly cross:
// each segment's endpoints lie on opposite sides of the other's line, farther
// than `tol` from it. Touching and collinear pieces are not crossings.
std::vector<CrossingEdges> find_crossings(const CreasePattern& pattern, double tol);

// Incremental construction used by the shrinking engine.
class CreaseBuilder {
public:
    int add_node(Vec2 p, NodeKind kind);
    // Ignores self-loops and repeated edges; returns whether an edge was added.
    bool add_edge(int a, int b, EdgeKind kind);
    Vec2 position(int id) const { return {nodes_[static_cast<std::size_t>(id)].x,
                                          nodes_[static_cast<std::size_t>(id)].y}; }
    std::size_t node_count() const { return nodes_.size(); }
    CreasePattern finish() const;

private:
    std::vector<CreaseNode> nodes_;
    std::vector<CreaseEdge> edges_;
    std::set<std::pair<int, int>> edge_set_;
};

// Node n -> x + i y, edge e -> id_1 + i id_2 with id_1 < id_2. Node kinds and
// edge kinds are not part of the encoding.
struct ComplexEncoding {
    std::vector<int> node_ids;                  // ascending
    std::vector<std::complex<double>> nodes;
    std::vector<std::complex<double>> edges;    // lexicographic
};

ComplexEncoding encode_complex(const CreasePattern& pattern);
// Inverse of encode_complex. Kinds are restored as merge / trajectory.
CreasePattern decode_complex(const ComplexEncoding& enc);

// Canonical JSON (sorted keys, nodes by id, edges lexicographic).
std::string serialize_pattern(const CreasePattern& pattern);
// Throws InputError with a JSON-pointer style location on schema violations.
CreasePattern deserialize_pattern(std::string_view text);

struct SvgStyle {
    double node_radius = 0.0;   // 0 selects 0.6% of the larger viewBox side
    double stroke_width = 0.0;  // 0 selects 0.25% of the larger viewBox side
    std::map<EdgeKind, std::string> edge_colors{{EdgeKind::boundary, "#000000"},
                                                {EdgeKind::trajectory, "#d62728"},
                                                {EdgeKind::split_chord, "#1f77b4"}};
    std::map<NodeKind, std::string> node_colors{{NodeKind::boundary_leaf, "#000000"},
                                                {NodeKind::merge, "#ff7f0e"},
                                                {NodeKind::split_intermediate, "#2ca02c"},
                                                {NodeKind::terminal, "#9467bd"}};
    bool draw_nodes = true;
};

// Named node colour maps selectable from the CLI: "default", "mono", "kind-contrast".
SvgStyle svg_style_preset(std::string_view name);

std::string to_svg(const CreasePattern& pattern, const SvgStyle& style = {});

}  // namespace origami
