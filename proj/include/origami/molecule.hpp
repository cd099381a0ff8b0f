#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "origami/crease.hpp"
#include "origami/error.hpp"
#include "origami/lang_polygon.hpp"
#include "origami/shadow_tree.hpp"
#include "origami/vec.hpp"

namespace origami {

// How the tree distance between two wavefront vertices evolves with depth.
//
// lang_reduced: each leaf's path length shrinks by the distance its vertex has
// travelled along the adjacent edges (depth * cot(angle / 2) per vertex), so
// the split condition compares the planar distance against the remaining
// tree slack. fixed: the tree distance stays at its initial value.
enum class TreeMetric { lang_reduced, fixed };

std::string_view tree_metric_name(TreeMetric m);
std::optional<TreeMetric> parse_tree_metric(std::string_view name);

struct ShrinkConfig {
    double th = 0.0;           // 0 selects 1e-6 * bounding-box diagonal
    double step = 0.0;         // 0 selects perimeter / 2000
    double refine_tol = 1e-9;
    std::size_t max_events = 0;  // 0 selects 8 * leaf count
    TreeMetric metric = TreeMetric::lang_reduced;

    // Copy with defaults filled in for `poly`. Throws ConfigError when a value
    // is non-positive or refine_tol >= th.
    ShrinkConfig resolved(const LangPolygon& poly) const;
};

struct LeafState {
    NodeId leaf = 0;
    double reduction = 0.0;  // accumulated path-length reduction
};

struct ActiveVertex {
    Vec2 position;
    Vec2 velocity;      // inward offset speed, unit speed for each edge line
    double rate = 0.0;  // cot(angle / 2): reduction per unit depth
    std::vector<LeafState> leaves;
    int crease_node = -1;  // node of the last event this vertex took part in
    int trajectory = -1;   // open trajectory record, or -1
};

// One polygon of the wavefront. Edge i runs from vertex i to vertex i + 1 and
// keeps its direction for the polygon's whole life.
struct ActivePolygon {
    int id = 0;
    int parent = -1;
    double depth = 0.0;
    double orient = 1.0;  // +1 when the vertex order has positive signed area
    std::vector<ActiveVertex> vertices;
    std::vector<Vec2> edge_dirs;
    // Position of every leaf in the original leaf cycle.
    std::shared_ptr<const std::vector<int>> cycle_index;

    std::size_t size() const { return vertices.size(); }
    std::vector<Vec2> positions() const;
    std::vector<NodeId> leaf_set() const;  // sorted
};

// Recomputes velocity and rate of vertex i from the two adjacent edge directions.
void update_kinematics(ActivePolygon& poly, std::size_t i);

enum class EventKind { contraction, split, terminal };
std::string_view event_kind_name(EventKind k);

struct ShrinkEvent {
    EventKind kind = EventKind::contraction;
    double depth = 0.0;
    int polygon = 0;
    std::vector<std::size_t> vertices;  // indices in the polygon at event time
    std::vector<NodeId> leaves;         // leaves carried by the involved vertices
    std::optional<std::pair<NodeId, NodeId>> leaf_pair;  // split only
    std::vector<NodeId> intermediates;                   // split only: tree nodes on the chord
    std::vector<int> children;                           // split only
    int crease_node = -1;                                // merge or terminal node
    std::size_t active_polygons = 0;                     // after the event
    std::size_t active_vertices = 0;
};

// Straight piece of a vertex path between two crease nodes.
struct TrajectoryRecord {
    int from_node = -1;
    int to_node = -1;
    double start_depth = 0.0;
    double end_depth = 0.0;
    Vec2 start;
    Vec2 end;
    std::vector<Vec2> samples;  // positions whenever the owning polygon advanced
};

// Collects crease nodes, edges and trajectories while the engine runs.
struct ShrinkRecorder {
    CreaseBuilder builder;
    std::vector<TrajectoryRecord> trajectories;

    int open_trajectory(int node, Vec2 at, double depth);
    void sample(int trajectory, Vec2 at);
    void close_trajectory(int trajectory, int node, Vec2 at, double depth);
};

// Polygon id 0 at depth 0. Boundary-leaf nodes 0..p-1 and the boundary edges
// are added to the recorder, which must be empty.
ActivePolygon make_active_polygon(const LangPolygon& poly, ShrinkRecorder& recorder);

// Moves every vertex by delta along its velocity and grows every reduction by
// delta * rate. Throws GeometryError if an edge inverts by more than `th`.
ActivePolygon offset_step(const ActivePolygon& poly, double delta, double th = 0.0,
                          ShrinkRecorder* recorder = nullptr);

// Signed length of edge i measured along its fixed direction.
double edge_length(const ActivePolygon& poly, std::size_t i);

// Indices i of edges (i, i + 1) whose length is at most th.
std::vector<std::size_t> detect_contraction(const ActivePolygon& poly, double th);

struct SplitCandidate {
    std::size_t i = 0;
    std::size_t k = 0;  // i < k, cyclic separation >= 2 both ways
    NodeId leaf_a = 0;  // representative leaves
    NodeId leaf_b = 0;
    double planar = 0.0;
    double tree = 0.0;  // tree distance under the configured metric
};

// Tree distance between vertices u and v with its representative leaf pair.
SplitCandidate pair_distance(const ActivePolygon& poly, const ShadowTree& tree, std::size_t u,
                             std::size_t v, TreeMetric metric);

// Non-adjacent pairs with d_P <= d_T + th. At depth 0, pairs whose leaves
// share an edge of the original leaf cycle are skipped.
std::vector<SplitCandidate> detect_split(const ActivePolygon& poly, const ShadowTree& tree,
                                         double th, TreeMetric metric = TreeMetric::lang_reduced);

// Merges vertices i and i + 1 at their midpoint. Throws GeometryError if the
// edge is longer than th.
ActivePolygon apply_contraction(const ActivePolygon& poly, std::size_t i, double th,
                                ShrinkRecorder& recorder, int* merge_node = nullptr);

struct SplitResult {
    ActivePolygon first;   // vertices i..k
    ActivePolygon second;  // vertices k..n-1, 0..i
    std::vector<NodeId> intermediates;
};

// Cuts the polygon along the chord (i, k). Intermediate tree nodes on the
// path between the representative leaves are placed on the chord at their
// cumulative path fractions. Throws GeometryError when the endpoints are
// adjacent or the condition does not hold within th.
SplitResult apply_split(const ActivePolygon& poly, const SplitCandidate& split,
                        const ShadowTree& tree, double th, TreeMetric metric,
                        ShrinkRecorder& recorder, int first_id, int second_id);

// Earliest event of one polygon, found by stepping the depth in increments of
// cfg.step and bisecting each crossed condition to cfg.refine_tol. `cfg` must
// be resolved.
struct PendingEvent {
    EventKind kind = EventKind::terminal;
    double depth = 0.0;
    std::size_t i = 0;  // contraction: edge index; split: first vertex
    SplitCandidate split;
};

PendingEvent next_event(const ActivePolygon& poly, const ShadowTree& tree, const ShrinkConfig& cfg);

struct ShrinkResult {
    CreasePattern pattern;
    std::vector<ShrinkEvent> events;
    std::vector<TrajectoryRecord> trajectories;
    ShrinkConfig config;  // resolved
};

class ShrinkError : public GeometryError {
public:
    ShrinkError(const std::string& what, std::vector<ShrinkEvent> partial)
        : GeometryError(what), partial_(std::move(partial)) {}
    const std::vector<ShrinkEvent>& partial_log() const { return partial_; }

private:
    std::vector<ShrinkEvent> partial_;
};

// Runs the wavefront until every polygon has terminated.
ShrinkResult shrink(const LangPolygon& poly, const ShadowTree& tree, const ShrinkConfig& cfg = {});

// One JSON object per line, keys sorted.
std::string events_to_jsonl(const std::vector<ShrinkEvent>& events);

}  // namespace origami
