// Influence-graph construction and canonical car numbering.
//
// Edges point from the influencing car to the influenced car: an edge j -> i
// means car j's state enters car i's control law. The forward (Y) graph is
// rooted at the phantom leader (node 0); the lateral (X) graph is rooted at
// node 1, the boundary car of the first level.
#pragma once

#include <map>
#include <vector>

#include "laneless/types.hpp"

namespace laneless {

struct Edge {
  CarId from = 0;
  CarId to = 0;
  double weight = 1.0;
};

inline bool operator==(const Edge& a, const Edge& b) {
  return a.from == b.from && a.to == b.to && a.weight == b.weight;
}

struct InfluenceGraph {
  Axis axis = Axis::Y;
  CarId root = kLeaderId;
  std::vector<CarId> nodes;       // ascending ids
  std::vector<Edge> edges;        // sorted by (to, from)
  std::vector<CarId> aux_inputs;  // input-only nodes: obstacles, externally driven cars

  bool has_node(CarId id) const;
  bool is_aux_input(CarId id) const;
  std::vector<Edge> in_edges(CarId id) const;
  double in_weight_sum(CarId id) const;
  void sort_edges();
  // True when both graphs have the same (from, to) pairs, weights ignored.
  bool same_topology(const InfluenceGraph& other) const;
};

// Hop level of each car: 0 for the root, and for every other car the longest
// chain of influence edges leading back to the root. On the pruned graph this
// coincides with the plain hop count, and cars in one level share an
// equilibrium forward coordinate.
using LevelMap = std::map<CarId, int>;

// Does `seen` fall inside `viewer`'s viewing region for the given axis?
// half_angle_offset_deg widens (positive) or narrows (negative) the cone,
// used for switch hysteresis.
bool in_viewing_region(const Car& viewer, const Car& seen, Axis axis,
                       const GeometryParams& geom,
                       double half_angle_offset_deg = 0.0);

// Derive the influence graph for one axis from car geometry. Obstacles are
// not wired here (see obstacle_wiring in scenario.hpp). When `previous` is
// given and switch_margin_deg > 0, existing edges are retained inside the
// widened cone and new edges require the narrowed cone.
InfluenceGraph build_influence_graph(const FormationSnapshot& snapshot,
                                     Axis axis, const GeometryParams& geom,
                                     const InfluenceGraph* previous = nullptr);

// Both axis graphs plus the level map in one pass over the geometry (the
// lateral graph reuses the forward cone analysis instead of redoing it).
struct DerivedGraphs {
  InfluenceGraph y;
  InfluenceGraph x;  // empty when want_x is false or no cars take part
  LevelMap levels;
  bool x_present = false;
};
DerivedGraphs derive_influence_graphs(const FormationSnapshot& snapshot,
                                      const GeometryParams& geom,
                                      const InfluenceGraph* previous_y = nullptr,
                                      const InfluenceGraph* previous_x = nullptr,
                                      bool want_x = true);

// Levels of every node reachable from the root of a forward-axis graph.
// Throws Unreachable when some non-auxiliary node has no path from the root.
LevelMap assign_levels(const InfluenceGraph& y_graph);

// Permutation order with order[new_id] = old_id: root first, then cars by
// (level ascending, x descending, original id ascending). The rightmost car
// of each level gets the lowest number in that level.
std::vector<CarId> canonical_numbering(const FormationSnapshot& snapshot,
                                       const LevelMap& levels);

// Apply a canonical_numbering permutation, relabelling car ids to 0..n.
FormationSnapshot renumber(const FormationSnapshot& snapshot,
                           const std::vector<CarId>& order);

// True when every non-auxiliary node is reachable from the root along
// directed edges.
bool has_directed_spanning_tree(const InfluenceGraph& graph);

// Rescale every non-root node's incoming weights so they sum to exactly W,
// preserving their relative proportions. Throws IsolatedNode when a non-root,
// non-auxiliary node has no incoming edge.
InfluenceGraph redistribute_weights(InfluenceGraph graph, double W);

}  // namespace laneless
