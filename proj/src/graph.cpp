#include "laneless/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace laneless {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

bool edge_order(const Edge& a, const Edge& b) {
  if (a.to != b.to) return a.to < b.to;
  return a.from < b.from;
}

// Dense id -> slot lookup; car ids are small integers.
struct IdIndex {
  std::vector<int> slot;
  explicit IdIndex(const std::vector<CarId>& ids) {
    CarId max_id = 0;
    for (CarId id : ids) max_id = std::max(max_id, id);
    slot.assign(static_cast<size_t>(max_id) + 1, -1);
    for (size_t i = 0; i < ids.size(); ++i) slot[ids[i]] = static_cast<int>(i);
  }
  int of(CarId id) const {
    return id >= 0 && id < static_cast<CarId>(slot.size()) ? slot[id] : -1;
  }
};

// Levels over index space: -1 marks unreachable. Throws on cycles.
std::vector<int> levels_by_index(const std::vector<CarId>& nodes,
                                 const std::vector<Edge>& edges,
                                 const std::vector<char>& aux, CarId root,
                                 const IdIndex& index) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<int>> out(n);
  std::vector<int> indeg(n, 0);
  for (const Edge& e : edges) {
    const int f = index.of(e.from), t = index.of(e.to);
    if (f < 0 || t < 0) continue;
    out[f].push_back(t);
    ++indeg[t];
  }

  std::vector<char> reachable(n, 0);
  std::deque<int> queue;
  const int root_idx = index.of(root);
  if (root_idx >= 0) {
    reachable[root_idx] = 1;
    queue.push_back(root_idx);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : out[v])
      if (!reachable[w]) {
        reachable[w] = 1;
        queue.push_back(w);
      }
  }
  for (int i = 0; i < n; ++i)
    if (!reachable[i] && !aux[i])
      throw SimError(ErrorCode::Unreachable,
                     "car " + std::to_string(nodes[i]) +
                         " has no influence path from the root");

  // Longest influence chain from the root, in topological order. The cone
  // graph is acyclic because every edge points strictly backwards from a car
  // ahead, and only this distance stratifies cars into the levels that share
  // an equilibrium forward coordinate.
  std::vector<int> pending(n, 0);
  for (const Edge& e : edges) {
    const int f = index.of(e.from), t = index.of(e.to);
    if (f < 0 || t < 0 || !reachable[f] || !reachable[t]) continue;
    ++pending[t];
  }
  std::vector<int> level(n, -1);
  queue.clear();
  for (int i = 0; i < n; ++i)
    if (reachable[i] && pending[i] == 0) {
      level[i] = 0;
      queue.push_back(i);
    }
  int processed = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    ++processed;
    for (int w : out[v]) {
      if (!reachable[w]) continue;
      level[w] = std::max(level[w], level[v] + 1);
      if (--pending[w] == 0) queue.push_back(w);
    }
  }
  int reach_count = 0;
  for (int i = 0; i < n; ++i) reach_count += reachable[i];
  if (processed != reach_count)
    throw SimError(ErrorCode::ScenarioInvalid,
                   "influence graph has a cycle; levels are undefined");
  return level;
}

void check_degenerate(const std::vector<const Car*>& cars) {
  for (size_t i = 0; i < cars.size(); ++i)
    for (size_t j = i + 1; j < cars.size(); ++j)
      if (cars[i]->x == cars[j]->x && cars[i]->y == cars[j]->y)
        throw SimError(ErrorCode::DegenerateGeometry,
                       "cars " + std::to_string(cars[i]->id) + " and " +
                           std::to_string(cars[j]->id) + " are coincident");
}

std::set<std::pair<CarId, CarId>> edge_pairs(const InfluenceGraph& g) {
  std::set<std::pair<CarId, CarId>> s;
  for (const Edge& e : g.edges) s.insert({e.from, e.to});
  return s;
}

void set_uniform_weights(InfluenceGraph& g, const IdIndex& index) {
  std::vector<int> indegree(index.slot.size(), 0);
  for (const Edge& e : g.edges) ++indegree[e.to];
  for (Edge& e : g.edges) e.weight = 1.0 / indegree[e.to];
}

}  // namespace

bool InfluenceGraph::has_node(CarId id) const {
  return std::binary_search(nodes.begin(), nodes.end(), id);
}

bool InfluenceGraph::is_aux_input(CarId id) const {
  return std::find(aux_inputs.begin(), aux_inputs.end(), id) != aux_inputs.end();
}

std::vector<Edge> InfluenceGraph::in_edges(CarId id) const {
  std::vector<Edge> out;
  for (const Edge& e : edges)
    if (e.to == id) out.push_back(e);
  return out;
}

double InfluenceGraph::in_weight_sum(CarId id) const {
  double sum = 0.0;
  for (const Edge& e : edges)
    if (e.to == id) sum += e.weight;
  return sum;
}

void InfluenceGraph::sort_edges() {
  std::sort(edges.begin(), edges.end(), edge_order);
}

bool InfluenceGraph::same_topology(const InfluenceGraph& other) const {
  // Builders keep edges sorted by (to, from), so a pairwise scan suffices.
  if (edges.size() != other.edges.size()) return false;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].from != other.edges[i].from || edges[i].to != other.edges[i].to)
      return false;
  return true;
}

bool in_viewing_region(const Car& viewer, const Car& seen, Axis axis,
                       const GeometryParams& geom,
                       double half_angle_offset_deg) {
  const double dx = seen.x - viewer.x;
  const double dy = seen.y - viewer.y;
  if (dx == 0.0 && dy == 0.0) return false;
  const double aov = (axis == Axis::Y) ? geom.aov_y_deg : geom.aov_x_deg;
  const double half = 0.5 * aov + half_angle_offset_deg;
  // Angle between the separation vector and the direction of travel. A half
  // angle of exactly 90 degrees admits the closed half plane ahead.
  const double angle = std::atan2(std::abs(dx), dy) / kDegToRad;
  return angle <= half;
}

DerivedGraphs derive_influence_graphs(const FormationSnapshot& snapshot,
                                      const GeometryParams& geom,
                                      const InfluenceGraph* previous_y,
                                      const InfluenceGraph* previous_x,
                                      bool want_x) {
  geom.validate();
  for (const Car& c : snapshot.cars)
    if (!std::isfinite(c.x) || !std::isfinite(c.y))
      throw SimError(ErrorCode::NonFiniteState,
                     "car " + std::to_string(c.id) + " has non-finite position");

  const Car* leader = snapshot.phantom_leader();
  if (leader == nullptr || leader->id != kLeaderId)
    throw SimError(ErrorCode::MissingLeader,
                   "forward graph requires a phantom leader with id 0");

  std::vector<const Car*> members;
  members.reserve(snapshot.cars.size());
  for (const Car& c : snapshot.cars)
    if (c.role != CarRole::Obstacle) members.push_back(&c);
  check_degenerate(members);

  DerivedGraphs result;
  InfluenceGraph& gy = result.y;
  gy.axis = Axis::Y;
  gy.root = kLeaderId;
  gy.nodes.reserve(members.size());
  for (const Car* c : members) gy.nodes.push_back(c->id);
  std::sort(gy.nodes.begin(), gy.nodes.end());
  const IdIndex index(gy.nodes);

  const double margin = geom.switch_margin_deg;
  const bool use_margin_y = previous_y != nullptr && margin > 0.0;
  std::set<std::pair<CarId, CarId>> keep_y;
  if (use_margin_y) keep_y = edge_pairs(*previous_y);

  // Raw cone edges for the forward axis.
  std::vector<Edge> raw;
  raw.reserve(members.size() * 4);
  for (const Car* viewer : members) {
    if (viewer->role == CarRole::PhantomLeader) continue;  // follows nobody
    for (const Car* seen : members) {
      if (seen->id == viewer->id) continue;
      double offset = 0.0;
      if (use_margin_y)
        offset = keep_y.count({seen->id, viewer->id}) ? margin : -margin;
      if (in_viewing_region(*viewer, *seen, Axis::Y, geom, offset))
        raw.push_back({seen->id, viewer->id, 1.0});
    }
  }

  std::vector<char> aux(gy.nodes.size(), 0);
  const std::vector<int> level =
      levels_by_index(gy.nodes, raw, aux, kLeaderId, index);
  for (size_t i = 0; i < gy.nodes.size(); ++i)
    result.levels[gy.nodes[i]] = level[i];

  // Influence may cross at most influence_depth levels, always forward.
  for (const Edge& e : raw) {
    const int span = level[index.of(e.to)] - level[index.of(e.from)];
    if (span >= 1 && span <= geom.influence_depth) gy.edges.push_back(e);
  }
  set_uniform_weights(gy, index);
  gy.sort_edges();

  if (!want_x) return result;
  for (const Car* c : members)
    if (c->role == CarRole::Regular || c->role == CarRole::Boundary)
      result.x_present = true;
  if (!result.x_present) return result;
  if (!snapshot.has(1) || snapshot.by_id(1).role == CarRole::PhantomLeader)
    throw SimError(ErrorCode::MissingLeader,
                   "lateral graph requires node 1 as its reference");

  InfluenceGraph& gx = result.x;
  gx.axis = Axis::X;
  gx.root = 1;
  for (const Car* c : members)
    if (c->role != CarRole::PhantomLeader) gx.nodes.push_back(c->id);
  std::sort(gx.nodes.begin(), gx.nodes.end());

  const bool use_margin_x = previous_x != nullptr && margin > 0.0;
  std::set<std::pair<CarId, CarId>> keep_x;
  if (use_margin_x) keep_x = edge_pairs(*previous_x);

  for (const Car* viewer : members) {
    if (viewer->role == CarRole::PhantomLeader) continue;
    if (viewer->id == gx.root) continue;  // the lateral reference has no inputs
    const int lv = level[index.of(viewer->id)];
    if (viewer->role == CarRole::Boundary) {
      // Boundary pseudo-cars listen only to the boundary car one level up.
      for (const Car* seen : members)
        if (seen->role == CarRole::Boundary &&
            level[index.of(seen->id)] == lv - 1)
          gx.edges.push_back({seen->id, viewer->id, 1.0});
      continue;
    }
    for (const Car* seen : members) {
      if (seen->id == viewer->id || seen->role == CarRole::PhantomLeader)
        continue;
      const int span = lv - level[index.of(seen->id)];
      if (span == 0) {
        // Cars of one level watch each other regardless of tiny forward
        // offsets, so lateral influence inside a level is mutual.
        gx.edges.push_back({seen->id, viewer->id, 1.0});
      } else if (span >= 1 && span <= geom.influence_depth) {
        double offset = 0.0;
        if (use_margin_x)
          offset = keep_x.count({seen->id, viewer->id}) ? margin : -margin;
        if (in_viewing_region(*viewer, *seen, Axis::X, geom, offset))
          gx.edges.push_back({seen->id, viewer->id, 1.0});
      }
    }
  }
  set_uniform_weights(gx, index);
  gx.sort_edges();
  return result;
}

InfluenceGraph build_influence_graph(const FormationSnapshot& snapshot,
                                     Axis axis, const GeometryParams& geom,
                                     const InfluenceGraph* previous) {
  if (axis == Axis::Y) {
    return derive_influence_graphs(snapshot, geom, previous, nullptr, false).y;
  }
  DerivedGraphs derived =
      derive_influence_graphs(snapshot, geom, nullptr, previous, true);
  if (!derived.x_present)
    throw SimError(ErrorCode::MissingLeader,
                   "lateral graph requires node 1 as its reference");
  return derived.x;
}

LevelMap assign_levels(const InfluenceGraph& y_graph) {
  const IdIndex index(y_graph.nodes);
  std::vector<char> aux(y_graph.nodes.size(), 0);
  for (size_t i = 0; i < y_graph.nodes.size(); ++i)
    aux[i] = y_graph.is_aux_input(y_graph.nodes[i]) ? 1 : 0;
  const std::vector<int> level =
      levels_by_index(y_graph.nodes, y_graph.edges, aux, y_graph.root, index);
  LevelMap out;
  for (size_t i = 0; i < y_graph.nodes.size(); ++i)
    if (level[i] >= 0) out[y_graph.nodes[i]] = level[i];
  return out;
}

std::vector<CarId> canonical_numbering(const FormationSnapshot& snapshot,
                                       const LevelMap& levels) {
  std::vector<const Car*> members;
  for (const Car& c : snapshot.cars) {
    if (c.role == CarRole::Obstacle) continue;
    if (!levels.count(c.id))
      throw SimError(ErrorCode::ScenarioInvalid,
                     "car " + std::to_string(c.id) + " has no level");
    members.push_back(&c);
  }
  std::sort(members.begin(), members.end(),
            [&](const Car* a, const Car* b) {
              const int la = levels.at(a->id), lb = levels.at(b->id);
              if (la != lb) return la < lb;
              if (a->x != b->x) return a->x > b->x;  // rightmost numbered first
              return a->id < b->id;
            });
  std::vector<CarId> order;
  order.reserve(members.size());
  for (const Car* c : members) order.push_back(c->id);
  return order;
}

FormationSnapshot renumber(const FormationSnapshot& snapshot,
                           const std::vector<CarId>& order) {
  if (order.size() != snapshot.cars.size())
    throw SimError(ErrorCode::DimensionMismatch,
                   "numbering order must cover every car");
  FormationSnapshot out;
  out.cars.reserve(order.size());
  for (size_t new_id = 0; new_id < order.size(); ++new_id) {
    Car c = snapshot.by_id(order[new_id]);
    c.id = static_cast<CarId>(new_id);
    out.cars.push_back(c);
  }
  out.sort_by_id();
  return out;
}

bool has_directed_spanning_tree(const InfluenceGraph& graph) {
  if (!graph.has_node(graph.root)) return false;
  const IdIndex index(graph.nodes);
  const int n = static_cast<int>(graph.nodes.size());
  std::vector<std::vector<int>> out(n);
  for (const Edge& e : graph.edges) {
    const int f = index.of(e.from), t = index.of(e.to);
    if (f >= 0 && t >= 0) out[f].push_back(t);
  }
  std::vector<char> seen(n, 0);
  std::deque<int> queue{index.of(graph.root)};
  seen[index.of(graph.root)] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : out[v])
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i] && !graph.is_aux_input(graph.nodes[i])) return false;
  return true;
}

InfluenceGraph redistribute_weights(InfluenceGraph graph, double W) {
  if (!(W > 0.0))
    throw SimError(ErrorCode::ScenarioInvalid, "weight sum W must be > 0");
  CarId max_id = 0;
  for (CarId id : graph.nodes) max_id = std::max(max_id, id);
  std::vector<double> sums(static_cast<size_t>(max_id) + 1, 0.0);
  for (const Edge& e : graph.edges) sums[e.to] += e.weight;
  for (CarId id : graph.nodes) {
    if (id == graph.root || graph.is_aux_input(id)) continue;
    if (sums[id] <= 0.0)
      throw SimError(ErrorCode::IsolatedNode,
                     "car " + std::to_string(id) + " has no incoming influence");
  }
  for (Edge& e : graph.edges)
    if (e.to != graph.root && !graph.is_aux_input(e.to))
      e.weight *= W / sums[e.to];
  return graph;
}

}  // namespace laneless
