#include "laneless/laplacian.hpp"

#include <algorithm>

namespace laneless {

AxisPartition axis_partition(const FormationSnapshot& snapshot, Axis axis,
                             const LevelMap& levels,
                             const std::vector<CarId>& extra_inputs) {
  AxisPartition part;
  auto is_extra = [&](CarId id) {
    return std::find(extra_inputs.begin(), extra_inputs.end(), id) !=
           extra_inputs.end();
  };

  if (axis == Axis::Y) {
    part.inputs.push_back(kLeaderId);
    for (const Car& c : snapshot.cars) {
      if (c.role == CarRole::Regular && !is_extra(c.id))
        part.states.push_back(c.id);
      else if (c.role == CarRole::Obstacle || is_extra(c.id))
        part.inputs.push_back(c.id);
    }
    // Boundary pseudo-cars mirror the leftmost (highest numbered) regular car
    // of their level.
    for (const Car& c : snapshot.cars) {
      if (c.role != CarRole::Boundary) continue;
      CarId ref = -1;
      for (const Car& d : snapshot.cars) {
        if (d.role != CarRole::Regular) continue;
        if (!levels.count(d.id) || !levels.count(c.id)) continue;
        if (levels.at(d.id) == levels.at(c.id) && d.id > ref) ref = d.id;
      }
      if (ref < 0)
        throw SimError(ErrorCode::ScenarioInvalid,
                       "boundary car " + std::to_string(c.id) +
                           " has no regular car in its level");
      part.alias[c.id] = ref;
    }
  } else {
    for (const Car& c : snapshot.cars) {
      if (c.role == CarRole::PhantomLeader) continue;
      const bool input = c.id == 1 || c.role == CarRole::Boundary ||
                         c.role == CarRole::Obstacle || is_extra(c.id);
      if (input)
        part.inputs.push_back(c.id);
      else
        part.states.push_back(c.id);
    }
    // Reference node first.
    std::stable_sort(part.inputs.begin(), part.inputs.end(),
                     [](CarId a, CarId b) { return (a == 1) > (b == 1); });
  }
  std::sort(part.states.begin(), part.states.end());
  return part;
}

Eigen::Index LaplacianBundle::index_in_ordering(CarId id) const {
  for (size_t i = 0; i < ordering.size(); ++i)
    if (ordering[i] == id) return static_cast<Eigen::Index>(i);
  throw SimError(ErrorCode::DimensionMismatch,
                 "car " + std::to_string(id) + " is not in the ordering");
}

Eigen::Index LaplacianBundle::index_in_states(CarId id) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i] == id) return static_cast<Eigen::Index>(i);
  return -1;
}

LaplacianBundle laplacian(const InfluenceGraph& graph,
                          const std::vector<CarId>& ordering,
                          const AxisPartition& partition) {
  for (CarId id : graph.nodes)
    if (std::find(ordering.begin(), ordering.end(), id) == ordering.end())
      throw SimError(ErrorCode::DimensionMismatch,
                     "ordering does not cover car " + std::to_string(id));

  LaplacianBundle bundle;
  bundle.ordering = ordering;
  bundle.states = partition.states;
  bundle.inputs = partition.inputs;

  const Eigen::Index n = static_cast<Eigen::Index>(ordering.size());
  bundle.full.setZero(n, n);
  std::map<CarId, Eigen::Index> pos;
  for (Eigen::Index i = 0; i < n; ++i) pos[ordering[i]] = i;

  for (const Edge& e : graph.edges) {
    const Eigen::Index i = pos.at(e.to), j = pos.at(e.from);
    bundle.full(i, i) += e.weight;
    bundle.full(i, j) -= e.weight;
  }

  const Eigen::Index m = static_cast<Eigen::Index>(partition.states.size());
  const Eigen::Index r = static_cast<Eigen::Index>(partition.inputs.size());
  bundle.reduced.setZero(m, m);
  bundle.leader_cols.setZero(m, r);

  std::map<CarId, Eigen::Index> state_pos;
  for (Eigen::Index i = 0; i < m; ++i) state_pos[partition.states[i]] = i;

  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index row = pos.at(partition.states[i]);
    for (Eigen::Index j = 0; j < m; ++j)
      bundle.reduced(i, j) = bundle.full(row, pos.at(partition.states[j]));
    // Fold aliased columns onto their reference state.
    for (const auto& [aliased, ref] : partition.alias) {
      auto it = pos.find(aliased);
      if (it == pos.end()) continue;
      bundle.reduced(i, state_pos.at(ref)) += bundle.full(row, it->second);
    }
    for (Eigen::Index s = 0; s < r; ++s) {
      auto it = pos.find(partition.inputs[s]);
      if (it == pos.end()) continue;
      bundle.leader_cols(i, s) = -bundle.full(row, it->second);
    }
  }
  return bundle;
}

LaplacianBundle laplacian(const InfluenceGraph& graph,
                          const std::vector<CarId>& ordering) {
  AxisPartition part;
  part.inputs.push_back(graph.root);
  for (CarId id : graph.aux_inputs) part.inputs.push_back(id);
  for (CarId id : graph.nodes)
    if (id != graph.root && !graph.is_aux_input(id)) part.states.push_back(id);
  std::sort(part.states.begin(), part.states.end());
  return laplacian(graph, ordering, part);
}

bool is_lower_triangular(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0) return false;
  return true;
}

}  // namespace laneless
