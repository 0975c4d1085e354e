// Dense Laplacian algebra for influence graphs.
//
// For a weighted directed graph the Laplacian has l_ii equal to the node's
// incoming weight sum and l_ij = -w_ij when the edge j -> i exists, so every
// row sums to zero and input nodes (which have no incoming edges) contribute
// all-zero rows.
#pragma once

#include <map>
#include <vector>

#include "laneless/graph.hpp"
#include "laneless/types.hpp"

namespace laneless {

// Splits the cars of one axis into integrated states, exogenous inputs and
// aliased nodes whose state mirrors a reference car.
struct AxisPartition {
  std::vector<CarId> states;
  std::vector<CarId> inputs;        // root first, then auxiliary inputs
  std::map<CarId, CarId> alias;     // aliased node -> reference state
};

// Standard partition for an axis:
//  - forward axis: states are the regular cars, the phantom leader (plus any
//    auxiliary inputs) drives the system, and each boundary car is aliased to
//    the leftmost regular car of its level;
//  - lateral axis: states are the regular cars except auxiliary inputs, and
//    the reference node 1, the other boundary cars and auxiliaries are inputs.
AxisPartition axis_partition(const FormationSnapshot& snapshot, Axis axis,
                             const LevelMap& levels,
                             const std::vector<CarId>& extra_inputs = {});

struct LaplacianBundle {
  Eigen::MatrixXd full;         // over `ordering`
  Eigen::MatrixXd reduced;      // states x states, alias columns folded in
  Eigen::MatrixXd leader_cols;  // states x inputs, nonnegative coupling weights
  std::vector<CarId> ordering;  // node order of `full`
  std::vector<CarId> states;    // row order of `reduced`
  std::vector<CarId> inputs;    // column order of `leader_cols`

  Eigen::Index index_in_ordering(CarId id) const;
  Eigen::Index index_in_states(CarId id) const;  // -1 when not a state
};

// Assemble full, reduced and input-coupling matrices for a graph under the
// given node ordering.
LaplacianBundle laplacian(const InfluenceGraph& graph,
                          const std::vector<CarId>& ordering,
                          const AxisPartition& partition);

// Convenience overload: inputs are the root plus the graph's auxiliary input
// nodes, no aliases.
LaplacianBundle laplacian(const InfluenceGraph& graph,
                          const std::vector<CarId>& ordering);

// Exact test used by the triangularity checks: no nonzero above the diagonal.
bool is_lower_triangular(const Eigen::MatrixXd& m);

}  // namespace laneless
