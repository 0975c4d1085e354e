// Equilibrium positions and the lateral offset constants.
//
// Forward equilibrium: with every non-root row of the full Laplacian
// satisfying (L y)_i = -g_y, cars in one level share a coordinate and
// consecutive levels sit g_y / W apart. Lateral equilibrium: the offset
// vector C = L x_f makes x = g_x * x_f (plus any constant) the stationary
// point of the lateral law, which carries +k_x g_x C.
#pragma once

#include <vector>

#include "laneless/laplacian.hpp"
#include "laneless/types.hpp"

namespace laneless {

// Solve the forward equilibrium by forward substitution on the (canonically
// lower triangular) full Laplacian, anchored at the root's position. Returns
// positions in bundle.ordering order. Throws SingularLevel when a non-root
// diagonal entry vanishes.
Eigen::VectorXd solve_y_equilibrium(const LaplacianBundle& bundle, double g_y,
                                    double leader_y);

// C = L * x_f over the full ordering; x_f is the per-car template in units
// of g_x. Rows of anchor nodes come out zero when the template respects the
// anchors.
Eigen::VectorXd compute_C_from_template(const LaplacianBundle& bundle,
                                        const Eigen::VectorXd& x_f);

// Offset constant of one car, computed only from its own desired position,
// its in-neighbours' desired positions and the edge weights:
//   z_i = (sum_j w_ij x*_j - W x*_i) / (-g_x).
// Stacking these over all cars reproduces compute_C_from_template when the
// desired positions are g_x times the template.
double compute_z_local(double desired_own,
                       const std::vector<double>& neighbor_desired,
                       const std::vector<double>& weights, double g_x);

struct ExistenceReport {
  bool feasible = false;
  int rank = 0;
  int rows = 0;
  int cols = 0;
};

// Build the per-level system that couples the Laplacian rows of the level's
// cars (with g_x z_i as unknowns) with the adjacent-gap constraints, reduce
// it to row echelon form, and report whether a solution for the offsets
// exists. Rank is computed by the echelon construction itself.
ExistenceReport verify_existence(const LaplacianBundle& bundle,
                                 const std::vector<CarId>& level_cars,
                                 double g_x);

}  // namespace laneless
