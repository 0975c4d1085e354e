#include "laneless/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace laneless {

Eigen::VectorXd solve_y_equilibrium(const LaplacianBundle& bundle, double g_y,
                                    double leader_y) {
  const Eigen::Index n = bundle.full.rows();
  if (bundle.inputs.empty())
    throw SimError(ErrorCode::DimensionMismatch, "bundle has no root input");
  const CarId root = bundle.inputs[0];

  Eigen::VectorXd y(n);
  std::vector<bool> solved(static_cast<size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (bundle.ordering[static_cast<size_t>(i)] == root) {
      y(i) = leader_y;
      solved[static_cast<size_t>(i)] = true;
      continue;
    }
    const double diag = bundle.full(i, i);
    if (diag == 0.0)
      throw SimError(ErrorCode::SingularLevel,
                     "car " + std::to_string(bundle.ordering[i]) +
                         " has zero incoming weight; cannot place it");
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i || bundle.full(i, j) == 0.0) continue;
      if (!solved[static_cast<size_t>(j)])
        throw SimError(ErrorCode::ScenarioInvalid,
                       "forward substitution requires a causally ordered "
                       "(lower triangular) Laplacian");
      acc += -bundle.full(i, j) * y(j);
    }
    y(i) = (acc - g_y) / diag;
    solved[static_cast<size_t>(i)] = true;
  }
  return y;
}

Eigen::VectorXd compute_C_from_template(const LaplacianBundle& bundle,
                                        const Eigen::VectorXd& x_f) {
  if (x_f.size() != bundle.full.rows())
    throw SimError(ErrorCode::DimensionMismatch,
                   "template length " + std::to_string(x_f.size()) +
                       " does not match node count " +
                       std::to_string(bundle.full.rows()));
  return bundle.full * x_f;
}

double compute_z_local(double desired_own,
                       const std::vector<double>& neighbor_desired,
                       const std::vector<double>& weights, double g_x) {
  if (g_x == 0.0)
    throw SimError(ErrorCode::ZeroSpacing, "lateral spacing g_x must be nonzero");
  if (neighbor_desired.size() != weights.size())
    throw SimError(ErrorCode::DimensionMismatch,
                   "one weight per neighbour position required");
  double wsum = 0.0, acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    wsum += weights[i];
    acc += weights[i] * neighbor_desired[i];
  }
  return (acc - wsum * desired_own) / (-g_x);
}

namespace {

// Row echelon reduction with partial pivoting and unity pivots; returns the
// number of nonzero pivot rows.
int echelon_rank(Eigen::MatrixXd m) {
  const double tol = 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff());
  int rank = 0;
  for (Eigen::Index col = 0; col < m.cols() && rank < m.rows(); ++col) {
    Eigen::Index pivot = -1;
    double best = tol;
    for (Eigen::Index r = rank; r < m.rows(); ++r)
      if (std::abs(m(r, col)) > best) {
        best = std::abs(m(r, col));
        pivot = r;
      }
    if (pivot < 0) continue;
    m.row(pivot).swap(m.row(rank));
    m.row(rank) /= m(rank, col);
    for (Eigen::Index r = rank + 1; r < m.rows(); ++r)
      m.row(r) -= m(r, col) * m.row(rank);
    ++rank;
  }
  return rank;
}

}  // namespace

ExistenceReport verify_existence(const LaplacianBundle& bundle,
                                 const std::vector<CarId>& level_cars,
                                 double g_x) {
  if (level_cars.empty())
    throw SimError(ErrorCode::DimensionMismatch, "level has no cars");

  // Variables: the positions of the level's cars and of every neighbour that
  // appears in their Laplacian rows, then one g_x * z unknown per level car.
  std::vector<CarId> position_vars = level_cars;
  for (CarId id : level_cars) {
    const Eigen::Index row = bundle.index_in_ordering(id);
    for (Eigen::Index j = 0; j < bundle.full.cols(); ++j) {
      if (bundle.full(row, j) == 0.0 || j == row) continue;
      const CarId other = bundle.ordering[static_cast<size_t>(j)];
      if (std::find(position_vars.begin(), position_vars.end(), other) ==
          position_vars.end())
        position_vars.push_back(other);
    }
  }

  const int np = static_cast<int>(position_vars.size());
  const int nz = static_cast<int>(level_cars.size());
  const int rows = nz + std::max(0, nz - 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, np + nz);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);

  auto pcol = [&](CarId id) {
    return static_cast<Eigen::Index>(
        std::find(position_vars.begin(), position_vars.end(), id) -
        position_vars.begin());
  };

  int r = 0;
  for (int i = 0; i < nz; ++i, ++r) {
    const Eigen::Index row = bundle.index_in_ordering(level_cars[i]);
    for (CarId id : position_vars)
      a(r, pcol(id)) = bundle.full(row, bundle.index_in_ordering(id));
    a(r, np + i) = -1.0;  // the g_x * z_i unknown
  }
  // Adjacent cars of the level keep a gap of g_x, numbered right to left.
  for (int i = 0; i + 1 < nz; ++i, ++r) {
    a(r, pcol(level_cars[i])) = 1.0;
    a(r, pcol(level_cars[i + 1])) = -1.0;
    rhs(r) = g_x;
  }

  ExistenceReport report;
  report.rows = rows;
  report.cols = np + nz;
  report.rank = echelon_rank(a);
  Eigen::MatrixXd aug(rows, a.cols() + 1);
  aug << a, rhs;
  report.feasible = report.rank == rows || echelon_rank(aug) == report.rank;
  return report;
}

}  // namespace laneless
