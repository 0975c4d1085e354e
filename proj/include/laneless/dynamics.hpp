// Control-law evaluation and fixed-step integration.
//
// Both axes follow the same second-order consensus form. For the integrated
// (reduced) state the acceleration is
//   a = -k L~ p - b L~ v + offset + k B p_in(t) + b B v_in(t)
// where offset is -k g_y 1 for the forward axis and +k_x g_x C for the
// lateral axis, and the input columns B carry the leader, boundary anchors,
// obstacles and externally driven cars.
#pragma once

#include <vector>

#include "laneless/graph.hpp"
#include "laneless/laplacian.hpp"
#include "laneless/types.hpp"

namespace laneless {

// Forward-axis control law of one car, summed directly over its incoming
// influence edges. Agrees with the matrix form row for row.
double y_acceleration(CarId car, const FormationSnapshot& snapshot,
                      const InfluenceGraph& y_graph, const GainParams& gains);

// Lateral control law of one car; c_full holds the offset constants in
// c_ordering order.
double x_acceleration(CarId car, const FormationSnapshot& snapshot,
                      const InfluenceGraph& x_graph, const GainParams& gains,
                      const Eigen::VectorXd& c_full,
                      const std::vector<CarId>& c_ordering);

// Exogenous input trajectory, evaluated in closed form at any time so that
// integrator stages see exact input values.
struct InputSignal {
  enum class Kind { Linear, Cubic };
  Kind kind = Kind::Linear;
  double p0 = 0.0, v = 0.0, t_ref = 0.0;              // linear
  double t0 = 0.0, t1 = 0.0, p_start = 0.0, p_end = 0.0;  // cubic ease

  double position(double t) const;
  double velocity(double t) const;

  static InputSignal constant(double p);
  static InputSignal linear(double p0, double v, double t_ref);
  static InputSignal cubic(double t0, double t1, double p_start, double p_end);
};

// Closed-loop linear system of one axis.
struct AxisSystem {
  Axis axis = Axis::Y;
  LaplacianBundle bundle;
  AxisPartition partition;
  double b = 0.0, k = 0.0;
  Eigen::VectorXd offset;           // constant acceleration offset, size m
  std::vector<InputSignal> inputs;  // one per bundle.inputs column

  Eigen::Index m() const { return bundle.reduced.rows(); }
  Eigen::VectorXd acceleration(double t, const Eigen::VectorXd& pos,
                               const Eigen::VectorXd& vel) const;
  // d/dt of the stacked state [p; v] written into `out` (resized as needed).
  void deriv_into(double t, const Eigen::VectorXd& state,
                  Eigen::VectorXd& out) const;
};

StateVector gather_state(const FormationSnapshot& snapshot,
                         const AxisSystem& system);
void scatter_state(const StateVector& state, const AxisSystem& system,
                   FormationSnapshot& snapshot);

// One fixed-step 4th-order Runge-Kutta update over all axis systems:
// integrated cars advance under their control laws, exogenous cars follow
// their input signals, aliased boundary cars re-synchronize to their
// reference car. Throws NonFiniteState when a coordinate leaves the finite
// range.
FormationSnapshot step(const FormationSnapshot& snapshot,
                       const std::vector<AxisSystem>& systems, double t,
                       double dt);

// Shift a state by a position-only jump. Throws VelocityJump when the
// velocity block of `delta` is nonzero.
StateVector apply_impulse(const StateVector& state, const Eigen::VectorXd& delta);

}  // namespace laneless
