#include "laneless/dynamics.hpp"

#include <cmath>

namespace laneless {

double y_acceleration(CarId car, const FormationSnapshot& snapshot,
                      const InfluenceGraph& y_graph, const GainParams& gains) {
  const Car& self = snapshot.by_id(car);
  const std::vector<Edge> in = y_graph.in_edges(car);
  double wsum = 0.0;
  for (const Edge& e : in) wsum += e.weight;
  double acc = 0.0;
  for (const Edge& e : in) {
    const Car& other = snapshot.by_id(e.from);
    acc += gains.b * e.weight * (other.vy - self.vy) +
           gains.k * (e.weight * (other.y - self.y) -
                      (e.weight / wsum) * gains.g_y);
  }
  return acc;
}

double x_acceleration(CarId car, const FormationSnapshot& snapshot,
                      const InfluenceGraph& x_graph, const GainParams& gains,
                      const Eigen::VectorXd& c_full,
                      const std::vector<CarId>& c_ordering) {
  const Car& self = snapshot.by_id(car);
  double acc = 0.0;
  for (const Edge& e : x_graph.in_edges(car)) {
    const Car& other = snapshot.by_id(e.from);
    acc += gains.b_x * e.weight * (other.vx - self.vx) +
           gains.k_x * e.weight * (other.x - self.x);
  }
  for (size_t i = 0; i < c_ordering.size(); ++i)
    if (c_ordering[i] == car) {
      acc += gains.k_x * gains.g_x * c_full(static_cast<Eigen::Index>(i));
      return acc;
    }
  throw SimError(ErrorCode::DimensionMismatch,
                 "car " + std::to_string(car) + " has no offset constant");
}

double InputSignal::position(double t) const {
  if (kind == Kind::Linear) return p0 + v * (t - t_ref);
  if (t <= t0) return p_start;
  if (t >= t1) return p_end;
  const double s = (t - t0) / (t1 - t0);
  return p_start + (p_end - p_start) * (3.0 * s * s - 2.0 * s * s * s);
}

double InputSignal::velocity(double t) const {
  if (kind == Kind::Linear) return v;
  if (t <= t0 || t >= t1) return 0.0;
  const double s = (t - t0) / (t1 - t0);
  return (p_end - p_start) * 6.0 * s * (1.0 - s) / (t1 - t0);
}

InputSignal InputSignal::constant(double p) {
  InputSignal sig;
  sig.kind = Kind::Linear;
  sig.p0 = p;
  return sig;
}

InputSignal InputSignal::linear(double p0, double v, double t_ref) {
  InputSignal sig;
  sig.kind = Kind::Linear;
  sig.p0 = p0;
  sig.v = v;
  sig.t_ref = t_ref;
  return sig;
}

InputSignal InputSignal::cubic(double t0, double t1, double p_start,
                               double p_end) {
  if (!(t1 > t0))
    throw SimError(ErrorCode::ScenarioInvalid,
                   "profile interval must have t0 < t1");
  InputSignal sig;
  sig.kind = Kind::Cubic;
  sig.t0 = t0;
  sig.t1 = t1;
  sig.p_start = p_start;
  sig.p_end = p_end;
  return sig;
}

Eigen::VectorXd AxisSystem::acceleration(double t, const Eigen::VectorXd& pos,
                                         const Eigen::VectorXd& vel) const {
  Eigen::VectorXd state(2 * m());
  state << pos, vel;
  Eigen::VectorXd d;
  deriv_into(t, state, d);
  return d.tail(m());
}

void AxisSystem::deriv_into(double t, const Eigen::VectorXd& state,
                            Eigen::VectorXd& out) const {
  const Eigen::Index n = m();
  out.resize(2 * n);
  out.head(n) = state.tail(n);
  out.tail(n) = offset;
  out.tail(n).noalias() -= k * (bundle.reduced * state.head(n));
  out.tail(n).noalias() -= b * (bundle.reduced * state.tail(n));
  if (!inputs.empty()) {
    Eigen::VectorXd mix(static_cast<Eigen::Index>(inputs.size()));
    for (size_t i = 0; i < inputs.size(); ++i)
      mix(static_cast<Eigen::Index>(i)) =
          k * inputs[i].position(t) + b * inputs[i].velocity(t);
    out.tail(n).noalias() += bundle.leader_cols * mix;
  }
}

StateVector gather_state(const FormationSnapshot& snapshot,
                         const AxisSystem& system) {
  StateVector state;
  state.axis = system.axis;
  const Eigen::Index m = system.m();
  state.data.resize(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Car& c = snapshot.by_id(system.bundle.states[static_cast<size_t>(i)]);
    state.data(i) = system.axis == Axis::Y ? c.y : c.x;
    state.data(m + i) = system.axis == Axis::Y ? c.vy : c.vx;
  }
  return state;
}

void scatter_state(const StateVector& state, const AxisSystem& system,
                   FormationSnapshot& snapshot) {
  const Eigen::Index m = system.m();
  for (Eigen::Index i = 0; i < m; ++i) {
    Car& c = snapshot.by_id(system.bundle.states[static_cast<size_t>(i)]);
    if (system.axis == Axis::Y) {
      c.y = state.data(i);
      c.vy = state.data(m + i);
    } else {
      c.x = state.data(i);
      c.vx = state.data(m + i);
    }
  }
}

FormationSnapshot step(const FormationSnapshot& snapshot,
                       const std::vector<AxisSystem>& systems, double t,
                       double dt) {
  if (!(dt > 0.0))
    throw SimError(ErrorCode::ScenarioInvalid, "dt must be > 0");

  FormationSnapshot next = snapshot;
  Eigen::VectorXd k1, k2, k3, k4, stage;
  for (const AxisSystem& sys : systems) {
    const Eigen::Index m = sys.m();
    if (m == 0) continue;
    StateVector s = gather_state(snapshot, sys);

    sys.deriv_into(t, s.data, k1);
    stage = s.data + (0.5 * dt) * k1;
    sys.deriv_into(t + 0.5 * dt, stage, k2);
    stage = s.data + (0.5 * dt) * k2;
    sys.deriv_into(t + 0.5 * dt, stage, k3);
    stage = s.data + dt * k3;
    sys.deriv_into(t + dt, stage, k4);
    s.data += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    scatter_state(s, sys, next);
  }

  // Exogenous cars follow their input signals.
  const double t1 = t + dt;
  for (const AxisSystem& sys : systems) {
    for (size_t i = 0; i < sys.inputs.size(); ++i) {
      if (!next.has(sys.bundle.inputs[i])) continue;
      Car& c = next.by_id(sys.bundle.inputs[i]);
      if (sys.axis == Axis::Y) {
        c.y = sys.inputs[i].position(t1);
        c.vy = sys.inputs[i].velocity(t1);
      } else {
        c.x = sys.inputs[i].position(t1);
        c.vx = sys.inputs[i].velocity(t1);
      }
    }
  }

  // Boundary pseudo-cars mirror their reference car.
  for (const AxisSystem& sys : systems) {
    if (sys.axis != Axis::Y) continue;
    for (const auto& [aliased, ref] : sys.partition.alias) {
      if (!next.has(aliased)) continue;
      Car& c = next.by_id(aliased);
      const Car& r = next.by_id(ref);
      c.y = r.y;
      c.vy = r.vy;
    }
  }

  for (const Car& c : next.cars)
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.vx) ||
        !std::isfinite(c.vy))
      throw SimError(ErrorCode::NonFiniteState,
                     "car " + std::to_string(c.id) +
                         " left the finite range at t = " + std::to_string(t1) +
                         "; check the gain configuration");
  return next;
}

StateVector apply_impulse(const StateVector& state,
                          const Eigen::VectorXd& delta) {
  if (delta.size() != state.data.size())
    throw SimError(ErrorCode::DimensionMismatch,
                   "impulse delta must match the state dimension");
  const Eigen::Index m = state.m();
  if (m > 0 && delta.tail(m).cwiseAbs().maxCoeff() != 0.0)
    throw SimError(ErrorCode::VelocityJump,
                   "impulses may only shift positions; velocities stay "
                   "continuous");
  StateVector out = state;
  out.positions() += delta.head(m);
  return out;
}

}  // namespace laneless
