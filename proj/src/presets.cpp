#include "laneless/presets.hpp"

namespace laneless::presets {

namespace {

// Fixed unit-amplitude perturbation tables, one entry per car 1..16.
constexpr double kDy[16] = {0.3, -0.8, 0.5,  -0.2, 0.9,  -0.4, 0.1,  0.7,
                            -0.6, 0.2, -0.9, 0.4,  0.8,  -0.3, 0.6,  -0.7};
constexpr double kDx[16] = {0.0, 0.5,  -0.7, 0.3,  0.0,  -0.4, 0.8,  -0.2,
                            0.0, 0.6,  -0.3, 0.9,  0.0,  -0.8, 0.2,  0.5};
constexpr double kDvy[16] = {0.2, -0.5, 0.8,  -0.9, 0.4,  0.6,  -0.3, 0.1,
                             -0.7, 0.9, 0.3,  -0.4, 0.5,  -0.2, -0.8, 0.7};
constexpr double kDvx[16] = {0.0, 0.3,  -0.5, 0.2,  0.0,  0.7,  -0.1, -0.6,
                             0.0, -0.4, 0.5,  0.3,  0.0,  0.1,  -0.7, 0.4};

// Four levels of four cars; slots[r] gives the lateral offset (in g_x units)
// of the car with within-level rank r, rank 0 being the boundary car at the
// road edge x = 0.
Scenario formation16(const std::string& name, const Eigen::VectorXd& tmpl,
                     double pos_scale, double vel_scale, double v0) {
  Scenario sc;
  sc.name = name;
  sc.leader_v0 = v0;
  sc.settings.dt = 0.1;
  sc.x_template = tmpl;

  sc.initial.cars.push_back({0, CarRole::PhantomLeader, -45.0, 0.0, 0.0, v0});
  for (int level = 1; level <= 4; ++level) {
    for (int rank = 0; rank < 4; ++rank) {
      const int idx = 4 * (level - 1) + rank;  // table index, car id = idx + 1
      Car c;
      c.id = idx + 1;
      c.role = rank == 0 ? CarRole::Boundary : CarRole::Regular;
      const double slot = tmpl(idx);
      c.x = rank == 0 ? 0.0 : 30.0 * slot + 2.0 * pos_scale * kDx[idx];
      c.y = -50.0 * level + 6.0 * pos_scale * kDy[idx];
      c.vx = rank == 0 ? 0.0 : 0.3 * vel_scale * kDvx[idx];
      c.vy = v0 + 1.5 * vel_scale * kDvy[idx];
      sc.initial.cars.push_back(c);
    }
  }
  return sc;
}

Eigen::VectorXd wide_template() {
  Eigen::VectorXd t(16);
  for (int level = 0; level < 4; ++level)
    for (int rank = 0; rank < 4; ++rank) t(4 * level + rank) = -rank;
  return t;
}

Eigen::VectorXd mixed_template(bool compress_2_and_4) {
  Eigen::VectorXd t = wide_template();
  for (int level = 0; level < 4; ++level) {
    const bool narrow =
        compress_2_and_4 ? (level == 1 || level == 3) : (level == 2);
    if (narrow)
      for (int rank = 0; rank < 4; ++rank) t(4 * level + rank) = -0.5 * rank;
  }
  return t;
}

}  // namespace

Scenario steady_flow_16() {
  Scenario sc = formation16("steady-flow-16", wide_template(), 1.0, 1.0, 10.0);
  sc.settings.t_end = 8000.0;
  return sc;
}

Scenario formation_change_16() {
  Scenario sc = formation16("formation-change-16", mixed_template(false), 0.05,
                            0.05, 10.0);
  sc.settings.t_end = 5000.0;
  Event e;
  e.kind = EventKind::FormationChange;
  e.at = 2500.0;
  e.x_template = mixed_template(true);
  sc.events.push_back(e);
  return sc;
}

Scenario obstacle_16() {
  Scenario sc = formation16("obstacle-16", wide_template(), 0.01, 0.01, 1.0);
  sc.settings.t_end = 4500.0;
  Event appear;
  appear.kind = EventKind::ObstacleAppear;
  appear.at = 400.0;
  appear.x = -82.0;
  appear.y = 290.0;  // just behind level 2 at that time, ahead of level 3
  sc.events.push_back(appear);
  Event remove;
  remove.kind = EventKind::ObstacleRemove;
  remove.at = 700.0;
  sc.events.push_back(remove);
  return sc;
}

Scenario lane_change_16() {
  Scenario sc =
      formation16("lane-change-16", wide_template(), 0.01, 0.01, 10.0);
  sc.settings.t_end = 6000.0;
  Event e;
  e.kind = EventKind::LaneChange;
  e.t0 = 1000.0;
  e.t1 = 1400.0;
  e.car = 6;
  e.x_target = -120.0;
  sc.events.push_back(e);
  return sc;
}

Scenario chain_3() {
  Scenario sc;
  sc.name = "chain-3";
  sc.leader_v0 = 10.0;
  sc.settings.dt = 0.1;
  sc.settings.t_end = 400.0;
  sc.initial.cars.push_back({0, CarRole::PhantomLeader, 0.0, 0.0, 0.0, 10.0});
  sc.initial.cars.push_back({1, CarRole::Regular, 0.0, -57.0, 0.0, 10.8});
  sc.initial.cars.push_back({2, CarRole::Regular, 0.0, -104.0, 0.0, 9.1});
  return sc;
}

}  // namespace laneless::presets
