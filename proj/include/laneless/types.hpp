// Core value types shared by the formation simulator.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace laneless {

using CarId = int;
inline constexpr CarId kLeaderId = 0;

enum class Axis { X, Y };
inline const char* axis_name(Axis a) { return a == Axis::X ? "X" : "Y"; }

enum class CarRole { PhantomLeader, Boundary, Obstacle, Regular };
const char* role_name(CarRole role);
CarRole role_from_name(const std::string& name);

enum class ErrorCode {
  MissingLeader,
  DegenerateGeometry,
  Unreachable,
  IsolatedNode,
  SingularLevel,
  DimensionMismatch,
  ZeroSpacing,
  VelocityJump,
  NonFiniteState,
  SpanningTreeLost,
  ScenarioInvalid,
};
const char* error_code_name(ErrorCode code);

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Car {
  CarId id = 0;
  CarRole role = CarRole::Regular;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

// Kinematic state of every car at one instant. Cars are kept sorted by id.
struct FormationSnapshot {
  std::vector<Car> cars;

  bool has(CarId id) const;
  const Car& by_id(CarId id) const;
  Car& by_id(CarId id);
  const Car* phantom_leader() const;  // nullptr when absent
  void sort_by_id();
  std::vector<CarId> ids() const;
};

struct GeometryParams {
  double aov_y_deg = 120.0;  // forward viewing angle
  double aov_x_deg = 180.0;  // lateral viewing angle
  int influence_depth = 1;   // max level span an influence edge may cross
  int max_per_level = 4;
  double switch_margin_deg = 0.0;  // hysteresis half-width at the cone boundary
  void validate() const;
};

struct GainParams {
  double b = 0.4;     // velocity coupling, travel direction
  double k = 0.001;   // position coupling, travel direction
  double b_x = 0.4;   // velocity coupling, lateral direction
  double k_x = 0.001; // position coupling, lateral direction
  double g_y = 50.0;  // target gap between consecutive levels (scaled by 1/W)
  double g_x = 30.0;  // target lateral gap inside a level
  double W = 1.0;     // common incoming weight sum per node
  void validate() const;
};

struct IntegrationSettings {
  double dt = 0.1;
  double t_end = 0.0;
  void validate() const;
};

// Stacked [positions; velocities] over the integrated cars of one axis.
struct StateVector {
  Axis axis = Axis::Y;
  Eigen::VectorXd data;

  Eigen::Index m() const { return data.size() / 2; }
  Eigen::VectorBlock<Eigen::VectorXd> positions() { return data.head(m()); }
  Eigen::VectorBlock<const Eigen::VectorXd> positions() const { return data.head(m()); }
  Eigen::VectorBlock<Eigen::VectorXd> velocities() { return data.tail(m()); }
  Eigen::VectorBlock<const Eigen::VectorXd> velocities() const { return data.tail(m()); }
};

}  // namespace laneless
