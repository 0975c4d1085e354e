#include "laneless/types.hpp"

#include <algorithm>

namespace laneless {

const char* role_name(CarRole role) {
  switch (role) {
    case CarRole::PhantomLeader: return "phantom-leader";
    case CarRole::Boundary: return "boundary";
    case CarRole::Obstacle: return "obstacle";
    case CarRole::Regular: return "regular";
  }
  return "regular";
}

CarRole role_from_name(const std::string& name) {
  if (name == "phantom-leader") return CarRole::PhantomLeader;
  if (name == "boundary") return CarRole::Boundary;
  if (name == "obstacle") return CarRole::Obstacle;
  if (name == "regular") return CarRole::Regular;
  throw SimError(ErrorCode::ScenarioInvalid, "unknown car role '" + name + "'");
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingLeader: return "MissingLeader";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::SingularLevel: return "SingularLevel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroSpacing: return "ZeroSpacing";
    case ErrorCode::VelocityJump: return "VelocityJump";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::SpanningTreeLost: return "SpanningTreeLost";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
  }
  return "Unknown";
}

bool FormationSnapshot::has(CarId id) const {
  return std::any_of(cars.begin(), cars.end(),
                     [id](const Car& c) { return c.id == id; });
}

const Car& FormationSnapshot::by_id(CarId id) const {
  for (const Car& c : cars)
    if (c.id == id) return c;
  throw SimError(ErrorCode::ScenarioInvalid,
                 "no car with id " + std::to_string(id));
}

Car& FormationSnapshot::by_id(CarId id) {
  for (Car& c : cars)
    if (c.id == id) return c;
  throw SimError(ErrorCode::ScenarioInvalid,
                 "no car with id " + std::to_string(id));
}

const Car* FormationSnapshot::phantom_leader() const {
  for (const Car& c : cars)
    if (c.role == CarRole::PhantomLeader) return &c;
  return nullptr;
}

void FormationSnapshot::sort_by_id() {
  std::sort(cars.begin(), cars.end(),
            [](const Car& a, const Car& b) { return a.id < b.id; });
}

std::vector<CarId> FormationSnapshot::ids() const {
  std::vector<CarId> out;
  out.reserve(cars.size());
  for (const Car& c : cars) out.push_back(c.id);
  return out;
}

void GeometryParams::validate() const {
  if (!(aov_y_deg > 0.0 && aov_y_deg <= aov_x_deg && aov_x_deg <= 180.0))
    throw SimError(ErrorCode::ScenarioInvalid,
                   "viewing angles must satisfy 0 < aov_y <= aov_x <= 180");
  if (influence_depth < 1)
    throw SimError(ErrorCode::ScenarioInvalid, "influence_depth must be >= 1");
  if (max_per_level < 1)
    throw SimError(ErrorCode::ScenarioInvalid, "max_per_level must be >= 1");
  if (switch_margin_deg < 0.0)
    throw SimError(ErrorCode::ScenarioInvalid, "switch_margin_deg must be >= 0");
}

void GainParams::validate() const {
  // b = 0 is accepted so that undamped configurations can still be analyzed;
  // the spectrum report flags them as non-Hurwitz.
  if (b < 0.0 || b_x < 0.0)
    throw SimError(ErrorCode::ScenarioInvalid, "velocity gains must be >= 0");
  if (!(k > 0.0 && k_x > 0.0))
    throw SimError(ErrorCode::ScenarioInvalid, "position gains must be > 0");
  if (!(g_y > 0.0 && g_x > 0.0))
    throw SimError(ErrorCode::ScenarioInvalid, "spacing constants must be > 0");
  if (!(W > 0.0))
    throw SimError(ErrorCode::ScenarioInvalid, "weight sum W must be > 0");
}

void IntegrationSettings::validate() const {
  if (!(dt > 0.0))
    throw SimError(ErrorCode::ScenarioInvalid, "dt must be > 0");
  if (t_end < 0.0)
    throw SimError(ErrorCode::ScenarioInvalid, "t_end must be >= 0");
}

}  // namespace laneless
