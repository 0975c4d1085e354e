#include "laneless/trace.hpp"

namespace laneless {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::FormationChange: return "formation-change";
    case EventKind::GyChange: return "gy-change";
    case EventKind::ObstacleAppear: return "obstacle-appear";
    case EventKind::ObstacleRemove: return "obstacle-remove";
    case EventKind::LaneChange: return "lane-change";
  }
  return "gy-change";
}

EventKind event_kind_from_name(const std::string& name) {
  if (name == "formation-change") return EventKind::FormationChange;
  if (name == "gy-change") return EventKind::GyChange;
  if (name == "obstacle-appear") return EventKind::ObstacleAppear;
  if (name == "obstacle-remove") return EventKind::ObstacleRemove;
  if (name == "lane-change") return EventKind::LaneChange;
  throw SimError(ErrorCode::ScenarioInvalid, "unknown event kind '" + name + "'");
}

}  // namespace laneless
