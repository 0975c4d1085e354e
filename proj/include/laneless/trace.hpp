// Recorded output of a simulation run.
#pragma once

#include <string>
#include <vector>

#include "laneless/graph.hpp"
#include "laneless/types.hpp"

namespace laneless {

enum class EventKind {
  FormationChange,
  GyChange,
  ObstacleAppear,
  ObstacleRemove,
  LaneChange,
};
const char* event_kind_name(EventKind kind);
EventKind event_kind_from_name(const std::string& name);

struct TraceSample {
  double t = 0.0;
  FormationSnapshot snapshot;
  LevelMap levels;  // per car, obstacles carry no entry
};

struct SwitchRecord {
  double t = 0.0;
  Axis axis = Axis::Y;
  std::vector<Edge> added;
  std::vector<Edge> removed;
};

struct AppliedEvent {
  double t = 0.0;
  EventKind kind = EventKind::GyChange;
  std::string description;
  // Shifted-coordinate jump bookkeeping for spacing changes (advisory).
  bool has_impulse = false;
  bool admissible = false;
  double norm_before = 0.0;
  double norm_after = 0.0;
  double delta_g_y = 0.0;  // for gy-change events
};

struct Trace {
  std::vector<TraceSample> samples;       // first sample at t = 0
  std::vector<AppliedEvent> event_log;
  std::vector<SwitchRecord> switch_log;
  std::vector<std::string> warnings;      // e.g. cars covered only by an obstacle
  int decimation = 1;
};

}  // namespace laneless
