// End-to-end simulation: event scheduling, per-step graph re-derivation,
// obstacle and lane-change orchestration, trace recording.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "laneless/dynamics.hpp"
#include "laneless/trace.hpp"
#include "laneless/types.hpp"

namespace laneless {

struct Event {
  EventKind kind = EventKind::GyChange;
  double at = 0.0;                // instant events
  double t0 = 0.0, t1 = 0.0;      // lane-change interval
  Eigen::VectorXd x_template;     // formation-change: entry per non-leader car
  double delta_g_y = 0.0;         // gy-change
  double x = 0.0, y = 0.0;        // obstacle-appear position
  CarId car = -1;                 // lane-change car
  double x_target = 0.0;          // lane-change destination
};
bool operator==(const Event& a, const Event& b);

struct Scenario {
  std::string name;
  FormationSnapshot initial;      // canonically numbered, leader id 0
  GainParams gains;
  GeometryParams geom;
  IntegrationSettings settings;
  double leader_v0 = 10.0;
  // Lateral formation template: one entry per non-leader car in id order,
  // in units of g_x relative to the level's boundary anchor (leftward
  // entries are negative). Empty means one slot per within-level rank.
  Eigen::VectorXd x_template;
  std::vector<Event> events;

  // Structural validation: parameter ranges, canonical numbering, initial
  // spanning trees, event sanity. Throws SimError on violation.
  void validate() const;
};
bool operator==(const Scenario& a, const Scenario& b);

// Renumber an arbitrarily labelled snapshot into canonical order and return
// the scenario with ids remapped (template and event car references follow).
Scenario canonicalize_scenario(const Scenario& raw);

struct GraphPair {
  InfluenceGraph y;
  InfluenceGraph x;
};

struct WiringResult {
  GraphPair graphs;
  std::vector<CarId> obstacle_only_cars;  // cars whose only input is the obstacle
};

// Wire a stationary obstacle into both influence graphs as an input-only
// node: every regular car whose viewing region contains it gains an incoming
// edge, with its weights renormalized to sum W. Cars left with no other
// in-neighbour are reported (the run continues; stability is no longer
// certified for them).
WiringResult obstacle_wiring(const FormationSnapshot& snapshot, CarId obstacle,
                             const GraphPair& graphs,
                             const GeometryParams& geom, double W);

// Externally imposed lateral trajectory of a lane-changing car.
std::pair<double, double> lane_change_input(const InputSignal& profile,
                                            double t);

// Snapshot of one influence-graph configuration met during a run, captured
// so each distinct topology can be analyzed.
struct ModeCapture {
  double t = 0.0;
  FormationSnapshot snapshot;
  LevelMap levels;
  InfluenceGraph y;
  InfluenceGraph x;
  bool x_present = false;
};

struct RunOptions {
  int decimation = 1;  // record every N-th step (first and last always kept)
  std::vector<ModeCapture>* capture_modes = nullptr;
};

Trace run(const Scenario& scenario, const RunOptions& options = {});

struct RunSummary {
  double t_end = 0.0;
  double max_abs_vy_dev = 0.0;       // final sample, vs the leader velocity
  double level_gap_min = 0.0;        // consecutive-level forward gaps
  double level_gap_max = 0.0;
  double same_level_y_spread = 0.0;  // worst in-level forward disagreement
  double lateral_gap_min = 0.0;      // adjacent in-level lateral gaps
  double lateral_gap_max = 0.0;
  double convergence_time = -1.0;    // first time |vy - v0| stays < 1e-4
  int switch_count = 0;
  int events_applied = 0;
};
RunSummary summarize(const Trace& trace, const Scenario& scenario);

}  // namespace laneless
