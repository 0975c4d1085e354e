#include "laneless/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "laneless/equilibrium.hpp"
#include "laneless/log.hpp"

namespace laneless {

namespace {

bool vec_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.size() == 0 || (a.array() == b.array()).all());
}

bool car_equal(const Car& a, const Car& b) {
  return a.id == b.id && a.role == b.role && a.x == b.x && a.y == b.y &&
         a.vx == b.vx && a.vy == b.vy;
}

}  // namespace

bool operator==(const Event& a, const Event& b) {
  return a.kind == b.kind && a.at == b.at && a.t0 == b.t0 && a.t1 == b.t1 &&
         vec_equal(a.x_template, b.x_template) && a.delta_g_y == b.delta_g_y &&
         a.x == b.x && a.y == b.y && a.car == b.car && a.x_target == b.x_target;
}

bool operator==(const Scenario& a, const Scenario& b) {
  if (a.name != b.name || a.leader_v0 != b.leader_v0) return false;
  if (a.initial.cars.size() != b.initial.cars.size()) return false;
  for (size_t i = 0; i < a.initial.cars.size(); ++i)
    if (!car_equal(a.initial.cars[i], b.initial.cars[i])) return false;
  const GainParams &ga = a.gains, &gb = b.gains;
  if (ga.b != gb.b || ga.k != gb.k || ga.b_x != gb.b_x || ga.k_x != gb.k_x ||
      ga.g_y != gb.g_y || ga.g_x != gb.g_x || ga.W != gb.W)
    return false;
  const GeometryParams &ma = a.geom, &mb = b.geom;
  if (ma.aov_y_deg != mb.aov_y_deg || ma.aov_x_deg != mb.aov_x_deg ||
      ma.influence_depth != mb.influence_depth ||
      ma.max_per_level != mb.max_per_level ||
      ma.switch_margin_deg != mb.switch_margin_deg)
    return false;
  if (a.settings.dt != b.settings.dt || a.settings.t_end != b.settings.t_end)
    return false;
  if (!vec_equal(a.x_template, b.x_template)) return false;
  if (a.events.size() != b.events.size()) return false;
  for (size_t i = 0; i < a.events.size(); ++i)
    if (!(a.events[i] == b.events[i])) return false;
  return true;
}

void Scenario::validate() const {
  gains.validate();
  geom.validate();
  settings.validate();
  if (!std::isfinite(leader_v0))
    throw SimError(ErrorCode::ScenarioInvalid, "leader_v0 must be finite");

  if (initial.cars.empty())
    throw SimError(ErrorCode::ScenarioInvalid, "scenario has no cars");
  int leaders = 0;
  for (size_t i = 0; i < initial.cars.size(); ++i) {
    const Car& c = initial.cars[i];
    if (c.id != static_cast<CarId>(i))
      throw SimError(ErrorCode::ScenarioInvalid,
                     "car ids must be contiguous from 0; found gap at id " +
                         std::to_string(c.id));
    if (c.role == CarRole::PhantomLeader) {
      ++leaders;
      if (c.id != kLeaderId)
        throw SimError(ErrorCode::MissingLeader,
                       "the phantom leader must carry id 0");
    }
    if (c.role == CarRole::Obstacle)
      throw SimError(ErrorCode::ScenarioInvalid,
                     "obstacles enter through events, not the initial state");
    if (c.role == CarRole::Boundary && c.vx != 0.0)
      throw SimError(ErrorCode::ScenarioInvalid,
                     "boundary car " + std::to_string(c.id) +
                         " must have zero lateral velocity");
  }
  if (leaders != 1)
    throw SimError(ErrorCode::MissingLeader,
                   "scenario requires exactly one phantom leader");

  const InfluenceGraph gy = build_influence_graph(initial, Axis::Y, geom);
  const LevelMap levels = assign_levels(gy);
  const std::vector<CarId> order = canonical_numbering(initial, levels);
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i] != static_cast<CarId>(i))
      throw SimError(ErrorCode::ScenarioInvalid,
                     "cars are not canonically numbered: position " +
                         std::to_string(i) + " should hold car " +
                         std::to_string(order[i]));
  if (!has_directed_spanning_tree(gy))
    throw SimError(ErrorCode::ScenarioInvalid,
                   "initial forward graph has no spanning tree from node 0");
  axis_partition(initial, Axis::Y, levels);  // boundary aliases must resolve
  if (initial.cars.size() > 1) {
    const InfluenceGraph gx = build_influence_graph(initial, Axis::X, geom);
    if (!has_directed_spanning_tree(gx))
      throw SimError(ErrorCode::ScenarioInvalid,
                     "initial lateral graph has no spanning tree from node 1");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(initial.cars.size()) - 1;
  if (x_template.size() != 0 && x_template.size() != n)
    throw SimError(ErrorCode::DimensionMismatch,
                   "x_template needs one entry per non-leader car");

  double g = gains.g_y;
  int active_obstacles = 0;
  for (const Event& e : events) {
    switch (e.kind) {
      case EventKind::GyChange:
        g += e.delta_g_y;
        if (!(g > 0.0))
          throw SimError(ErrorCode::ScenarioInvalid,
                         "gy-change would make the spacing non-positive");
        break;
      case EventKind::FormationChange:
        if (e.x_template.size() != n)
          throw SimError(ErrorCode::DimensionMismatch,
                         "formation-change template needs one entry per "
                         "non-leader car");
        break;
      case EventKind::ObstacleAppear:
        if (++active_obstacles > 1)
          throw SimError(ErrorCode::ScenarioInvalid,
                         "at most one obstacle may be active at a time");
        break;
      case EventKind::ObstacleRemove:
        if (--active_obstacles < 0)
          throw SimError(ErrorCode::ScenarioInvalid,
                         "obstacle-remove without an active obstacle");
        break;
      case EventKind::LaneChange: {
        if (!(e.t0 >= 0.0 && e.t0 < e.t1 && e.t1 <= settings.t_end))
          throw SimError(ErrorCode::ScenarioInvalid,
                         "lane-change interval must satisfy 0 <= t0 < t1 <= "
                         "t_end");
        if (!initial.has(e.car) ||
            initial.by_id(e.car).role != CarRole::Regular)
          throw SimError(ErrorCode::ScenarioInvalid,
                         "lane-change car must be a regular car");
        break;
      }
    }
    if (e.kind != EventKind::LaneChange &&
        !(e.at >= 0.0 && e.at <= settings.t_end))
      throw SimError(ErrorCode::ScenarioInvalid,
                     "event time outside [0, t_end]");
  }
}

Scenario canonicalize_scenario(const Scenario& raw) {
  const InfluenceGraph gy = build_influence_graph(raw.initial, Axis::Y, raw.geom);
  const LevelMap levels = assign_levels(gy);
  const std::vector<CarId> order = canonical_numbering(raw.initial, levels);

  Scenario out = raw;
  out.initial = renumber(raw.initial, order);

  std::map<CarId, CarId> new_id;
  for (size_t i = 0; i < order.size(); ++i)
    new_id[order[i]] = static_cast<CarId>(i);

  // Non-leader template entries follow their cars.
  std::vector<CarId> raw_ids;
  for (const Car& c : raw.initial.cars)
    if (c.role != CarRole::PhantomLeader) raw_ids.push_back(c.id);
  std::sort(raw_ids.begin(), raw_ids.end());
  auto remap_template = [&](const Eigen::VectorXd& t) {
    if (t.size() == 0) return t;
    Eigen::VectorXd mapped(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const CarId nid = new_id.at(raw_ids[static_cast<size_t>(i)]);
      mapped(nid - 1) = t(i);
    }
    return mapped;
  };
  out.x_template = remap_template(raw.x_template);
  for (Event& e : out.events) {
    if (e.kind == EventKind::FormationChange)
      e.x_template = remap_template(e.x_template);
    if (e.kind == EventKind::LaneChange) e.car = new_id.at(e.car);
  }
  return out;
}

WiringResult obstacle_wiring(const FormationSnapshot& snapshot, CarId obstacle,
                             const GraphPair& graphs,
                             const GeometryParams& geom, double W) {
  const Car& obs = snapshot.by_id(obstacle);
  if (obs.role != CarRole::Obstacle)
    throw SimError(ErrorCode::ScenarioInvalid,
                   "car " + std::to_string(obstacle) + " is not an obstacle");

  WiringResult result;
  result.graphs = graphs;
  std::set<CarId> influenced;

  for (InfluenceGraph* g : {&result.graphs.y, &result.graphs.x}) {
    if (g->nodes.empty()) continue;
    bool wired = false;
    for (CarId id : g->nodes) {
      if (!snapshot.has(id)) continue;
      const Car& car = snapshot.by_id(id);
      if (car.role != CarRole::Regular) continue;
      if (!in_viewing_region(car, obs, g->axis, geom)) continue;
      // The new edge takes the node's mean incoming weight, then the node is
      // renormalized so its total stays W.
      const std::vector<Edge> in = g->in_edges(id);
      const double mean =
          in.empty() ? W
                     : g->in_weight_sum(id) / static_cast<double>(in.size());
      g->edges.push_back({obstacle, id, mean});
      const double total = g->in_weight_sum(id);
      for (Edge& e : g->edges)
        if (e.to == id) e.weight *= W / total;
      wired = true;
      influenced.insert(id);
      if (in.empty()) result.obstacle_only_cars.push_back(id);
    }
    if (wired) {
      g->nodes.push_back(obstacle);
      std::sort(g->nodes.begin(), g->nodes.end());
      g->aux_inputs.push_back(obstacle);
      g->sort_edges();
    }
  }
  return result;
}

std::pair<double, double> lane_change_input(const InputSignal& profile,
                                            double t) {
  return {profile.position(t), profile.velocity(t)};
}

namespace {

// Per-level lateral slot assignment: cars of a level take the level's
// template entries in order of decreasing x (the rightmost car holds the
// first slot), anchored at the level's boundary car.
struct Slots {
  std::map<CarId, double> slot;
  std::map<int, double> anchor;
  bool operator==(const Slots& other) const {
    return slot == other.slot && anchor == other.anchor;
  }
};

class Engine {
 public:
  Engine(const Scenario& scenario, const RunOptions& options)
      : sc_(scenario), opt_(options), snap_(scenario.initial) {
    sc_.validate();
    if (opt_.decimation < 1)
      throw SimError(ErrorCode::ScenarioInvalid, "decimation must be >= 1");
    dt_ = sc_.settings.dt;
    n_steps_ = std::llround(sc_.settings.t_end / dt_);
    g_y_ = sc_.gains.g_y;

    // Load-time levels freeze the per-level slot lists.
    load_levels_ = assign_levels(build_influence_graph(snap_, Axis::Y, sc_.geom));
    set_template(sc_.x_template);
    quantize_events();
  }

  Trace run();

 private:
  void set_template(const Eigen::VectorXd& tmpl);
  void quantize_events();
  void apply_due_events(long n);
  void maybe_capture(double t);
  void derive_graphs(double t, bool log_switches);
  void rebuild_systems(double t);
  void sync_boundaries();
  Slots compute_slots(const LevelMap& levels) const;
  Eigen::VectorXd lateral_plan(const InfluenceGraph& plain_x) const;
  double forward_shift_norm(double g_y) const;
  double lateral_shift_norm(const Slots& slots) const;
  void record_sample(double t);

  Scenario sc_;
  RunOptions opt_;
  FormationSnapshot snap_;
  double dt_ = 0.1;
  long n_steps_ = 0;
  double g_y_ = 50.0;

  LevelMap load_levels_;
  std::map<CarId, double> tmpl_entry_;        // per non-leader car
  std::map<int, std::vector<double>> slot_list_;  // per load-time level

  InfluenceGraph gy_, gx_, plain_x_;
  bool have_graphs_ = false;
  bool x_present_ = false;
  LevelMap levels_;
  Slots slots_;
  std::vector<AxisSystem> systems_;
  AxisPartition y_partition_;
  bool dirty_ = true;

  CarId obstacle_ = -1;
  bool lane_active_ = false;
  CarId lane_car_ = -1;
  long lane_step1_ = 0;
  InputSignal lane_profile_;

  struct QueuedEvent {
    Event event;
    long step = 0;
  };
  std::vector<QueuedEvent> queue_;
  size_t next_event_ = 0;
  std::set<CarId> reported_violations_;

  Trace trace_;
};

void Engine::set_template(const Eigen::VectorXd& tmpl) {
  tmpl_entry_.clear();
  Eigen::Index idx = 0;
  for (const Car& c : sc_.initial.cars) {
    if (c.role == CarRole::PhantomLeader) continue;
    // Missing template: one slot per within-level rank, spaced one g_x apart
    // to the left.
    tmpl_entry_[c.id] = tmpl.size() > 0 ? tmpl(idx) : 0.0;
    ++idx;
  }
  slot_list_.clear();
  for (const auto& [id, level] : load_levels_) {
    if (id == kLeaderId) continue;
    slot_list_[level].push_back(tmpl_entry_.at(id));  // ids ascend with rank
  }
  if (sc_.x_template.size() == 0 && tmpl.size() == 0)
    for (auto& [level, list] : slot_list_)
      for (size_t r = 0; r < list.size(); ++r)
        list[r] = -static_cast<double>(r);
}

void Engine::quantize_events() {
  for (const Event& e : sc_.events) {
    QueuedEvent q;
    q.event = e;
    const double at = e.kind == EventKind::LaneChange ? e.t0 : e.at;
    q.step = std::clamp<long>(std::llround(at / dt_), 0, n_steps_);
    queue_.push_back(q);
  }
  std::stable_sort(queue_.begin(), queue_.end(),
                   [](const QueuedEvent& a, const QueuedEvent& b) {
                     return a.step < b.step;
                   });
}

Slots Engine::compute_slots(const LevelMap& levels) const {
  Slots out;
  std::map<int, std::vector<const Car*>> members;
  for (const Car& c : snap_.cars) {
    if (c.role != CarRole::Regular && c.role != CarRole::Boundary) continue;
    const auto it = levels.find(c.id);
    if (it == levels.end() || it->second < 1) continue;
    members[it->second].push_back(&c);
  }
  for (auto& [level, cars] : members) {
    std::sort(cars.begin(), cars.end(), [](const Car* a, const Car* b) {
      if (a->x != b->x) return a->x > b->x;
      return a->id < b->id;
    });
    std::vector<double> list;
    if (const auto it = slot_list_.find(level); it != slot_list_.end())
      list = it->second;
    if (list.empty()) list.push_back(0.0);
    const double gap =
        list.size() >= 2 ? list.back() - list[list.size() - 2] : -1.0;
    while (list.size() < cars.size()) list.push_back(list.back() + gap);

    double anchor = 0.0;
    for (const Car* c : cars)
      if (c->role == CarRole::Boundary) {
        anchor = c->x;
        break;
      }
    out.anchor[level] = anchor;
    for (size_t r = 0; r < cars.size(); ++r) out.slot[cars[r]->id] = list[r];
  }
  return out;
}

Eigen::VectorXd Engine::lateral_plan(const InfluenceGraph& plain_x) const {
  Eigen::VectorXd xf(static_cast<Eigen::Index>(plain_x.nodes.size()));
  for (size_t i = 0; i < plain_x.nodes.size(); ++i) {
    const Car& c = snap_.by_id(plain_x.nodes[i]);
    if (c.role == CarRole::Regular) {
      const int level = levels_.at(c.id);
      xf(static_cast<Eigen::Index>(i)) =
          slots_.anchor.at(level) / sc_.gains.g_x + slots_.slot.at(c.id);
    } else {
      // Anchors (the reference node and boundary cars) sit where they are.
      xf(static_cast<Eigen::Index>(i)) = c.x / sc_.gains.g_x;
    }
  }
  return xf;
}

void Engine::derive_graphs(double t, bool log_switches) {
  try {
    DerivedGraphs derived = derive_influence_graphs(
        snap_, sc_.geom, have_graphs_ ? &gy_ : nullptr,
        have_graphs_ && x_present_ ? &gx_ : nullptr, true);
    InfluenceGraph new_y = redistribute_weights(std::move(derived.y), sc_.gains.W);
    LevelMap new_levels = std::move(derived.levels);

    x_present_ = derived.x_present;
    InfluenceGraph new_x;
    if (x_present_)
      new_x = redistribute_weights(std::move(derived.x), sc_.gains.W);
    InfluenceGraph new_plain_x = new_x;

    if (obstacle_ >= 0) {
      WiringResult wired = obstacle_wiring(snap_, obstacle_, {new_y, new_x},
                                           sc_.geom, sc_.gains.W);
      new_y = wired.graphs.y;
      new_x = wired.graphs.x;
      for (CarId id : wired.obstacle_only_cars)
        if (reported_violations_.insert(id).second) {
          const std::string msg =
              "car " + std::to_string(id) +
              " is influenced only by the obstacle; stability not certified";
          trace_.warnings.push_back(msg);
          log_info(msg);
        }
    }
    if (lane_active_) new_x.aux_inputs.push_back(lane_car_);

    if (!has_directed_spanning_tree(new_y))
      throw SimError(ErrorCode::SpanningTreeLost,
                     "forward influence graph lost its spanning tree at t = " +
                         std::to_string(t));
    if (x_present_ && !has_directed_spanning_tree(new_x))
      throw SimError(ErrorCode::SpanningTreeLost,
                     "lateral influence graph lost its spanning tree at t = " +
                         std::to_string(t));

    if (log_switches && have_graphs_) {
      const std::pair<const InfluenceGraph*, const InfluenceGraph*> axes[] = {
          {&gy_, &new_y}, {&gx_, &new_x}};
      for (const auto& [before_ptr, after_ptr] : axes) {
        const InfluenceGraph& before = *before_ptr;
        const InfluenceGraph& after = *after_ptr;
        if (before.same_topology(after)) continue;
        SwitchRecord rec;
        rec.t = t;
        rec.axis = after.axis;
        std::set<std::pair<CarId, CarId>> old_pairs, new_pairs;
        for (const Edge& e : before.edges) old_pairs.insert({e.from, e.to});
        for (const Edge& e : after.edges) new_pairs.insert({e.from, e.to});
        for (const Edge& e : after.edges)
          if (!old_pairs.count({e.from, e.to})) rec.added.push_back(e);
        for (const Edge& e : before.edges)
          if (!new_pairs.count({e.from, e.to})) rec.removed.push_back(e);
        trace_.switch_log.push_back(rec);
        dirty_ = true;
      }
    } else if (!have_graphs_) {
      dirty_ = true;
    }

    Slots new_slots = compute_slots(new_levels);
    if (!(new_slots == slots_)) dirty_ = true;

    gy_ = std::move(new_y);
    gx_ = std::move(new_x);
    plain_x_ = std::move(new_plain_x);
    levels_ = std::move(new_levels);
    slots_ = std::move(new_slots);
    have_graphs_ = true;
  } catch (const SimError& err) {
    if (err.code() == ErrorCode::Unreachable)
      throw SimError(ErrorCode::SpanningTreeLost,
                     std::string(err.what()) + " at t = " + std::to_string(t));
    throw;
  }
}

void Engine::rebuild_systems(double t) {
  systems_.clear();

  // Forward axis.
  y_partition_ = axis_partition(snap_, Axis::Y, levels_, {});
  AxisSystem sy;
  sy.axis = Axis::Y;
  sy.partition = y_partition_;
  sy.bundle = laplacian(gy_, gy_.nodes, y_partition_);
  sy.b = sc_.gains.b;
  sy.k = sc_.gains.k;
  sy.offset = Eigen::VectorXd::Constant(sy.bundle.reduced.rows(),
                                        -sc_.gains.k * g_y_);
  for (CarId id : sy.bundle.inputs) {
    const Car& c = snap_.by_id(id);
    if (id == kLeaderId)
      sy.inputs.push_back(InputSignal::linear(c.y, sc_.leader_v0, t));
    else
      sy.inputs.push_back(InputSignal::constant(c.y));
  }
  systems_.push_back(std::move(sy));

  // Lateral axis.
  if (x_present_) {
    std::vector<CarId> extra;
    if (lane_active_) extra.push_back(lane_car_);
    AxisPartition px = axis_partition(snap_, Axis::X, levels_, extra);
    AxisSystem sx;
    sx.axis = Axis::X;
    sx.partition = px;
    sx.bundle = laplacian(gx_, gx_.nodes, px);
    sx.b = sc_.gains.b_x;
    sx.k = sc_.gains.k_x;

    // The offset constants always come from the plain car formation; an
    // obstacle perturbs the wired system away from this plan, which is what
    // makes cars give way around it.
    const LaplacianBundle plain = laplacian(plain_x_, plain_x_.nodes);
    const Eigen::VectorXd c_full =
        compute_C_from_template(plain, lateral_plan(plain_x_));
    sx.offset.resize(sx.bundle.reduced.rows());
    for (Eigen::Index i = 0; i < sx.offset.size(); ++i)
      sx.offset(i) = sc_.gains.k_x * sc_.gains.g_x *
                     c_full(plain.index_in_ordering(sx.bundle.states[i]));

    for (CarId id : sx.bundle.inputs) {
      const Car& c = snap_.by_id(id);
      if (lane_active_ && id == lane_car_)
        sx.inputs.push_back(lane_profile_);
      else
        sx.inputs.push_back(InputSignal::constant(c.x));
    }
    systems_.push_back(std::move(sx));
  }
  dirty_ = false;
}

void Engine::sync_boundaries() {
  for (const auto& [aliased, ref] : y_partition_.alias) {
    Car& c = snap_.by_id(aliased);
    const Car& r = snap_.by_id(ref);
    c.y = r.y;
    c.vy = r.vy;
  }
}

double Engine::forward_shift_norm(double g_y) const {
  const Car* leader = snap_.phantom_leader();
  double sum = 0.0;
  for (const Car& c : snap_.cars) {
    if (c.role != CarRole::Regular) continue;
    const auto it = levels_.find(c.id);
    if (it == levels_.end()) continue;
    const double shifted = c.y - (leader->y - it->second * g_y / sc_.gains.W);
    sum += shifted * shifted;
  }
  return std::sqrt(sum);
}

double Engine::lateral_shift_norm(const Slots& slots) const {
  double sum = 0.0;
  for (const Car& c : snap_.cars) {
    if (c.role != CarRole::Regular) continue;
    const auto it = levels_.find(c.id);
    if (it == levels_.end()) continue;
    const auto slot = slots.slot.find(c.id);
    if (slot == slots.slot.end()) continue;
    const double target =
        slots.anchor.at(it->second) + sc_.gains.g_x * slot->second;
    sum += (c.x - target) * (c.x - target);
  }
  return std::sqrt(sum);
}

void Engine::apply_due_events(long n) {
  if (lane_active_ && n >= lane_step1_) {
    lane_active_ = false;
    dirty_ = true;
  }
  while (next_event_ < queue_.size() && queue_[next_event_].step == n) {
    const Event& e = queue_[next_event_].event;
    const double t = static_cast<double>(n) * dt_;
    AppliedEvent log;
    log.t = t;
    log.kind = e.kind;
    switch (e.kind) {
      case EventKind::GyChange: {
        log.has_impulse = true;
        log.delta_g_y = e.delta_g_y;
        log.norm_before = forward_shift_norm(g_y_);
        log.norm_after = forward_shift_norm(g_y_ + e.delta_g_y);
        log.admissible = log.norm_after <= log.norm_before;
        g_y_ += e.delta_g_y;
        log.description = "g_y -> " + std::to_string(g_y_);
        break;
      }
      case EventKind::FormationChange: {
        log.has_impulse = true;
        log.norm_before = lateral_shift_norm(slots_);
        set_template(e.x_template);
        const Slots after = compute_slots(levels_);
        log.norm_after = lateral_shift_norm(after);
        log.admissible = log.norm_after <= log.norm_before;
        log.description = "lateral template replaced";
        break;
      }
      case EventKind::ObstacleAppear: {
        if (obstacle_ >= 0)
          throw SimError(ErrorCode::ScenarioInvalid,
                         "an obstacle is already active");
        CarId id = 0;
        for (const Car& c : snap_.cars) id = std::max(id, c.id);
        ++id;
        snap_.cars.push_back(
            {id, CarRole::Obstacle, e.x, e.y, 0.0, 0.0});
        snap_.sort_by_id();
        obstacle_ = id;
        log.description = "obstacle " + std::to_string(id) + " at (" +
                          std::to_string(e.x) + ", " + std::to_string(e.y) +
                          ")";
        break;
      }
      case EventKind::ObstacleRemove: {
        if (obstacle_ < 0)
          throw SimError(ErrorCode::ScenarioInvalid,
                         "no active obstacle to remove");
        auto it = std::find_if(
            snap_.cars.begin(), snap_.cars.end(),
            [this](const Car& c) { return c.id == obstacle_; });
        snap_.cars.erase(it);
        log.description = "obstacle " + std::to_string(obstacle_) + " removed";
        obstacle_ = -1;
        break;
      }
      case EventKind::LaneChange: {
        if (lane_active_)
          throw SimError(ErrorCode::ScenarioInvalid,
                         "a lane change is already in progress");
        lane_active_ = true;
        lane_car_ = e.car;
        const long step0 = n;
        lane_step1_ = std::max(
            step0 + 1, std::min<long>(std::llround(e.t1 / dt_), n_steps_));
        lane_profile_ = InputSignal::cubic(
            static_cast<double>(step0) * dt_,
            static_cast<double>(lane_step1_) * dt_, snap_.by_id(e.car).x,
            e.x_target);
        log.description = "car " + std::to_string(e.car) + " driven to x = " +
                          std::to_string(e.x_target);
        break;
      }
    }
    trace_.event_log.push_back(log);
    dirty_ = true;
    ++next_event_;
  }
}

void Engine::maybe_capture(double t) {
  if (opt_.capture_modes == nullptr) return;
  for (const ModeCapture& seen : *opt_.capture_modes)
    if (seen.x_present == x_present_ && seen.y.same_topology(gy_) &&
        (!x_present_ || seen.x.same_topology(gx_)))
      return;
  ModeCapture cap;
  cap.t = t;
  cap.snapshot = snap_;
  cap.levels = levels_;
  cap.y = gy_;
  cap.x = gx_;
  cap.x_present = x_present_;
  opt_.capture_modes->push_back(std::move(cap));
}

void Engine::record_sample(double t) {
  TraceSample sample;
  sample.t = t;
  sample.snapshot = snap_;
  sample.levels = levels_;
  trace_.samples.push_back(std::move(sample));
}

Trace Engine::run() {
  trace_ = Trace{};
  trace_.decimation = opt_.decimation;

  // Baseline derivation, boundary synchronization, then a re-derivation so
  // the recorded graphs match the synchronized geometry.
  derive_graphs(0.0, false);
  rebuild_systems(0.0);
  sync_boundaries();
  derive_graphs(0.0, false);
  rebuild_systems(0.0);

  for (long n = 0; n <= n_steps_; ++n) {
    const double t = static_cast<double>(n) * dt_;
    apply_due_events(n);
    derive_graphs(t, true);
    if (dirty_) rebuild_systems(t);
    maybe_capture(t);
    if (n % opt_.decimation == 0 || n == n_steps_) record_sample(t);
    if (n == n_steps_) break;
    snap_ = step(snap_, systems_, t, dt_);
  }
  return trace_;
}

}  // namespace

Trace run(const Scenario& scenario, const RunOptions& options) {
  Engine engine(scenario, options);
  return engine.run();
}

RunSummary summarize(const Trace& trace, const Scenario& scenario) {
  RunSummary s;
  if (trace.samples.empty()) return s;
  const TraceSample& last = trace.samples.back();
  s.t_end = last.t;
  s.switch_count = static_cast<int>(trace.switch_log.size());
  s.events_applied = static_cast<int>(trace.event_log.size());

  const Car* leader = last.snapshot.phantom_leader();
  const double v0 = leader ? leader->vy : scenario.leader_v0;

  auto max_dev = [&](const TraceSample& sample) {
    double dev = 0.0;
    for (const Car& c : sample.snapshot.cars)
      if (c.role == CarRole::Regular)
        dev = std::max(dev, std::abs(c.vy - v0));
    return dev;
  };
  s.max_abs_vy_dev = max_dev(last);

  // Mean forward coordinate per level (regular cars; the leader is level 0).
  std::map<int, std::vector<double>> level_y;
  std::map<int, std::vector<std::pair<double, CarId>>> level_x;
  if (leader) level_y[0].push_back(leader->y);
  for (const Car& c : last.snapshot.cars) {
    const auto it = last.levels.find(c.id);
    if (it == last.levels.end()) continue;
    if (c.role == CarRole::Regular) level_y[it->second].push_back(c.y);
    if (c.role == CarRole::Regular || c.role == CarRole::Boundary)
      if (it->second >= 1) level_x[it->second].push_back({c.x, c.id});
  }

  bool have_level = false, have_gap = false;
  double prev_mean = 0.0;
  int prev_level = 0;
  double spread = 0.0;
  for (const auto& [level, ys] : level_y) {
    const double mean =
        std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double lo = ys[0], hi = ys[0];
    for (double y : ys) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    spread = std::max(spread, hi - lo);
    if (have_level && level == prev_level + 1) {
      const double gap = prev_mean - mean;
      if (!have_gap) {
        s.level_gap_min = s.level_gap_max = gap;
        have_gap = true;
      } else {
        s.level_gap_min = std::min(s.level_gap_min, gap);
        s.level_gap_max = std::max(s.level_gap_max, gap);
      }
    }
    have_level = true;
    prev_mean = mean;
    prev_level = level;
  }
  s.same_level_y_spread = spread;

  bool have_lat = false;
  for (auto& [level, xs] : level_x) {
    std::sort(xs.begin(), xs.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      const double gap = xs[i].first - xs[i + 1].first;
      if (!have_lat) {
        s.lateral_gap_min = s.lateral_gap_max = gap;
        have_lat = true;
      } else {
        s.lateral_gap_min = std::min(s.lateral_gap_min, gap);
        s.lateral_gap_max = std::max(s.lateral_gap_max, gap);
      }
    }
  }

  s.convergence_time = -1.0;
  for (size_t i = trace.samples.size(); i-- > 0;) {
    if (max_dev(trace.samples[i]) < 1e-4)
      s.convergence_time = trace.samples[i].t;
    else
      break;
  }
  return s;
}

}  // namespace laneless
