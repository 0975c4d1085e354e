#include "laneless/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "laneless/log.hpp"

namespace laneless {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw SimError(ErrorCode::ScenarioInvalid,
                   path.string() + ": cannot open file");
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

int line_of_byte(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

double require_number(const ordered_json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw SimError(ErrorCode::ScenarioInvalid,
                   where + ": missing numeric field '" + key + "'");
  return j[key].get<double>();
}

Eigen::VectorXd json_to_vector(const ordered_json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& item : j) v(i++) = item.get<double>();
  return v;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json j = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void atomic_write(const std::filesystem::path& path,
                  const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw SimError(ErrorCode::ScenarioInvalid,
                     "cannot write to " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw SimError(ErrorCode::ScenarioInvalid,
                   path.string() + ":" +
                       std::to_string(line_of_byte(text, err.byte)) + ": " +
                       err.what());
  }

  Scenario sc;
  try {
    sc.name = j.value("name", path.stem().string());

    const ordered_json& g = j.at("gains");
    sc.gains.b = require_number(g, "b", "gains");
    sc.gains.k = require_number(g, "k", "gains");
    sc.gains.b_x = require_number(g, "b_x", "gains");
    sc.gains.k_x = require_number(g, "k_x", "gains");
    sc.gains.g_y = require_number(g, "g_y_length", "gains");
    sc.gains.g_x = require_number(g, "g_x_length", "gains");
    sc.gains.W = require_number(g, "weight_sum", "gains");

    const ordered_json& geo = j.at("geometry");
    sc.geom.aov_y_deg = require_number(geo, "aov_y_deg", "geometry");
    sc.geom.aov_x_deg = require_number(geo, "aov_x_deg", "geometry");
    sc.geom.influence_depth =
        static_cast<int>(require_number(geo, "influence_depth", "geometry"));
    sc.geom.max_per_level =
        static_cast<int>(require_number(geo, "max_per_level", "geometry"));
    sc.geom.switch_margin_deg = geo.value("switch_margin_deg", 0.0);

    const ordered_json& integ = j.at("integration");
    sc.settings.dt = require_number(integ, "dt_time", "integration");
    sc.settings.t_end = require_number(integ, "t_end_time", "integration");

    sc.leader_v0 = require_number(j, "leader_v0_speed", "scenario");

    for (const auto& cj : j.at("cars")) {
      Car c;
      c.id = static_cast<CarId>(require_number(cj, "id", "cars"));
      c.role = role_from_name(cj.at("role").get<std::string>());
      c.x = require_number(cj, "x", "cars");
      c.y = require_number(cj, "y", "cars");
      c.vx = require_number(cj, "vx", "cars");
      c.vy = require_number(cj, "vy", "cars");
      sc.initial.cars.push_back(c);
    }
    sc.initial.sort_by_id();

    if (j.contains("x_template")) sc.x_template = json_to_vector(j["x_template"]);

    if (j.contains("events")) {
      for (const auto& ej : j["events"]) {
        Event e;
        e.kind = event_kind_from_name(ej.at("kind").get<std::string>());
        switch (e.kind) {
          case EventKind::GyChange:
            e.at = require_number(ej, "at_time", "events");
            e.delta_g_y = require_number(ej, "delta_g_y_length", "events");
            break;
          case EventKind::FormationChange:
            e.at = require_number(ej, "at_time", "events");
            e.x_template = json_to_vector(ej.at("x_template"));
            break;
          case EventKind::ObstacleAppear:
            e.at = require_number(ej, "at_time", "events");
            e.x = require_number(ej, "x", "events");
            e.y = require_number(ej, "y", "events");
            break;
          case EventKind::ObstacleRemove:
            e.at = require_number(ej, "at_time", "events");
            break;
          case EventKind::LaneChange:
            e.t0 = require_number(ej, "from_time", "events");
            e.t1 = require_number(ej, "to_time", "events");
            e.car = static_cast<CarId>(require_number(ej, "car", "events"));
            e.x_target = require_number(ej, "x_target", "events");
            break;
        }
        sc.events.push_back(e);
      }
    }
  } catch (const nlohmann::json::exception& err) {
    throw SimError(ErrorCode::ScenarioInvalid,
                   path.string() + ": " + err.what());
  }

  try {
    sc.validate();
  } catch (const SimError& err) {
    throw SimError(err.code(), path.string() + ": " + err.what());
  }
  return sc;
}

void write_scenario(const std::filesystem::path& path,
                    const Scenario& scenario) {
  ordered_json j;
  j["name"] = scenario.name;
  j["gains"] = {{"b", scenario.gains.b},
                {"k", scenario.gains.k},
                {"b_x", scenario.gains.b_x},
                {"k_x", scenario.gains.k_x},
                {"g_y_length", scenario.gains.g_y},
                {"g_x_length", scenario.gains.g_x},
                {"weight_sum", scenario.gains.W}};
  j["geometry"] = {{"aov_y_deg", scenario.geom.aov_y_deg},
                   {"aov_x_deg", scenario.geom.aov_x_deg},
                   {"influence_depth", scenario.geom.influence_depth},
                   {"max_per_level", scenario.geom.max_per_level},
                   {"switch_margin_deg", scenario.geom.switch_margin_deg}};
  j["integration"] = {{"dt_time", scenario.settings.dt},
                      {"t_end_time", scenario.settings.t_end}};
  j["leader_v0_speed"] = scenario.leader_v0;
  if (scenario.x_template.size() > 0)
    j["x_template"] = vector_to_json(scenario.x_template);
  j["cars"] = ordered_json::array();
  for (const Car& c : scenario.initial.cars)
    j["cars"].push_back({{"id", c.id},
                         {"role", role_name(c.role)},
                         {"x", c.x},
                         {"y", c.y},
                         {"vx", c.vx},
                         {"vy", c.vy}});
  j["events"] = ordered_json::array();
  for (const Event& e : scenario.events) {
    ordered_json ej;
    ej["kind"] = event_kind_name(e.kind);
    switch (e.kind) {
      case EventKind::GyChange:
        ej["at_time"] = e.at;
        ej["delta_g_y_length"] = e.delta_g_y;
        break;
      case EventKind::FormationChange:
        ej["at_time"] = e.at;
        ej["x_template"] = vector_to_json(e.x_template);
        break;
      case EventKind::ObstacleAppear:
        ej["at_time"] = e.at;
        ej["x"] = e.x;
        ej["y"] = e.y;
        break;
      case EventKind::ObstacleRemove:
        ej["at_time"] = e.at;
        break;
      case EventKind::LaneChange:
        ej["from_time"] = e.t0;
        ej["to_time"] = e.t1;
        ej["car"] = e.car;
        ej["x_target"] = e.x_target;
        break;
    }
    j["events"].push_back(ej);
  }
  atomic_write(path, j.dump(2) + "\n");
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::string out = "t,car,role,level,x,y,vx,vy\n";
  size_t rows = 0;
  for (const TraceSample& s : trace.samples) rows += s.snapshot.cars.size();
  out.reserve(out.size() + rows * 96);

  char line[256];
  for (const TraceSample& s : trace.samples) {
    for (const Car& c : s.snapshot.cars) {
      const auto it = s.levels.find(c.id);
      const int level = it == s.levels.end() ? -1 : it->second;
      const int n = std::snprintf(
          line, sizeof(line), "%.17g,%d,%s,%d,%.17g,%.17g,%.17g,%.17g\n",
          s.t, c.id, role_name(c.role), level, c.x, c.y, c.vx, c.vy);
      out.append(line, static_cast<size_t>(n));
    }
  }
  atomic_write(path, out);
}

Trace read_trace_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t,car,role,level,x,y,vx,vy")
    throw SimError(ErrorCode::ScenarioInvalid,
                   path.string() + ":1: bad trace header");
  Trace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw SimError(ErrorCode::ScenarioInvalid,
                     path.string() + ":" + std::to_string(lineno) +
                         ": expected 8 columns");
    const double t = std::stod(fields[0]);
    Car c;
    c.id = std::stoi(fields[1]);
    c.role = role_from_name(fields[2]);
    const int level = std::stoi(fields[3]);
    c.x = std::stod(fields[4]);
    c.y = std::stod(fields[5]);
    c.vx = std::stod(fields[6]);
    c.vy = std::stod(fields[7]);
    if (trace.samples.empty() || trace.samples.back().t != t) {
      TraceSample s;
      s.t = t;
      trace.samples.push_back(s);
    }
    trace.samples.back().snapshot.cars.push_back(c);
    if (level >= 0) trace.samples.back().levels[c.id] = level;
  }
  for (TraceSample& s : trace.samples) s.snapshot.sort_by_id();
  return trace;
}

void write_summary_json(const std::filesystem::path& path,
                        const RunSummary& summary, const Scenario& scenario,
                        long seed) {
  ordered_json j;
  j["name"] = scenario.name;
  j["t_end_time"] = summary.t_end;
  j["seed"] = seed;
  j["final"] = {{"max_abs_vy_dev_speed", summary.max_abs_vy_dev},
                {"level_gap_min_length", summary.level_gap_min},
                {"level_gap_max_length", summary.level_gap_max},
                {"same_level_y_spread_length", summary.same_level_y_spread},
                {"lateral_gap_min_length", summary.lateral_gap_min},
                {"lateral_gap_max_length", summary.lateral_gap_max}};
  if (summary.convergence_time >= 0.0)
    j["convergence_time"] = summary.convergence_time;
  else
    j["convergence_time"] = nullptr;
  j["switch_count"] = summary.switch_count;
  j["events_applied"] = summary.events_applied;
  atomic_write(path, j.dump(2) + "\n");
}

void write_events_json(const std::filesystem::path& path, const Trace& trace) {
  ordered_json j;
  j["events"] = ordered_json::array();
  for (const AppliedEvent& e : trace.event_log) {
    ordered_json ej;
    ej["t_time"] = e.t;
    ej["kind"] = event_kind_name(e.kind);
    ej["description"] = e.description;
    if (e.has_impulse)
      ej["impulse"] = {{"admissible", e.admissible},
                       {"norm_before", e.norm_before},
                       {"norm_after", e.norm_after},
                       {"delta_g_y_length", e.delta_g_y}};
    else
      ej["impulse"] = nullptr;
    j["events"].push_back(ej);
  }
  j["switches"] = ordered_json::array();
  for (const SwitchRecord& s : trace.switch_log) {
    ordered_json sj;
    sj["t_time"] = s.t;
    sj["axis"] = axis_name(s.axis);
    auto edges_json = [](const std::vector<Edge>& edges) {
      ordered_json arr = ordered_json::array();
      for (const Edge& e : edges)
        arr.push_back(
            {{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
      return arr;
    };
    sj["added"] = edges_json(s.added);
    sj["removed"] = edges_json(s.removed);
    j["switches"].push_back(sj);
  }
  j["warnings"] = trace.warnings;
  atomic_write(path, j.dump(2) + "\n");
}

void write_stability_json(const std::filesystem::path& path,
                          const std::vector<ModeReport>& modes,
                          const Scenario& scenario) {
  ordered_json j;
  j["name"] = scenario.name;
  j["gains"] = {{"b", scenario.gains.b},
                {"k", scenario.gains.k},
                {"b_x", scenario.gains.b_x},
                {"k_x", scenario.gains.k_x}};
  j["modes"] = ordered_json::array();
  for (const ModeReport& m : modes) {
    ordered_json mj;
    mj["label"] = m.label;
    mj["axis"] = axis_name(m.axis);
    mj["first_seen_t_time"] = m.first_seen_t;
    mj["edge_count"] = m.edge_count;
    ordered_json eigs = ordered_json::array();
    for (const auto& e : m.spectrum.eigenvalues)
      eigs.push_back({{"re", e.real()}, {"im", e.imag()}});
    mj["eigenvalues"] = eigs;
    mj["hurwitz"] = m.spectrum.hurwitz;
    mj["spectral_margin"] = m.spectrum.spectral_margin;
    if (m.lyapunov.has_value())
      mj["lyapunov"] = {{"q", m.lyapunov->q},
                        {"lambda_min_sym", m.lyapunov->lambda_min_sym},
                        {"negdef_margin", m.lyapunov->negdef_margin}};
    else
      mj["lyapunov"] = "inapplicable";
    j["modes"].push_back(mj);
  }
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace laneless
