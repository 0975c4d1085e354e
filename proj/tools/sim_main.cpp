// Command-line driver: run simulations, analyze stability, export plot data.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "laneless/io.hpp"
#include "laneless/log.hpp"
#include "laneless/presets.hpp"
#include "laneless/scenario.hpp"
#include "laneless/stability.hpp"

namespace fs = std::filesystem;
using namespace laneless;

namespace {

int exit_code_for(const SimError& err) {
  switch (err.code()) {
    case ErrorCode::SpanningTreeLost: return 2;
    case ErrorCode::NonFiniteState: return 3;
    default: return 1;
  }
}

int cmd_run(const RunConfig& config) {
  Scenario scenario = load_scenario(config.scenario_path);
  if (config.dt_override) scenario.settings.dt = *config.dt_override;
  if (config.t_end_override) scenario.settings.t_end = *config.t_end_override;
  scenario.validate();

  RunOptions options;
  options.decimation = config.decimation;
  const Trace trace = run(scenario, options);
  const RunSummary summary = summarize(trace, scenario);

  fs::create_directories(config.output_dir);
  write_trace_csv(config.output_dir / "trace.csv", trace);
  write_events_json(config.output_dir / "events.json", trace);
  write_summary_json(config.output_dir / "summary.json", summary, scenario,
                     config.seed);
  log_info("run finished: " + std::to_string(trace.samples.size()) +
           " samples, " + std::to_string(trace.switch_log.size()) +
           " switches");
  return 0;
}

int cmd_analyze(const fs::path& scenario_path, const fs::path& out_dir) {
  const Scenario scenario = load_scenario(scenario_path);

  std::vector<ModeCapture> captures;
  RunOptions options;
  options.decimation = 1000;  // samples are irrelevant here
  options.capture_modes = &captures;
  run(scenario, options);

  std::vector<ModeReport> modes;
  int index = 0;
  for (const ModeCapture& cap : captures) {
    const std::string label = "mode-" + std::to_string(index++);
    {
      AxisPartition part =
          axis_partition(cap.snapshot, Axis::Y, cap.levels, cap.y.aux_inputs);
      const LaplacianBundle bundle = laplacian(cap.y, cap.y.nodes, part);
      if (bundle.reduced.rows() > 0) {
        ModeReport mode;
        mode.label = label;
        mode.axis = Axis::Y;
        mode.first_seen_t = cap.t;
        mode.edge_count = static_cast<int>(cap.y.edges.size());
        mode.spectrum =
            analyze_spectrum(bundle, scenario.gains.b, scenario.gains.k);
        mode.lyapunov =
            lyapunov_certificate(bundle, scenario.gains.b, scenario.gains.k);
        modes.push_back(std::move(mode));
      }
    }
    if (cap.x_present) {
      AxisPartition part =
          axis_partition(cap.snapshot, Axis::X, cap.levels, cap.x.aux_inputs);
      const LaplacianBundle bundle = laplacian(cap.x, cap.x.nodes, part);
      if (bundle.reduced.rows() > 0) {
        ModeReport mode;
        mode.label = label;
        mode.axis = Axis::X;
        mode.first_seen_t = cap.t;
        mode.edge_count = static_cast<int>(cap.x.edges.size());
        mode.spectrum =
            analyze_spectrum(bundle, scenario.gains.b_x, scenario.gains.k_x);
        mode.lyapunov = lyapunov_certificate(bundle, scenario.gains.b_x,
                                             scenario.gains.k_x);
        modes.push_back(std::move(mode));
      }
    }
  }

  fs::create_directories(out_dir);
  write_stability_json(out_dir / "stability.json", modes, scenario);
  log_info("analyzed " + std::to_string(captures.size()) + " mode(s)");
  return 0;
}

int cmd_plotdata(const fs::path& trace_path, const std::string& kind,
                 std::optional<double> at_time, fs::path out_file) {
  const Trace trace = read_trace_csv(trace_path);
  std::ostringstream oss;

  if (kind == "xy-snapshot") {
    if (!at_time)
      throw SimError(ErrorCode::ScenarioInvalid,
                     "xy-snapshot requires --t <time>");
    if (out_file.empty()) out_file = "xy_snapshot.csv";
    oss << "car,x,y\n";
    const TraceSample* best = nullptr;
    for (const TraceSample& s : trace.samples)
      if (best == nullptr ||
          std::abs(s.t - *at_time) < std::abs(best->t - *at_time))
        best = &s;
    if (best != nullptr)
      for (const Car& c : best->snapshot.cars) {
        if (c.role == CarRole::PhantomLeader) continue;
        oss << c.id << ',' << format_double(c.x) << ',' << format_double(c.y)
            << '\n';
      }
  } else if (kind == "y-velocity") {
    if (out_file.empty()) out_file = "y_velocity.csv";
    oss << "t,car,vy\n";
    for (const TraceSample& s : trace.samples)
      for (const Car& c : s.snapshot.cars) {
        if (c.role == CarRole::PhantomLeader || c.role == CarRole::Obstacle)
          continue;
        oss << format_double(s.t) << ',' << c.id << ','
            << format_double(c.vy) << '\n';
      }
  } else if (kind == "x-trajectory") {
    if (out_file.empty()) out_file = "x_trajectory.csv";
    oss << "t,car,x\n";
    for (const TraceSample& s : trace.samples)
      for (const Car& c : s.snapshot.cars) {
        if (c.role == CarRole::PhantomLeader || c.role == CarRole::Obstacle)
          continue;
        oss << format_double(s.t) << ',' << c.id << ',' << format_double(c.x)
            << '\n';
      }
  } else {
    throw SimError(ErrorCode::ScenarioInvalid,
                   "unknown plot kind '" + kind +
                       "' (expected xy-snapshot, y-velocity, x-trajectory)");
  }

  atomic_write(out_file, oss.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane-less multi-vehicle formation simulator"};
  app.require_subcommand(1);

  RunConfig config;
  double dt_override = 0.0, t_end_override = 0.0;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario file");
  run_cmd->add_option("scenario", config.scenario_path, "scenario JSON file")
      ->required();
  auto* dt_opt = run_cmd->add_option("--dt", dt_override, "time step override");
  auto* tend_opt =
      run_cmd->add_option("--t-end", t_end_override, "duration override");
  run_cmd->add_option("--out", config.output_dir, "output directory");
  run_cmd->add_option("--every", config.decimation,
                      "record every N-th step")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", config.seed,
                      "seed recorded in summary.json");

  fs::path analyze_path, analyze_out = ".";
  auto* analyze_cmd =
      app.add_subcommand("analyze", "spectral and Lyapunov mode report");
  analyze_cmd->add_option("scenario", analyze_path, "scenario JSON file")
      ->required();
  analyze_cmd->add_option("--out", analyze_out, "output directory");

  fs::path trace_path, plot_out;
  std::string kind;
  double plot_t = 0.0;
  auto* plot_cmd =
      app.add_subcommand("plotdata", "columnar plot data from a trace");
  plot_cmd->add_option("trace", trace_path, "trace.csv file")->required();
  plot_cmd->add_option("--kind", kind,
                       "xy-snapshot | y-velocity | x-trajectory")
      ->required();
  auto* t_opt = plot_cmd->add_option("--t", plot_t, "snapshot time");
  plot_cmd->add_option("--out", plot_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit cleanly, usage errors as 1
  }

  try {
    if (run_cmd->parsed()) {
      if (dt_opt->count()) config.dt_override = dt_override;
      if (tend_opt->count()) config.t_end_override = t_end_override;
      return cmd_run(config);
    }
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_path, analyze_out);
    if (plot_cmd->parsed())
      return cmd_plotdata(trace_path, kind,
                          t_opt->count() ? std::optional<double>(plot_t)
                                         : std::nullopt,
                          plot_out);
  } catch (const SimError& err) {
    std::cerr << "error (" << error_code_name(err.code()) << "): "
              << err.what() << "\n";
    return exit_code_for(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
