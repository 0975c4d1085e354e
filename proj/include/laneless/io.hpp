// File formats: scenario JSON, trace CSV, summary/events/stability JSON.
// All outputs are written atomically (temp file, then rename).
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "laneless/scenario.hpp"
#include "laneless/stability.hpp"

namespace laneless {

Scenario load_scenario(const std::filesystem::path& path);
void write_scenario(const std::filesystem::path& path, const Scenario& scenario);

// One row per car per sample: t,car,role,level,x,y,vx,vy. Obstacles carry
// level -1.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(const std::filesystem::path& path);

struct RunConfig {
  std::filesystem::path scenario_path;
  std::filesystem::path output_dir = ".";
  std::optional<double> dt_override;
  std::optional<double> t_end_override;
  int decimation = 1;
  long seed = 0;
};

void write_summary_json(const std::filesystem::path& path,
                        const RunSummary& summary, const Scenario& scenario,
                        long seed);
void write_events_json(const std::filesystem::path& path, const Trace& trace);

// Per-mode stability entry for the analyze report.
struct ModeReport {
  std::string label;
  Axis axis = Axis::Y;
  double first_seen_t = 0.0;
  int edge_count = 0;
  SpectrumReport spectrum;
  std::optional<LyapunovCertificate> lyapunov;
};
void write_stability_json(const std::filesystem::path& path,
                          const std::vector<ModeReport>& modes,
                          const Scenario& scenario);

void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string format_double(double value);

}  // namespace laneless
