#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ispsim/ihp.hpp"
#include "ispsim/metrics.hpp"
#include "ispsim/run_config.hpp"

namespace ispsim {

struct RunResult {
  MetricsLog log;
  std::optional<SimTime> time_to_target;
  std::filesystem::path out_dir;
};

// One simulation: loads the IDX dataset, lays it out across the NAND
// channels, runs the configured algorithm, and writes metrics.csv,
// config.echo, summary.txt and convergence.svg into cfg.out_dir.
RunResult cmd_run(const RunConfig& cfg);

struct SweepPoint {
  std::string axis_value;
  RunResult result;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;  // in axis-value order
  std::filesystem::path combined_csv;
  std::filesystem::path summary_path;
};

// One run per axis value (channels / tau / algorithm), seeds held fixed.
// Points may execute concurrently (ISPSIM_THREADS caps the workers); outputs
// are aggregated in axis order so results do not depend on scheduling.
// `values` empty selects the default axis values.
SweepResult cmd_sweep(const RunConfig& base, const std::string& axis,
                      std::vector<std::string> values);

// Replays the host IO trace against the baseline SSD and evaluates the
// expected in-host time with the simulated IO time substituted in. Writes
// report.txt / report.csv into cfg.out_dir.
IhpReport cmd_compare_ihp(const std::string& measurement_path, const std::string& trace_path,
                          const RunConfig& cfg);

// Accuracy-vs-time chart from metrics.csv files sharing the run schema.
void cmd_plot(const std::vector<std::string>& csv_paths, const std::string& out_svg,
              const std::string& title);

struct PackResult {
  std::int64_t samples = 0;
  std::int64_t pages = 0;
  int samples_per_page = 0;
  std::filesystem::path manifest_path;
};

// Dataset -> layout manifest (`page_index channel block page sample_count`).
PackResult cmd_pack(const RunConfig& cfg, const std::string& manifest_path);

// exposed for reuse by sweep/compare drivers
IhpMeasurement parse_measurement_file(const std::string& path);

}  // namespace ispsim
