#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ispsim/commands.hpp"
#include "ispsim/errors.hpp"

namespace {

using ispsim::RunConfig;

// Staged CLI values for one subcommand. The config file (if any) is the base;
// flags that were actually given override it.
struct RunFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  RunConfig staged;
  std::string algorithm;
  std::optional<std::int64_t> deadline_ns;
  std::optional<double> target_accuracy;
  std::optional<std::int64_t> max_epochs;
};

void add_config_options(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "flat `key = value` config file");
  cmd->add_option("--set", f.overrides,
                  "override a config key, e.g. --set nand.t_read_us=75 (repeatable)");
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--algorithm", f.algorithm, "sync|downpour|easgd");
  cmd->add_option("--channels,-n", f.staged.channels, "NAND channel count");
  cmd->add_option("--eta", f.staged.eta, "learning rate");
  cmd->add_option("--tau", f.staged.tau, "communication period (minibatches)");
  cmd->add_option("--alpha", f.staged.alpha, "EASGD moving rate");
  cmd->add_option("--seed", f.staged.seed, "seed for shuffling / init / generators");
  cmd->add_option("--train-images", f.staged.train_images, "IDX image file (training)");
  cmd->add_option("--train-labels", f.staged.train_labels, "IDX label file (training)");
  cmd->add_option("--test-images", f.staged.test_images, "IDX image file (test)");
  cmd->add_option("--test-labels", f.staged.test_labels, "IDX label file (test)");
  cmd->add_option("--deadline-ns", f.deadline_ns, "stop after this much simulated time");
  cmd->add_option("--target-accuracy", f.target_accuracy, "stop when test accuracy reaches this");
  cmd->add_option("--max-epochs", f.max_epochs, "stop after this many passes per channel");
  cmd->add_option("--eval-cadence-ns", f.staged.eval_cadence_ns,
                  "simulated time between accuracy checkpoints");
  cmd->add_option("--out", f.staged.out_dir, "output directory");
  cmd->add_option("--event-trace", f.staged.trace_path,
                  "write `time_ns seq target kind` lines here");
}

RunConfig resolve_config(CLI::App* cmd, const RunFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = ispsim::parse_config_file(f.config_path);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ispsim::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    ispsim::apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  const auto given = [cmd](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--channels")) cfg.channels = f.staged.channels;
  if (given("--eta")) cfg.eta = f.staged.eta;
  if (given("--tau")) cfg.tau = f.staged.tau;
  if (given("--alpha")) cfg.alpha = f.staged.alpha;
  if (given("--seed")) cfg.seed = f.staged.seed;
  if (given("--train-images")) cfg.train_images = f.staged.train_images;
  if (given("--train-labels")) cfg.train_labels = f.staged.train_labels;
  if (given("--test-images")) cfg.test_images = f.staged.test_images;
  if (given("--test-labels")) cfg.test_labels = f.staged.test_labels;
  if (given("--eval-cadence-ns")) cfg.eval_cadence_ns = f.staged.eval_cadence_ns;
  if (given("--out")) cfg.out_dir = f.staged.out_dir;
  if (given("--event-trace")) cfg.trace_path = f.staged.trace_path;
  if (!f.algorithm.empty()) cfg.algorithm = ispsim::parse_algorithm(f.algorithm);
  if (f.deadline_ns) cfg.deadline_ns = f.deadline_ns;
  if (f.target_accuracy) cfg.target_accuracy = f.target_accuracy;
  if (f.max_epochs) cfg.max_epochs = f.max_epochs;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ispsim — multi-channel SSD in-storage SGD simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute one simulation and write metrics");
  RunFlags run_flags;
  add_config_options(run, run_flags);
  add_run_flags(run, run_flags);

  auto* sweep = app.add_subcommand("sweep", "one run per axis value, plus speedup table");
  RunFlags sweep_flags;
  std::string sweep_axis;
  std::vector<std::string> sweep_values;
  add_config_options(sweep, sweep_flags);
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--axis", sweep_axis, "channels|tau|algorithm")->required();
  sweep->add_option("--values", sweep_values,
                    "axis values (defaults: 4 8 16 / 1 4 16 64 / sync downpour easgd)");

  auto* compare =
      app.add_subcommand("compare-ihp", "replay a host IO trace and report expected IHP time");
  RunFlags cmp_flags;
  std::string cmp_measurement, cmp_trace;
  add_config_options(compare, cmp_flags);
  compare
      ->add_option("--measurement", cmp_measurement,
                   "file with `t_total_ns = ...` and `t_io_ns = ...`")
      ->required();
  compare
      ->add_option("--trace", cmp_trace,
                   "IO trace: `issue_time_ns R|W offset_bytes length_bytes` lines")
      ->required();
  compare->add_option("--channels,-n", cmp_flags.staged.channels, "baseline SSD channel count");
  compare->add_option("--stride", cmp_flags.staged.ihp_stride,
                      "pages per channel before striping on");
  compare->add_option("--out", cmp_flags.staged.out_dir, "output directory");

  auto* plot = app.add_subcommand("plot", "accuracy-vs-time SVG from metrics.csv files");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "plot.svg", plot_title;
  plot->add_option("csv", plot_inputs, "metrics.csv files (legend follows input order)")
      ->required();
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--title", plot_title, "chart title");

  auto* pack = app.add_subcommand("pack", "pack an IDX dataset and write the layout manifest");
  RunFlags pack_flags;
  std::string pack_manifest = "layout.manifest";
  add_config_options(pack, pack_flags);
  pack->add_option("--images", pack_flags.staged.train_images, "IDX image file")->required();
  pack->add_option("--labels", pack_flags.staged.train_labels, "IDX label file")->required();
  pack->add_option("--channels,-n", pack_flags.staged.channels, "NAND channel count");
  pack->add_option("--seed", pack_flags.staged.seed, "shuffle seed");
  pack->add_flag("--shuffle", pack_flags.staged.shuffle_pages,
                 "shuffle page order before striping");
  pack->add_option("--manifest", pack_manifest, "manifest output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      const auto result = ispsim::cmd_run(resolve_config(run, run_flags));
      std::printf("wrote %s (records: %zu, final accuracy %.4f)\n",
                  (result.out_dir / "metrics.csv").c_str(), result.log.records.size(),
                  result.log.final_accuracy);
      for (const auto& w : result.log.warnings) std::printf("warning: %s\n", w.c_str());
    } else if (sweep->parsed()) {
      const auto result =
          ispsim::cmd_sweep(resolve_config(sweep, sweep_flags), sweep_axis, sweep_values);
      std::printf("wrote %s and %s\n", result.combined_csv.c_str(), result.summary_path.c_str());
    } else if (compare->parsed()) {
      RunConfig cfg = resolve_config(compare, cmp_flags);
      if (compare->count("--stride")) cfg.ihp_stride = cmp_flags.staged.ihp_stride;
      const auto report = ispsim::cmd_compare_ihp(cmp_measurement, cmp_trace, cfg);
      std::printf("T_IOsim %s ns, expected IHP time %s ns (report in %s)\n",
                  ispsim::format_ns(report.t_iosim).c_str(),
                  ispsim::format_ns(report.expected).c_str(), cfg.out_dir.c_str());
    } else if (plot->parsed()) {
      ispsim::cmd_plot(plot_inputs, plot_out, plot_title);
      std::printf("wrote %s\n", plot_out.c_str());
    } else if (pack->parsed()) {
      RunConfig cfg = resolve_config(pack, pack_flags);
      if (pack->count("--images")) cfg.train_images = pack_flags.staged.train_images;
      if (pack->count("--labels")) cfg.train_labels = pack_flags.staged.train_labels;
      if (pack->count("--shuffle")) cfg.shuffle_pages = pack_flags.staged.shuffle_pages;
      const auto result = ispsim::cmd_pack(cfg, pack_manifest);
      std::printf("packed %lld samples into %lld pages (%d per page), manifest %s\n",
                  static_cast<long long>(result.samples), static_cast<long long>(result.pages),
                  result.samples_per_page, result.manifest_path.c_str());
    }
  } catch (const ispsim::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ispsim::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 0;
}
