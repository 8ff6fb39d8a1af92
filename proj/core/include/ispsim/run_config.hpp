#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ispsim/algorithms.hpp"
#include "ispsim/cost_model.hpp"
#include "ispsim/model.hpp"
#include "ispsim/nand.hpp"

namespace ispsim {

enum class InitKind { Zeros, Uniform };

// Everything a simulation run depends on. A run is reproducible from its
// RunConfig alone; `config.echo` written next to the results reloads as a
// config file.
struct RunConfig {
  // run.*
  AlgorithmKind algorithm = AlgorithmKind::Easgd;
  int channels = 16;
  double eta = 0.1;
  int tau = 1;
  double alpha = 0.001;
  std::uint64_t seed = 1;
  bool strict_downpour = false;
  InitKind init = InitKind::Zeros;
  double init_scale = 0.01;
  SigmoidMode sigmoid = SigmoidMode::Approximate;  // the modeled hardware path
  std::optional<std::int64_t> deadline_ns;
  std::optional<double> target_accuracy;
  std::optional<std::int64_t> max_epochs;
  std::int64_t eval_cadence_ns = 10'000'000;  // 10 simulated ms
  std::string out_dir = "out";
  std::string trace_path;  // event-trace dump, empty = off

  // model.*
  RegularizerKind regularizer = RegularizerKind::None;
  double regularizer_coeff = 0.0;

  // data.*
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  bool shuffle_pages = false;

  // nand.*
  int page_size = 8192;
  int pages_per_block = 128;
  int blocks_per_channel = 0;  // 0 = sized from the dataset (+25% slack)
  double t_read_us = 75.0;
  double t_prog_us = 300.0;
  double t_erase_ms = 5.0;

  // cost.*
  CostModel cost;

  // ihp.* (compare-ihp only)
  int ihp_stride = 1;

  NandTiming nand_timing() const;
  HyperParams hyper() const;
  AlgorithmConfig algorithm_config() const;  // initial_params filled per init/seed
  StopCondition stop_condition() const;

  void validate() const;  // throws ConfigError
};

// Flat `key = value` text with dotted sections; '#' comments.
RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);
void write_config_echo(const RunConfig& cfg, std::ostream& out);

}  // namespace ispsim
