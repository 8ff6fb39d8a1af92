#include "ispsim/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "ispsim/algorithms.hpp"
#include "ispsim/dataset.hpp"
#include "ispsim/errors.hpp"
#include "ispsim/fabric.hpp"
#include "ispsim/sgd.hpp"
#include "ispsim/svg_plot.hpp"

namespace ispsim {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

ParamVector initial_params(const RunConfig& cfg, std::size_t param_count) {
  ParamVector p(param_count);
  if (cfg.init == InitKind::Uniform) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-cfg.init_scale, cfg.init_scale);
    for (auto& v : p.values) v = dist(rng);
  }
  return p;
}

int detect_num_classes(const std::vector<Sample>& train, const std::vector<Sample>& test) {
  int max_label = 0;
  for (const auto& s : train) max_label = std::max(max_label, s.label);
  for (const auto& s : test) max_label = std::max(max_label, s.label);
  return std::max(2, max_label + 1);
}

std::string summary_text(const RunConfig& cfg, const MetricsLog& log,
                         const std::optional<SimTime>& ttt, std::int64_t train_samples,
                         std::int64_t test_samples) {
  std::ostringstream out;
  out << "algorithm          " << to_string(cfg.algorithm) << '\n';
  out << "channels           " << cfg.channels << '\n';
  out << "eta                " << cfg.eta << '\n';
  out << "tau                " << cfg.tau << '\n';
  if (cfg.algorithm == AlgorithmKind::Easgd) out << "alpha              " << cfg.alpha << '\n';
  out << "seed               " << cfg.seed << '\n';
  out << "train samples      " << train_samples << '\n';
  out << "test samples       " << test_samples << '\n';
  out << "end sim time       " << format_ns(log.end_time) << " ns\n";
  char acc[32];
  std::snprintf(acc, sizeof(acc), "%.6f", log.final_accuracy);
  out << "final accuracy     " << acc << '\n';
  if (cfg.target_accuracy) {
    out << "target accuracy    " << *cfg.target_accuracy << '\n';
    if (ttt) {
      out << "time to target     " << format_ns(*ttt) << " ns\n";
    } else {
      out << "time to target     unreached\n";
    }
  }
  if (!log.records.empty()) {
    const auto& last = log.records.back();
    out << "minibatches        " << last.minibatches_total() << '\n';
    out << "page reads         " << last.reads << '\n';
    out << "pushes             " << last.pushes << '\n';
    out << "bytes transferred  " << last.bytes_transferred << '\n';
  }
  std::int64_t epochs = 0;
  for (std::size_t i = 0; i < log.epochs_per_slave.size(); ++i) {
    epochs = std::max(epochs, log.epochs_per_slave[i]);
  }
  out << "epochs (max slave) " << epochs << '\n';
  for (const auto& w : log.warnings) out << "warning: " << w << '\n';
  return out.str();
}

}  // namespace

RunResult cmd_run(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.train_images.empty() || cfg.train_labels.empty() || cfg.test_images.empty() ||
      cfg.test_labels.empty()) {
    throw ConfigError("run: data.train_images/train_labels/test_images/test_labels are required");
  }

  const std::vector<Sample> train = parse_idx(cfg.train_images, cfg.train_labels);
  const std::vector<Sample> test = parse_idx(cfg.test_images, cfg.test_labels);
  if (train.empty() || test.empty()) throw DataError("run: empty dataset");

  ModelConfig model;
  model.input_dim = static_cast<int>(train.front().features.size());
  model.num_classes = detect_num_classes(train, test);
  model.sigmoid_mode = cfg.sigmoid;
  model.regularizer_kind = cfg.regularizer;
  model.regularizer_coeff = cfg.regularizer_coeff;
  model.validate();

  const auto pages = pack_pages(train, cfg.page_size, model.input_dim);
  NandGeometry geom;
  if (cfg.blocks_per_channel > 0) {
    geom.num_channels = cfg.channels;
    geom.page_size_bytes = cfg.page_size;
    geom.pages_per_block = cfg.pages_per_block;
    geom.blocks_per_channel = cfg.blocks_per_channel;
  } else {
    geom = geometry_for_dataset(static_cast<std::int64_t>(pages.size()), cfg.channels,
                                cfg.page_size, cfg.pages_per_block);
  }

  NandArray nand(geom, cfg.nand_timing());
  const DatasetLayout layout = stripe_across_channels(pages, geom, cfg.seed, cfg.shuffle_pages);
  preload_nand(layout, pages, nand);

  Fabric fabric(nand, cfg.cost, model.param_count());

  std::ofstream trace_out;
  if (!cfg.trace_path.empty()) {
    trace_out.open(cfg.trace_path, std::ios::binary);
    if (!trace_out) throw DataError("cannot write " + cfg.trace_path);
    fabric.set_trace_sink([&trace_out](const Event& ev) {
      trace_out << format_ns(ev.time) << ' ' << ev.seq << ' ' << ev.target << ' '
                << to_string(ev.kind) << '\n';
    });
  }

  AlgorithmConfig algo = cfg.algorithm_config();
  algo.initial_params = initial_params(cfg, model.param_count());

  Fabric::EvalFn eval = [&test, &model](const ParamVector& params) {
    return evaluate_accuracy(params, test, model);
  };

  RunResult result;
  result.log = run_algorithm(fabric, layout, model, algo, cfg.stop_condition(), std::move(eval),
                             SimDuration::from_ps(cfg.eval_cadence_ns * 1000));
  if (cfg.target_accuracy) {
    result.time_to_target = result.log.time_to_accuracy(*cfg.target_accuracy);
  }

  result.out_dir = fs::path(cfg.out_dir);
  fs::create_directories(result.out_dir);

  {
    std::ostringstream csv;
    write_metrics_csv(result.log, csv);
    write_file(result.out_dir / "metrics.csv", csv.str());
  }
  {
    std::ostringstream echo;
    write_config_echo(cfg, echo);
    write_file(result.out_dir / "config.echo", echo.str());
  }
  write_file(result.out_dir / "summary.txt",
             summary_text(cfg, result.log, result.time_to_target,
                          static_cast<std::int64_t>(train.size()),
                          static_cast<std::int64_t>(test.size())));
  {
    PlotSeries series;
    series.label = to_string(cfg.algorithm);
    for (const auto& r : result.log.records) {
      series.points.emplace_back(r.sim_time.ns(), r.test_accuracy);
    }
    write_file(result.out_dir / "convergence.svg",
               render_accuracy_chart({series}, to_string(cfg.algorithm)));
  }
  return result;
}

SweepResult cmd_sweep(const RunConfig& base, const std::string& axis,
                      std::vector<std::string> values) {
  if (axis != "channels" && axis != "tau" && axis != "algorithm") {
    throw ConfigError("sweep: axis must be channels|tau|algorithm");
  }
  if (values.empty()) {
    if (axis == "channels") values = {"4", "8", "16"};
    else if (axis == "tau") values = {"1", "4", "16", "64"};
    else values = {"sync", "downpour", "easgd"};
  }
  if (values.empty()) throw ConfigError("sweep: empty axis value list");
  if (!base.target_accuracy) {
    throw ConfigError("sweep: run.target_accuracy is required for the speedup table");
  }

  std::vector<RunConfig> configs;
  configs.reserve(values.size());
  for (const auto& v : values) {
    RunConfig point = base;
    if (axis == "channels") {
      point.channels = static_cast<int>(std::stoll(v));
    } else if (axis == "tau") {
      point.tau = static_cast<int>(std::stoll(v));
    } else {
      point.algorithm = parse_algorithm(v);
    }
    point.out_dir = (fs::path(base.out_dir) / (axis + "_" + v)).string();
    point.validate();
    configs.push_back(std::move(point));
  }

  std::size_t workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("ISPSIM_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) workers = static_cast<std::size_t>(v);
  }
  workers = std::max<std::size_t>(1, std::min(workers, configs.size()));

  std::vector<std::optional<RunResult>> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        results[i] = cmd_run(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }

  SweepResult sweep;
  sweep.axis = axis;
  fs::create_directories(base.out_dir);

  std::ostringstream combined;
  combined << "axis_value," << kMetricsCsvHeader << '\n';
  for (std::size_t i = 0; i < configs.size(); ++i) {
    SweepPoint point;
    point.axis_value = values[i];
    point.result = std::move(*results[i]);
    for (const auto& r : point.result.log.records) {
      char acc[32];
      std::snprintf(acc, sizeof(acc), "%.6f", r.test_accuracy);
      combined << values[i] << ',' << format_ns(r.sim_time) << ',' << r.minibatches_total() << ','
               << acc << ',' << r.reads << ',' << r.pushes << ',' << r.bytes_transferred << '\n';
    }
    sweep.points.push_back(std::move(point));
  }
  sweep.combined_csv = fs::path(base.out_dir) / "combined.csv";
  write_file(sweep.combined_csv, combined.str());

  std::ostringstream table;
  table << "axis=" << axis << " target_accuracy=" << *base.target_accuracy << '\n';
  table << "axis_value\ttime_to_target_ns\tspeedup_vs_first\n";
  std::optional<double> first_ns;
  for (const auto& p : sweep.points) {
    table << p.axis_value << '\t';
    if (p.result.time_to_target) {
      const double t = p.result.time_to_target->ns();
      if (!first_ns) first_ns = t;
      char speed[32];
      std::snprintf(speed, sizeof(speed), "%.3f", *first_ns / t);
      table << format_ns(*p.result.time_to_target) << '\t' << speed << '\n';
    } else {
      table << "unreached\t-\n";
    }
  }
  sweep.summary_path = fs::path(base.out_dir) / "sweep_summary.txt";
  write_file(sweep.summary_path, table.str());
  return sweep;
}

IhpMeasurement parse_measurement_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("measurement: cannot open " + path);
  std::optional<std::int64_t> total, io;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq;
    std::int64_t value;
    if (!(ls >> key)) continue;
    if (!(ls >> eq >> value) || eq != "=") {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected `key = value_ns`");
    }
    if (key == "t_total_ns") total = value;
    else if (key == "t_io_ns") io = value;
    else throw DataError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  if (!total || !io) throw DataError(path + ": needs t_total_ns and t_io_ns");
  IhpMeasurement m;
  m.t_total = SimDuration::from_ps(*total * 1000);
  m.t_io = SimDuration::from_ps(*io * 1000);
  m.validate();
  return m;
}

IhpReport cmd_compare_ihp(const std::string& measurement_path, const std::string& trace_path,
                          const RunConfig& cfg) {
  const IhpMeasurement m = parse_measurement_file(measurement_path);
  const auto trace = parse_trace_file(trace_path);

  ReplayConfig rc;
  rc.geometry.num_channels = cfg.channels;
  rc.geometry.page_size_bytes = cfg.page_size;
  rc.geometry.pages_per_block = cfg.pages_per_block;
  rc.timing = cfg.nand_timing();
  rc.channel_stride = cfg.ihp_stride;
  if (cfg.blocks_per_channel > 0) {
    rc.geometry.blocks_per_channel = cfg.blocks_per_channel;
  } else {
    // default capacity: generous enough that log-append writes never stall on erases
    std::int64_t write_pages = 0;
    for (const auto& r : trace) {
      if (r.op == IoOp::Write) {
        write_pages += (r.length_bytes + cfg.page_size - 1) / cfg.page_size + 1;
      }
    }
    const std::int64_t per_channel = write_pages / cfg.channels + cfg.pages_per_block;
    rc.geometry.blocks_per_channel = static_cast<int>(
        std::max<std::int64_t>(16, (per_channel + cfg.pages_per_block - 1) / cfg.pages_per_block));
  }

  const IhpReport report = make_ihp_report(m, trace, rc);

  fs::create_directories(cfg.out_dir);
  {
    std::ostringstream text;
    write_ihp_report_text(report, text);
    write_file(fs::path(cfg.out_dir) / "report.txt", text.str());
  }
  {
    std::ostringstream csv;
    write_ihp_report_csv(report, csv);
    write_file(fs::path(cfg.out_dir) / "report.csv", csv.str());
  }
  return report;
}

void cmd_plot(const std::vector<std::string>& csv_paths, const std::string& out_svg,
              const std::string& title) {
  if (csv_paths.empty()) throw ConfigError("plot: no input CSV files");
  std::vector<PlotSeries> series;
  for (const auto& path : csv_paths) {
    std::ifstream in(path);
    if (!in) throw DataError("plot: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw DataError("plot: " + path + " is empty");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kMetricsCsvHeader) {
      throw DataError("plot: " + path + " schema mismatch (header '" + header + "')");
    }
    PlotSeries s;
    s.label = fs::path(path).stem().string();
    std::string line;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string time_field, mb, acc;
      if (!std::getline(ls, time_field, ',') || !std::getline(ls, mb, ',') ||
          !std::getline(ls, acc, ',')) {
        throw DataError("plot: " + path + ":" + std::to_string(line_no) + ": short row");
      }
      try {
        s.points.emplace_back(std::stod(time_field), std::stod(acc));
      } catch (const std::exception&) {
        throw DataError("plot: " + path + ":" + std::to_string(line_no) + ": bad number");
      }
    }
    series.push_back(std::move(s));
  }
  write_file(out_svg, render_accuracy_chart(series, title));
}

PackResult cmd_pack(const RunConfig& cfg, const std::string& manifest_path) {
  if (cfg.train_images.empty() || cfg.train_labels.empty()) {
    throw ConfigError("pack: data.train_images and data.train_labels are required");
  }
  const auto samples = parse_idx(cfg.train_images, cfg.train_labels);
  if (samples.empty()) throw DataError("pack: empty dataset");
  const int input_dim = static_cast<int>(samples.front().features.size());
  const auto pages = pack_pages(samples, cfg.page_size, input_dim);
  const NandGeometry geom = geometry_for_dataset(static_cast<std::int64_t>(pages.size()),
                                                 cfg.channels, cfg.page_size, cfg.pages_per_block);
  const DatasetLayout layout = stripe_across_channels(pages, geom, cfg.seed, cfg.shuffle_pages);

  std::ostringstream manifest;
  write_layout_manifest(layout, manifest);
  write_file(manifest_path, manifest.str());

  PackResult result;
  result.samples = static_cast<std::int64_t>(samples.size());
  result.pages = static_cast<std::int64_t>(pages.size());
  result.samples_per_page = samples_per_page(cfg.page_size, input_dim);
  result.manifest_path = manifest_path;
  return result;
}

}  // namespace ispsim
