#include "ispsim/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "ispsim/errors.hpp"

namespace ispsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

NandTiming RunConfig::nand_timing() const {
  NandTiming t;
  t.t_read = SimDuration::from_us(t_read_us);
  t.t_prog = SimDuration::from_us(t_prog_us);
  t.t_erase = SimDuration::from_ms(t_erase_ms);
  return t;
}

HyperParams RunConfig::hyper() const {
  HyperParams h;
  h.learning_rate = eta;
  h.comm_period = tau;
  h.moving_rate = alpha;
  return h;
}

AlgorithmConfig RunConfig::algorithm_config() const {
  AlgorithmConfig a;
  a.kind = algorithm;
  a.hyper = hyper();
  a.max_epochs = max_epochs;
  a.strict_downpour = strict_downpour;
  // initial_params is filled by the runner once the model size is known
  return a;
}

StopCondition RunConfig::stop_condition() const {
  StopCondition s;
  if (deadline_ns) s.deadline = SimDuration::from_ps(*deadline_ns * 1000);
  s.target_accuracy = target_accuracy;
  s.max_epochs = max_epochs;
  return s;
}

void RunConfig::validate() const {
  if (channels < 1) throw ConfigError("run.channels must be >= 1");
  if (!(eta > 0.0)) throw ConfigError("run.eta must be > 0");
  if (tau < 1) throw ConfigError("run.tau must be >= 1");
  if (algorithm == AlgorithmKind::Easgd && !(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("run.alpha must lie in (0, 1)");
  }
  if (!deadline_ns && !target_accuracy && !max_epochs) {
    throw ConfigError("no stop condition: set run.deadline_ns, run.target_accuracy or run.max_epochs");
  }
  if (deadline_ns && *deadline_ns < 0) throw ConfigError("run.deadline_ns must be >= 0");
  if (target_accuracy && !(*target_accuracy > 0.0 && *target_accuracy <= 1.0)) {
    throw ConfigError("run.target_accuracy must lie in (0, 1]");
  }
  if (eval_cadence_ns <= 0) throw ConfigError("run.eval_cadence_ns must be > 0");
  if (page_size < 2) throw ConfigError("nand.page_size must be >= 2");
  if (pages_per_block < 1) throw ConfigError("nand.pages_per_block must be >= 1");
  if (blocks_per_channel < 0) throw ConfigError("nand.blocks_per_channel must be >= 0");
  if (!(t_read_us > 0) || !(t_prog_us > 0) || !(t_erase_ms > 0)) {
    throw ConfigError("nand timing values must be > 0");
  }
  if (ihp_stride < 1) throw ConfigError("ihp.stride must be >= 1");
  if (init_scale < 0) throw ConfigError("run.init_scale must be >= 0");
  cost.validate();
}

void apply_config_line(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "run.algorithm") c.algorithm = parse_algorithm(value);
  else if (key == "run.channels") c.channels = static_cast<int>(parse_int(key, value));
  else if (key == "run.eta") c.eta = parse_double(key, value);
  else if (key == "run.tau") c.tau = static_cast<int>(parse_int(key, value));
  else if (key == "run.alpha") c.alpha = parse_double(key, value);
  else if (key == "run.seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "run.strict_downpour") c.strict_downpour = parse_bool(key, value);
  else if (key == "run.init") {
    if (value == "zeros") c.init = InitKind::Zeros;
    else if (value == "uniform") c.init = InitKind::Uniform;
    else throw ConfigError("config: run.init expects zeros|uniform");
  } else if (key == "run.init_scale") c.init_scale = parse_double(key, value);
  else if (key == "run.sigmoid") {
    if (value == "exact") c.sigmoid = SigmoidMode::Exact;
    else if (value == "approximate") c.sigmoid = SigmoidMode::Approximate;
    else throw ConfigError("config: run.sigmoid expects exact|approximate");
  } else if (key == "run.deadline_ns") c.deadline_ns = parse_int(key, value);
  else if (key == "run.target_accuracy") c.target_accuracy = parse_double(key, value);
  else if (key == "run.max_epochs") c.max_epochs = parse_int(key, value);
  else if (key == "run.eval_cadence_ns") c.eval_cadence_ns = parse_int(key, value);
  else if (key == "run.out_dir") c.out_dir = value;
  else if (key == "run.trace_path") c.trace_path = value;
  else if (key == "model.regularizer") {
    if (value == "none") c.regularizer = RegularizerKind::None;
    else if (value == "l2") c.regularizer = RegularizerKind::L2;
    else throw ConfigError("config: model.regularizer expects none|l2");
  } else if (key == "model.regularizer_coeff") c.regularizer_coeff = parse_double(key, value);
  else if (key == "data.train_images") c.train_images = value;
  else if (key == "data.train_labels") c.train_labels = value;
  else if (key == "data.test_images") c.test_images = value;
  else if (key == "data.test_labels") c.test_labels = value;
  else if (key == "data.shuffle_pages") c.shuffle_pages = parse_bool(key, value);
  else if (key == "nand.page_size") c.page_size = static_cast<int>(parse_int(key, value));
  else if (key == "nand.pages_per_block") c.pages_per_block = static_cast<int>(parse_int(key, value));
  else if (key == "nand.blocks_per_channel") c.blocks_per_channel = static_cast<int>(parse_int(key, value));
  else if (key == "nand.t_read_us") c.t_read_us = parse_double(key, value);
  else if (key == "nand.t_prog_us") c.t_prog_us = parse_double(key, value);
  else if (key == "nand.t_erase_ms") c.t_erase_ms = parse_double(key, value);
  else if (key == "cost.clock_period_ns") c.cost.clock_period = SimDuration::from_ns(parse_double(key, value));
  else if (key == "cost.instr_per_cycle") c.cost.instr_per_cycle = parse_double(key, value);
  else if (key == "cost.flops_fwd") c.cost.flops_weight_fwd = parse_double(key, value);
  else if (key == "cost.flops_grad") c.cost.flops_weight_grad = parse_double(key, value);
  else if (key == "cost.sigmoid_cycles") c.cost.sigmoid_cycles = parse_int(key, value);
  else if (key == "cost.bus_bytes_per_cycle") c.cost.bus_bytes_per_cycle = parse_int(key, value);
  else if (key == "cost.word_bytes") c.cost.word_bytes = parse_int(key, value);
  else if (key == "cost.read_overhead_ns") c.cost.read_overhead = SimDuration::from_ns(parse_double(key, value));
  else if (key == "ihp.stride") c.ihp_stride = static_cast<int>(parse_int(key, value));
  else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                        ": expected `key = value`");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    try {
      apply_config_line(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void write_config_echo(const RunConfig& c, std::ostream& out) {
  out << "run.algorithm = " << to_string(c.algorithm) << '\n';
  out << "run.channels = " << c.channels << '\n';
  out << "run.eta = " << fmt(c.eta) << '\n';
  out << "run.tau = " << c.tau << '\n';
  out << "run.alpha = " << fmt(c.alpha) << '\n';
  out << "run.seed = " << c.seed << '\n';
  out << "run.strict_downpour = " << (c.strict_downpour ? "true" : "false") << '\n';
  out << "run.init = " << (c.init == InitKind::Zeros ? "zeros" : "uniform") << '\n';
  out << "run.init_scale = " << fmt(c.init_scale) << '\n';
  out << "run.sigmoid = " << (c.sigmoid == SigmoidMode::Exact ? "exact" : "approximate") << '\n';
  if (c.deadline_ns) out << "run.deadline_ns = " << *c.deadline_ns << '\n';
  if (c.target_accuracy) out << "run.target_accuracy = " << fmt(*c.target_accuracy) << '\n';
  if (c.max_epochs) out << "run.max_epochs = " << *c.max_epochs << '\n';
  out << "run.eval_cadence_ns = " << c.eval_cadence_ns << '\n';
  out << "run.out_dir = " << c.out_dir << '\n';
  if (!c.trace_path.empty()) out << "run.trace_path = " << c.trace_path << '\n';
  out << "model.regularizer = " << (c.regularizer == RegularizerKind::None ? "none" : "l2") << '\n';
  out << "model.regularizer_coeff = " << fmt(c.regularizer_coeff) << '\n';
  out << "data.train_images = " << c.train_images << '\n';
  out << "data.train_labels = " << c.train_labels << '\n';
  out << "data.test_images = " << c.test_images << '\n';
  out << "data.test_labels = " << c.test_labels << '\n';
  out << "data.shuffle_pages = " << (c.shuffle_pages ? "true" : "false") << '\n';
  out << "nand.page_size = " << c.page_size << '\n';
  out << "nand.pages_per_block = " << c.pages_per_block << '\n';
  out << "nand.blocks_per_channel = " << c.blocks_per_channel << '\n';
  out << "nand.t_read_us = " << fmt(c.t_read_us) << '\n';
  out << "nand.t_prog_us = " << fmt(c.t_prog_us) << '\n';
  out << "nand.t_erase_ms = " << fmt(c.t_erase_ms) << '\n';
  out << "cost.clock_period_ns = " << fmt(c.cost.clock_period.ns()) << '\n';
  out << "cost.instr_per_cycle = " << fmt(c.cost.instr_per_cycle) << '\n';
  out << "cost.flops_fwd = " << fmt(c.cost.flops_weight_fwd) << '\n';
  out << "cost.flops_grad = " << fmt(c.cost.flops_weight_grad) << '\n';
  out << "cost.sigmoid_cycles = " << c.cost.sigmoid_cycles << '\n';
  out << "cost.bus_bytes_per_cycle = " << c.cost.bus_bytes_per_cycle << '\n';
  out << "cost.word_bytes = " << c.cost.word_bytes << '\n';
  out << "cost.read_overhead_ns = " << fmt(c.cost.read_overhead.ns()) << '\n';
  out << "ihp.stride = " << c.ihp_stride << '\n';
}

}  // namespace ispsim
