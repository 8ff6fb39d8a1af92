#include "ispsim/ihp.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "ispsim/errors.hpp"

namespace ispsim {

std::vector<IoTraceRecord> parse_trace(std::istream& in, const std::string& name) {
  std::vector<IoTraceRecord> records;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::int64_t t, off, len;
    std::string op;
    if (!(ls >> t)) {
      ls.clear();
      std::string rest;
      if (ls >> rest) {
        throw DataError(name + ":" + std::to_string(line_no) + ": expected issue_time_ns");
      }
      continue;  // blank / comment-only line
    }
    if (!(ls >> op >> off >> len)) {
      throw DataError(name + ":" + std::to_string(line_no) +
                      ": expected `issue_time_ns R|W offset_bytes length_bytes`");
    }
    IoTraceRecord r;
    r.issue_time_ns = t;
    if (op == "R" || op == "r") {
      r.op = IoOp::Read;
    } else if (op == "W" || op == "w") {
      r.op = IoOp::Write;
    } else {
      throw DataError(name + ":" + std::to_string(line_no) + ": op must be R or W, got '" + op +
                      "'");
    }
    r.offset_bytes = off;
    r.length_bytes = len;
    if (r.issue_time_ns < 0 || r.offset_bytes < 0 || r.length_bytes <= 0) {
      throw DataError(name + ":" + std::to_string(line_no) +
                      ": times/offsets must be >= 0 and length > 0");
    }
    std::string extra;
    if (ls >> extra) {
      throw DataError(name + ":" + std::to_string(line_no) + ": trailing field '" + extra + "'");
    }
    records.push_back(r);
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const IoTraceRecord& a, const IoTraceRecord& b) {
                     return a.issue_time_ns < b.issue_time_ns;
                   });
  return records;
}

std::vector<IoTraceRecord> parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("trace: cannot open " + path);
  return parse_trace(in, path);
}

void IhpMeasurement::validate() const {
  if (t_io.ps < 0 || t_total.ps < 0 || t_io > t_total) {
    throw DataError("ihp measurement: need 0 <= T_IO <= T_total");
  }
}

void ReplayConfig::validate() const {
  geometry.validate();
  timing.validate();
  if (channel_stride < 1) throw ConfigError("replay: channel_stride must be >= 1");
}

SimDuration replay_trace(const std::vector<IoTraceRecord>& trace, const ReplayConfig& config) {
  config.validate();
  if (trace.empty()) return SimDuration{};

  const int n = config.geometry.num_channels;
  const std::int64_t page = config.geometry.page_size_bytes;
  std::vector<SimTime> busy(static_cast<std::size_t>(n), SimTime::origin());
  // log-structured write path: erased pages remaining per channel
  std::vector<std::int64_t> erased(static_cast<std::size_t>(n),
                                   config.geometry.pages_per_channel());

  const std::int64_t start_ns =
      std::min_element(trace.begin(), trace.end(),
                       [](const IoTraceRecord& a, const IoTraceRecord& b) {
                         return a.issue_time_ns < b.issue_time_ns;
                       })
          ->issue_time_ns;

  SimTime last_done = SimTime::from_ps(start_ns * 1000);
  for (const auto& r : trace) {
    const SimTime issue = SimTime::from_ps(r.issue_time_ns * 1000);
    const std::int64_t first_page = r.offset_bytes / page;
    const std::int64_t last_page = (r.offset_bytes + r.length_bytes - 1) / page;
    for (std::int64_t p = first_page; p <= last_page; ++p) {
      const int ch = static_cast<int>((p / config.channel_stride) % n);
      auto& b = busy[static_cast<std::size_t>(ch)];
      SimTime op_start = std::max(b, issue);
      SimDuration latency = config.timing.t_read;
      if (r.op == IoOp::Write) {
        if (erased[static_cast<std::size_t>(ch)] == 0) {
          op_start += config.timing.t_erase;  // reclaim one block first
          erased[static_cast<std::size_t>(ch)] = config.geometry.pages_per_block;
        }
        --erased[static_cast<std::size_t>(ch)];
        latency = config.timing.t_prog;
      }
      const SimTime done = op_start + latency;
      b = done;
      last_done = std::max(last_done, done);
    }
  }
  return last_done - SimTime::from_ps(start_ns * 1000);
}

SimDuration expected_ihp_time(const IhpMeasurement& m, SimDuration t_iosim) {
  m.validate();
  if (t_iosim.ps < 0) throw DataError("ihp: T_IOsim must be >= 0");
  const SimDuration result = m.t_total - m.t_io + t_iosim;
  if (result.ps < 0) throw DataError("ihp: expected time is negative; inconsistent inputs");
  return result;
}

TracePattern parse_trace_pattern(const std::string& name) {
  if (name == "sequential_read") return TracePattern::SequentialRead;
  if (name == "random_read") return TracePattern::RandomRead;
  if (name == "mixed") return TracePattern::Mixed;
  throw ConfigError("unknown trace pattern '" + name +
                    "' (expected sequential_read|random_read|mixed)");
}

std::vector<IoTraceRecord> synth_trace(TracePattern pattern, std::int64_t total_bytes,
                                       std::int64_t io_size, std::uint64_t seed,
                                       int page_size_bytes) {
  if (io_size <= 0 || total_bytes <= 0 || io_size > total_bytes) {
    throw ConfigError("synth_trace: need 0 < io_size <= total_bytes");
  }
  const std::int64_t count = total_bytes / io_size;
  const std::int64_t pages = std::max<std::int64_t>(1, total_bytes / page_size_bytes);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> page_dist(0, pages - 1);
  std::vector<IoTraceRecord> records;
  records.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    IoTraceRecord r;
    r.issue_time_ns = 0;
    r.length_bytes = io_size;
    switch (pattern) {
      case TracePattern::SequentialRead:
        r.op = IoOp::Read;
        r.offset_bytes = i * io_size;
        break;
      case TracePattern::RandomRead:
        r.op = IoOp::Read;
        r.offset_bytes = page_dist(rng) * page_size_bytes;
        break;
      case TracePattern::Mixed:
        r.op = (rng() & 1) ? IoOp::Write : IoOp::Read;
        r.offset_bytes = page_dist(rng) * page_size_bytes;
        break;
    }
    if (r.offset_bytes + r.length_bytes > total_bytes) {
      r.offset_bytes = std::max<std::int64_t>(0, total_bytes - r.length_bytes);
    }
    records.push_back(r);
  }
  return records;
}

IhpReport make_ihp_report(const IhpMeasurement& m, const std::vector<IoTraceRecord>& trace,
                          const ReplayConfig& config) {
  IhpReport report;
  report.measurement = m;
  report.t_iosim = replay_trace(trace, config);
  report.expected = expected_ihp_time(m, report.t_iosim);
  return report;
}

void write_ihp_report_text(const IhpReport& r, std::ostream& out) {
  out << "T_total           " << format_ns(r.measurement.t_total) << " ns\n"
      << "T_IO              " << format_ns(r.measurement.t_io) << " ns\n"
      << "T_nonIO           " << format_ns(r.t_nonio()) << " ns\n"
      << "T_IOsim           " << format_ns(r.t_iosim) << " ns\n"
      << "expected_IHP_time " << format_ns(r.expected) << " ns\n"
      << "# expected = T_total - T_IO + T_IOsim; assumes the non-IO portion of\n"
      << "# the host run is unchanged by swapping the storage underneath it.\n";
}

void write_ihp_report_csv(const IhpReport& r, std::ostream& out) {
  out << "t_total_ns,t_io_ns,t_nonio_ns,t_iosim_ns,expected_ihp_time_ns\n"
      << format_ns(r.measurement.t_total) << ',' << format_ns(r.measurement.t_io) << ','
      << format_ns(r.t_nonio()) << ',' << format_ns(r.t_iosim) << ',' << format_ns(r.expected)
      << '\n';
}

}  // namespace ispsim
