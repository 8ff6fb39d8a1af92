#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ispsim/nand.hpp"
#include "ispsim/sim_time.hpp"

namespace ispsim {

enum class IoOp { Read, Write };

// One host IO against storage. Text form: `issue_time_ns R|W offset_bytes
// length_bytes`, '#' starts a comment.
struct IoTraceRecord {
  std::int64_t issue_time_ns = 0;
  IoOp op = IoOp::Read;
  std::int64_t offset_bytes = 0;
  std::int64_t length_bytes = 0;
};

std::vector<IoTraceRecord> parse_trace(std::istream& in, const std::string& name);
std::vector<IoTraceRecord> parse_trace_file(const std::string& path);

// Host-side measurement of the application run: total execution time and the
// storage-IO portion of it.
struct IhpMeasurement {
  SimDuration t_total;
  SimDuration t_io;

  void validate() const;  // 0 <= t_io <= t_total
};

struct ReplayConfig {
  NandGeometry geometry;
  NandTiming timing;
  int channel_stride = 1;  // logical pages per channel before moving on

  void validate() const;
};

// Replays the trace against the baseline (non-ISP) SSD model: each record
// becomes page-granular NAND ops (partial pages round up), striped round-robin
// across channels, serialized per channel, honoring issue times. Writes
// append to the next erased page of their channel; an erase is charged only
// when a channel runs out of erased pages. Returns the completion time of the
// last operation minus the trace start.
SimDuration replay_trace(const std::vector<IoTraceRecord>& trace, const ReplayConfig& config);

// T_total - T_IO + T_IOsim, exact in integer nanoseconds.
SimDuration expected_ihp_time(const IhpMeasurement& m, SimDuration t_iosim);

enum class TracePattern { SequentialRead, RandomRead, Mixed };

TracePattern parse_trace_pattern(const std::string& name);

// Deterministic synthetic trace; issue times are all 0 (storage-bound worst
// case), offsets page-aligned within total_bytes.
std::vector<IoTraceRecord> synth_trace(TracePattern pattern, std::int64_t total_bytes,
                                       std::int64_t io_size, std::uint64_t seed,
                                       int page_size_bytes = 8192);

struct IhpReport {
  IhpMeasurement measurement;
  SimDuration t_iosim;
  SimDuration expected;

  SimDuration t_nonio() const { return measurement.t_total - measurement.t_io; }
};

IhpReport make_ihp_report(const IhpMeasurement& m, const std::vector<IoTraceRecord>& trace,
                          const ReplayConfig& config);

void write_ihp_report_text(const IhpReport& report, std::ostream& out);
void write_ihp_report_csv(const IhpReport& report, std::ostream& out);

}  // namespace ispsim
