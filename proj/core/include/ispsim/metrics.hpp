#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ispsim/sim_time.hpp"

namespace ispsim {

// One eval-checkpoint observation. Accuracy is measured outside simulated
// time; the counters are the fabric's cumulative totals at the checkpoint.
struct MetricsRecord {
  SimTime sim_time;
  std::vector<std::int64_t> minibatches_per_slave;
  double test_accuracy = 0.0;
  std::int64_t reads = 0;
  std::int64_t pushes = 0;
  std::int64_t bytes_transferred = 0;

  std::int64_t minibatches_total() const;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

struct MetricsLog {
  std::vector<MetricsRecord> records;
  std::vector<std::string> warnings;
  std::vector<std::int64_t> epochs_per_slave;
  std::vector<std::int64_t> peak_mem_bytes_per_controller;  // slaves then master
  SimTime end_time;
  double final_accuracy = 0.0;

  // first checkpoint at which accuracy reached `target`
  std::optional<SimTime> time_to_accuracy(double target) const;

  friend bool operator==(const MetricsLog&, const MetricsLog&) = default;
};

inline constexpr const char* kMetricsCsvHeader =
    "sim_time_ns,minibatches_done,test_accuracy,reads,pushes,bytes_transferred";

void write_metrics_csv(const MetricsLog& log, std::ostream& out);

}  // namespace ispsim
