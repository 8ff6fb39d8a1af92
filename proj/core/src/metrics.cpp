#include "ispsim/metrics.hpp"

#include <cstdio>
#include <numeric>

namespace ispsim {

std::int64_t MetricsRecord::minibatches_total() const {
  return std::accumulate(minibatches_per_slave.begin(), minibatches_per_slave.end(),
                         std::int64_t{0});
}

std::optional<SimTime> MetricsLog::time_to_accuracy(double target) const {
  for (const auto& r : records) {
    if (r.test_accuracy >= target) return r.sim_time;
  }
  return std::nullopt;
}

void write_metrics_csv(const MetricsLog& log, std::ostream& out) {
  out << kMetricsCsvHeader << '\n';
  char acc[32];
  for (const auto& r : log.records) {
    std::snprintf(acc, sizeof(acc), "%.6f", r.test_accuracy);
    out << format_ns(r.sim_time) << ',' << r.minibatches_total() << ',' << acc << ',' << r.reads
        << ',' << r.pushes << ',' << r.bytes_transferred << '\n';
  }
}

}  // namespace ispsim
