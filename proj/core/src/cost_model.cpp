#include "ispsim/cost_model.hpp"

#include <cmath>

#include "ispsim/errors.hpp"

namespace ispsim {

void CostModel::validate() const {
  if (clock_period.ps <= 0) throw ConfigError("cost: clock_period must be > 0");
  if (!(instr_per_cycle > 0.0)) throw ConfigError("cost: instr_per_cycle must be > 0");
  if (!(flops_weight_fwd > 0.0) || !(flops_weight_grad > 0.0)) {
    throw ConfigError("cost: flop weights must be > 0");
  }
  if (sigmoid_cycles <= 0) throw ConfigError("cost: sigmoid_cycles must be > 0");
  if (bus_bytes_per_cycle <= 0) throw ConfigError("cost: bus_bytes_per_cycle must be > 0");
  if (word_bytes <= 0) throw ConfigError("cost: word_bytes must be > 0");
  if (read_overhead.ps < 0) throw ConfigError("cost: read_overhead must be >= 0");
}

SimDuration CostModel::compute_cost(std::int64_t flops, std::int64_t sigmoid_evals) const {
  std::int64_t cycles = 0;
  if (flops > 0) {
    cycles = static_cast<std::int64_t>(std::ceil(static_cast<double>(flops) / instr_per_cycle));
  }
  cycles += sigmoid_evals * sigmoid_cycles;
  return clock_period * cycles;
}

SimDuration CostModel::transfer_cost(std::int64_t payload_bytes) const {
  const std::int64_t cycles = (payload_bytes + bus_bytes_per_cycle - 1) / bus_bytes_per_cycle;
  return clock_period * cycles;
}

std::int64_t CostModel::minibatch_flops(std::int64_t samples, std::size_t param_count) const {
  const double per_sample =
      (flops_weight_fwd + flops_weight_grad) * static_cast<double>(param_count);
  return static_cast<std::int64_t>(std::llround(per_sample * static_cast<double>(samples)));
}

}  // namespace ispsim
