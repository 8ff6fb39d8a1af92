#pragma once

#include <cstdint>

#include "ispsim/sim_time.hpp"

namespace ispsim {

// Compute and on-chip transfer costing for the SSD controllers.
//
// The channel-controller FPU retires instr_per_cycle flops per clock with
// pipelining and evaluates the sigmoid in dedicated logic; the parameter bus
// moves bus_bytes_per_cycle per clock. Parameters travel as word_bytes-wide
// words (the modeled datapath is float32; the functional model computes in
// double — the cost model accounts for time, not precision).
struct CostModel {
  SimDuration clock_period = SimDuration::from_ns(2.5);
  double instr_per_cycle = 0.5;
  double flops_weight_fwd = 2.0;   // flops per parameter, forward pass
  double flops_weight_grad = 2.0;  // flops per parameter, gradient + accumulate
  std::int64_t sigmoid_cycles = 1;
  std::int64_t bus_bytes_per_cycle = 4;
  std::int64_t word_bytes = 4;
  SimDuration read_overhead;  // per page read (FTL lookup / firmware), default 0

  void validate() const;  // throws ConfigError

  SimDuration compute_cost(std::int64_t flops, std::int64_t sigmoid_evals) const;
  SimDuration transfer_cost(std::int64_t payload_bytes) const;

  std::int64_t param_payload_bytes(std::size_t param_count) const {
    return word_bytes * static_cast<std::int64_t>(param_count);
  }

  // flops to process `samples` training samples against a param_count model
  std::int64_t minibatch_flops(std::int64_t samples, std::size_t param_count) const;
  std::int64_t minibatch_sigmoid_evals(std::int64_t samples, int num_classes) const {
    return samples * num_classes;
  }
};

}  // namespace ispsim
