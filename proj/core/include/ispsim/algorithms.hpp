#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ispsim/dataset.hpp"
#include "ispsim/fabric.hpp"
#include "ispsim/model.hpp"

namespace ispsim {

enum class AlgorithmKind { Synchronous, Downpour, Easgd };

const char* to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm(const std::string& name);  // throws ConfigError

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::Easgd;
  HyperParams hyper;
  std::optional<std::int64_t> max_epochs;
  // Algorithm 2 re-pulls theta_cache and discards unsent gradients every
  // minibatch; the default accumulates locally across the tau minibatches and
  // exchanges only on push iterations. strict_downpour selects the verbatim
  // behaviour.
  bool strict_downpour = false;
  ParamVector initial_params;  // empty = zeros

  void validate() const;
};

// Per-slave page visit order: the channel's pages in layout order, wrapping
// to the first page after the last (epochs_handed_out counts the wraps).
class PagePassIterator {
 public:
  PagePassIterator() = default;
  explicit PagePassIterator(const std::vector<DatasetLayout::PageRef>* pages) : pages_(pages) {}

  bool empty() const { return pages_ == nullptr || pages_->empty(); }
  std::int64_t epochs_handed_out() const { return epochs_; }

  const DatasetLayout::PageRef& next();

 private:
  const std::vector<DatasetLayout::PageRef>* pages_ = nullptr;
  std::size_t pos_ = 0;
  std::int64_t epochs_ = 0;
};

std::vector<PagePassIterator> data_pass_controller(const DatasetLayout& layout);

// Runs the chosen choreography on a fabric whose NAND already holds the
// layout. Returns the metrics log (also reachable via the fabric).
MetricsLog run_algorithm(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                         const AlgorithmConfig& algo, const StopCondition& stop,
                         Fabric::EvalFn eval, SimDuration eval_cadence);

MetricsLog run_sync_sgd(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                        const AlgorithmConfig& algo, const StopCondition& stop,
                        Fabric::EvalFn eval, SimDuration eval_cadence);
MetricsLog run_downpour(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                        const AlgorithmConfig& algo, const StopCondition& stop,
                        Fabric::EvalFn eval, SimDuration eval_cadence);
MetricsLog run_easgd(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                     const AlgorithmConfig& algo, const StopCondition& stop, Fabric::EvalFn eval,
                     SimDuration eval_cadence);

}  // namespace ispsim
