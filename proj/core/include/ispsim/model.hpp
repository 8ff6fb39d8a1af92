#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ispsim/address.hpp"

namespace ispsim {

enum class RegularizerKind { None, L2 };
enum class SigmoidMode { Exact, Approximate };

// One-vs-all perceptron: per class, input_dim weights followed by one bias.
struct ModelConfig {
  int input_dim = 784;
  int num_classes = 10;
  RegularizerKind regularizer_kind = RegularizerKind::None;
  double regularizer_coeff = 0.0;
  SigmoidMode sigmoid_mode = SigmoidMode::Exact;

  std::size_t params_per_class() const { return static_cast<std::size_t>(input_dim) + 1; }
  std::size_t param_count() const { return params_per_class() * static_cast<std::size_t>(num_classes); }
  std::size_t weight_index(int cls, int feature) const {
    return static_cast<std::size_t>(cls) * params_per_class() + static_cast<std::size_t>(feature);
  }
  std::size_t bias_index(int cls) const {
    return static_cast<std::size_t>(cls) * params_per_class() + static_cast<std::size_t>(input_dim);
  }

  // throws ConfigError on out-of-range fields
  void validate() const;
};

struct HyperParams {
  double learning_rate = 0.1;  // eta
  int comm_period = 1;         // tau, minibatches between master exchanges
  double moving_rate = 0.001;  // alpha, elastic coefficient

  void validate(bool needs_alpha) const;
};

// Dense model parameters. Length is fixed at construction.
struct ParamVector {
  std::vector<double> values;

  ParamVector() = default;
  explicit ParamVector(std::size_t n) : values(n, 0.0) {}
  static ParamVector zeros(std::size_t n) { return ParamVector(n); }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  void fill_zero() { values.assign(values.size(), 0.0); }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

struct Sample {
  std::vector<double> features;  // each in [0,1]
  int label = 0;
};

// The unit of ISP work: the samples decoded from one NAND page.
struct PageMinibatch {
  std::vector<Sample> samples;
  PageAddress source_page;
};

}  // namespace ispsim
