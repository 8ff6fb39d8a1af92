#include "ispsim/sgd.hpp"

#include <array>
#include <cmath>
#include <string>

#include "ispsim/errors.hpp"

namespace ispsim {

namespace {

constexpr double kProbClamp = 1e-12;

// knot spacing 0.5 on [-8, 8]
constexpr double kKnotLo = -8.0;
constexpr double kKnotHi = 8.0;
constexpr double kKnotStep = 0.5;
constexpr int kKnotCount = 33;
constexpr double kSatLo = -10.0;  // exact 0 at and below
constexpr double kSatHi = 10.0;   // exact 1 at and above

const std::array<double, kKnotCount>& knot_table() {
  static const std::array<double, kKnotCount> table = [] {
    std::array<double, kKnotCount> t{};
    for (int i = 0; i < kKnotCount; ++i) {
      t[static_cast<std::size_t>(i)] = sigmoid_exact(kKnotLo + kKnotStep * i);
    }
    return t;
  }();
  return table;
}

double clamp_prob(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}

}  // namespace

double sigmoid_exact(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double sigmoid_approx(double t) {
  if (t <= kSatLo) return 0.0;
  if (t >= kSatHi) return 1.0;
  const auto& knots = knot_table();
  if (t < kKnotLo) {
    // ramp from (kSatLo, 0) to (kKnotLo, knots.front())
    return knots.front() * (t - kSatLo) / (kKnotLo - kSatLo);
  }
  if (t > kKnotHi) {
    // ramp from (kKnotHi, knots.back()) to (kSatHi, 1)
    double f = (t - kKnotHi) / (kSatHi - kKnotHi);
    return knots.back() + (1.0 - knots.back()) * f;
  }
  int idx = static_cast<int>((t - kKnotLo) / kKnotStep);
  if (idx >= kKnotCount - 1) idx = kKnotCount - 2;
  double x0 = kKnotLo + kKnotStep * idx;
  double f = (t - x0) / kKnotStep;
  const double y0 = knots[static_cast<std::size_t>(idx)];
  const double y1 = knots[static_cast<std::size_t>(idx) + 1];
  return y0 + (y1 - y0) * f;
}

double apply_sigmoid(double t, SigmoidMode mode) {
  return mode == SigmoidMode::Exact ? sigmoid_exact(t) : sigmoid_approx(t);
}

std::vector<double> forward(const ParamVector& params, std::span<const double> features,
                            const ModelConfig& config) {
  if (params.size() != config.param_count()) {
    throw ConfigError("forward: parameter vector length " + std::to_string(params.size()) +
                      " does not match model (" + std::to_string(config.param_count()) + ")");
  }
  if (features.size() != static_cast<std::size_t>(config.input_dim)) {
    throw ConfigError("forward: feature length " + std::to_string(features.size()) +
                      " does not match input_dim " + std::to_string(config.input_dim));
  }
  std::vector<double> scores(static_cast<std::size_t>(config.num_classes));
  for (int c = 0; c < config.num_classes; ++c) {
    const std::size_t base = config.weight_index(c, 0);
    double z = 0.0;
    for (int j = 0; j < config.input_dim; ++j) {
      z += params[base + static_cast<std::size_t>(j)] * features[static_cast<std::size_t>(j)];
    }
    z += params[config.bias_index(c)];
    scores[static_cast<std::size_t>(c)] = apply_sigmoid(z, config.sigmoid_mode);
  }
  return scores;
}

double loss(const ParamVector& params, const PageMinibatch& batch, const ModelConfig& config) {
  if (batch.samples.empty()) throw ConfigError("loss: empty minibatch");
  double total = 0.0;
  for (const Sample& s : batch.samples) {
    const auto scores = forward(params, s.features, config);
    for (int c = 0; c < config.num_classes; ++c) {
      const double y = (s.label == c) ? 1.0 : 0.0;
      const double p = clamp_prob(scores[static_cast<std::size_t>(c)]);
      total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
  }
  double result = total / static_cast<double>(batch.samples.size());
  if (config.regularizer_kind == RegularizerKind::L2) {
    double sq = 0.0;
    for (int c = 0; c < config.num_classes; ++c) {
      const std::size_t base = config.weight_index(c, 0);
      for (int j = 0; j < config.input_dim; ++j) {
        const double w = params[base + static_cast<std::size_t>(j)];
        sq += w * w;
      }
    }
    result += 0.5 * config.regularizer_coeff * sq;
  }
  return result;
}

void gradient_into(ParamVector& out, const ParamVector& params, const Sample& sample,
                   const ModelConfig& config) {
  if (out.size() != config.param_count()) {
    throw ConfigError("gradient: output vector length mismatch");
  }
  const auto scores = forward(params, sample.features, config);
  for (int c = 0; c < config.num_classes; ++c) {
    const double y = (sample.label == c) ? 1.0 : 0.0;
    const double err = scores[static_cast<std::size_t>(c)] - y;
    const std::size_t base = config.weight_index(c, 0);
    if (config.regularizer_kind == RegularizerKind::L2) {
      for (int j = 0; j < config.input_dim; ++j) {
        const std::size_t k = base + static_cast<std::size_t>(j);
        out[k] = err * sample.features[static_cast<std::size_t>(j)] +
                 config.regularizer_coeff * params[k];
      }
    } else {
      for (int j = 0; j < config.input_dim; ++j) {
        out[base + static_cast<std::size_t>(j)] =
            err * sample.features[static_cast<std::size_t>(j)];
      }
    }
    out[config.bias_index(c)] = err;
  }
}

ParamVector gradient(const ParamVector& params, const Sample& sample, const ModelConfig& config) {
  ParamVector out(config.param_count());
  gradient_into(out, params, sample, config);
  return out;
}

ParamVector accumulate_minibatch_gradient(const ParamVector& params, const PageMinibatch& batch,
                                          double eta, const ModelConfig& config) {
  ParamVector delta(config.param_count());
  ParamVector scratch(config.param_count());
  for (const Sample& s : batch.samples) {
    gradient_into(scratch, params, s, config);
    for (std::size_t k = 0; k < delta.size(); ++k) {
      delta[k] += eta * scratch[k];
    }
  }
  ensure_finite(delta, "minibatch gradient");
  return delta;
}

ParamVector elastic_delta(const ParamVector& slave, const ParamVector& master, double alpha) {
  if (slave.size() != master.size()) {
    throw ConfigError("elastic_delta: length mismatch");
  }
  ParamVector d(slave.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] = alpha * (slave[k] - master[k]);
  }
  return d;
}

std::pair<ParamVector, ParamVector> elastic_update(const ParamVector& slave,
                                                   const ParamVector& master, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("elastic_update: moving rate must lie in (0, 1)");
  }
  ParamVector d = elastic_delta(slave, master, alpha);
  ParamVector s = slave;
  ParamVector m = master;
  for (std::size_t k = 0; k < d.size(); ++k) {
    s[k] -= d[k];
    m[k] += d[k];
  }
  ensure_finite(s, "elastic slave update");
  ensure_finite(m, "elastic master update");
  return {std::move(s), std::move(m)};
}

double evaluate_accuracy(const ParamVector& params, const std::vector<Sample>& test_set,
                         const ModelConfig& config) {
  if (test_set.empty()) throw ConfigError("evaluate_accuracy: empty test set");
  std::size_t correct = 0;
  for (const Sample& s : test_set) {
    const auto scores = forward(params, s.features, config);
    int best = 0;
    for (int c = 1; c < config.num_classes; ++c) {
      if (scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)]) {
        best = c;  // strict >, so ties keep the lowest index
      }
    }
    if (best == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

void ensure_finite(const ParamVector& v, const char* what) {
  for (double x : v.values) {
    if (!std::isfinite(x)) {
      throw DataError(std::string("non-finite value in ") + what +
                      " (diverged run or corrupt input)");
    }
  }
}

void ModelConfig::validate() const {
  if (input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
  if (num_classes < 1) throw ConfigError("model: num_classes must be >= 1");
  if (regularizer_coeff < 0.0) throw ConfigError("model: regularizer_coeff must be >= 0");
  if (regularizer_kind == RegularizerKind::None && regularizer_coeff != 0.0) {
    throw ConfigError("model: regularizer_coeff must be 0 when regularizer is none");
  }
}

void HyperParams::validate(bool needs_alpha) const {
  if (!(learning_rate > 0.0)) throw ConfigError("hyper: learning_rate must be > 0");
  if (comm_period < 1) throw ConfigError("hyper: comm_period must be >= 1");
  if (needs_alpha && !(moving_rate > 0.0 && moving_rate < 1.0)) {
    throw ConfigError("hyper: moving_rate must lie in (0, 1)");
  }
}

}  // namespace ispsim
