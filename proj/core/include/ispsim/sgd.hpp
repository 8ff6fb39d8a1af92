#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ispsim/model.hpp"

namespace ispsim {

// s(t) = 1 / (1 + e^-t)
double sigmoid_exact(double t);

// Piecewise-linear stand-in for the channel controller's single-cycle sigmoid
// logic: interpolates the exact sigmoid at 0.5-spaced knots on [-8, 8], ramps
// linearly to exactly 0 / 1 at +-10, and saturates beyond. Monotone
// non-decreasing, output in [0, 1], |approx - exact| well under 0.04.
double sigmoid_approx(double t);

double apply_sigmoid(double t, SigmoidMode mode);

// Per-class scores sigma(w_c . x + b_c). Throws ConfigError on size mismatch.
std::vector<double> forward(const ParamVector& params, std::span<const double> features,
                            const ModelConfig& config);

// Mean over the batch of summed per-class binary cross-entropy against the
// one-hot label, plus (coeff/2)*||weights||^2 when L2 is enabled (biases
// excluded). Probabilities are clamped to [1e-12, 1 - 1e-12] before log —
// the approximate sigmoid saturates exactly to 0/1.
double loss(const ParamVector& params, const PageMinibatch& batch, const ModelConfig& config);

// grad F(sample, params): d/dw_c = (sigma_c - y_c) x (+ coeff*w_c under L2),
// d/db_c = (sigma_c - y_c). `out` is overwritten and must match param_count.
void gradient_into(ParamVector& out, const ParamVector& params, const Sample& sample,
                   const ModelConfig& config);
ParamVector gradient(const ParamVector& params, const Sample& sample, const ModelConfig& config);

// Delta = sum_k eta * grad F(sample_k, params), accumulated in sample order.
ParamVector accumulate_minibatch_gradient(const ParamVector& params, const PageMinibatch& batch,
                                          double eta, const ModelConfig& config);

// alpha * (slave - master), the elastic force term shared by both update rules.
ParamVector elastic_delta(const ParamVector& slave, const ParamVector& master, double alpha);

// (slave - d, master + d) with d = elastic_delta; preserves slave + master.
std::pair<ParamVector, ParamVector> elastic_update(const ParamVector& slave,
                                                   const ParamVector& master, double alpha);

// Fraction of samples whose argmax class score equals the label; ties broken
// toward the lowest class index. Throws ConfigError on an empty test set.
double evaluate_accuracy(const ParamVector& params, const std::vector<Sample>& test_set,
                         const ModelConfig& config);

// throws DataError if any entry is non-finite
void ensure_finite(const ParamVector& v, const char* what);

}  // namespace ispsim
