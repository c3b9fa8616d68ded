#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seqprobe/tensor.hpp"

namespace seqprobe {

enum class OptimKind { sgd, adam };

// Per-run optimizer state. Auxiliary moment buffers are keyed by parameter
// name and sized on first use.
struct OptimizerState {
    OptimKind kind = OptimKind::sgd;
    float learning_rate = 1.0f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    int64_t step_count = 0;
    std::map<std::string, std::vector<float>> m1;  // first moments (adam)
    std::map<std::string, std::vector<float>> m2;  // second moments (adam)
};

// p <- p - lr * grad(p); increments step_count and clears grads.
void sgd_step(OptimizerState& state, const std::vector<Param*>& params);

// Standard Adam with bias correction; clears grads like sgd_step.
void adam_step(OptimizerState& state, const std::vector<Param*>& params);

// Dispatch on state.kind.
void optimizer_step(OptimizerState& state, const std::vector<Param*>& params);

// Global-norm gradient clipping; returns the pre-clip norm.
double clip_grad_norm(const std::vector<Param*>& params, double max_norm);

}  // namespace seqprobe
