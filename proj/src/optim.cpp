#include "seqprobe/optim.hpp"

#include "seqprobe/errors.hpp"

namespace seqprobe {

namespace {

void require_grads(const std::vector<Param*>& params) {
    for (const Param* p : params) {
        if (!p->trainable) continue;
        if (p->tensor.grad.size() != p->tensor.data.size())
            throw StateError("optimizer step with missing grad for parameter '" + p->name + "'");
    }
}

void clear_grads(const std::vector<Param*>& params) {
    for (Param* p : params) p->tensor.clear_grad();
}

}  // namespace

void sgd_step(OptimizerState& state, const std::vector<Param*>& params) {
    require_grads(params);
    for (Param* p : params) {
        if (!p->trainable) continue;
        auto& w = p->tensor.data;
        const auto& g = p->tensor.grad;
        for (size_t i = 0; i < w.size(); ++i) w[i] -= state.learning_rate * g[i];
    }
    state.step_count += 1;
    clear_grads(params);
}

void adam_step(OptimizerState& state, const std::vector<Param*>& params) {
    require_grads(params);
    const int64_t t = state.step_count + 1;
    const double bc1 = 1.0 - std::pow(static_cast<double>(state.beta1), static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(static_cast<double>(state.beta2), static_cast<double>(t));
    for (Param* p : params) {
        if (!p->trainable) continue;
        auto& m = state.m1[p->name];
        auto& v = state.m2[p->name];
        if (m.size() != p->tensor.data.size()) m.assign(p->tensor.data.size(), 0.0f);
        if (v.size() != p->tensor.data.size()) v.assign(p->tensor.data.size(), 0.0f);
        auto& w = p->tensor.data;
        const auto& g = p->tensor.grad;
        for (size_t i = 0; i < w.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0f - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0f - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= static_cast<float>(state.learning_rate * mhat /
                                       (std::sqrt(vhat) + state.eps));
        }
    }
    state.step_count += 1;
    clear_grads(params);
}

void optimizer_step(OptimizerState& state, const std::vector<Param*>& params) {
    if (state.kind == OptimKind::sgd) sgd_step(state, params);
    else adam_step(state, params);
}

double clip_grad_norm(const std::vector<Param*>& params, double max_norm) {
    double sq = 0.0;
    for (const Param* p : params) {
        if (!p->trainable) continue;
        for (float g : p->tensor.grad) sq += static_cast<double>(g) * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const float s = static_cast<float>(max_norm / norm);
        for (Param* p : params) {
            if (!p->trainable) continue;
            for (float& g : p->tensor.grad) g *= s;
        }
    }
    return norm;
}

}  // namespace seqprobe
