#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "seqprobe/graph.hpp"

namespace seqprobe {

struct GradCheckEntry {
    std::string param;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;

    double max_rel_err() const {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, e.max_rel_err);
        return m;
    }
    bool pass(double tol) const { return max_rel_err() < tol; }
};

// Forward pass builder: binds the (shared) parameters into the graph and
// returns a scalar loss. Must be deterministic; the checker re-runs it.
using CheckForward = std::function<GraphD::Var(GraphD&)>;

// Compares reverse-mode grads against central finite differences
// (f(p+eps) - f(p-eps)) / (2 eps), in 64-bit. When a parameter has more
// than max_entries entries, a random subset is probed.
inline GradCheckReport grad_check(const CheckForward& forward,
                                  const std::vector<ParamT<double>*>& params,
                                  double eps = 1e-5, int max_entries = 64,
                                  uint64_t sample_seed = 0) {
    auto eval = [&](void) -> double {
        GraphD g;
        auto loss = forward(g);
        return g.val(loss)[0];
    };

    const double f0 = eval();
    if (eval() != f0)
        throw CheckError("grad_check requires a deterministic forward function");

    for (auto* p : params) p->tensor.clear_grad();
    {
        GraphD g;
        auto loss = forward(g);
        g.backward(loss);
    }

    std::mt19937 rng(static_cast<uint32_t>(sample_seed ^ 0x9e3779b9u));
    GradCheckReport report;
    for (auto* p : params) {
        std::vector<int64_t> idx;
        const int64_t n = p->numel();
        if (max_entries > 0 && n > max_entries) {
            idx.resize(n);
            for (int64_t i = 0; i < n; ++i) idx[i] = i;
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(max_entries);
        } else {
            idx.resize(n);
            for (int64_t i = 0; i < n; ++i) idx[i] = i;
        }

        double worst = 0.0;
        for (int64_t i : idx) {
            const double analytic = p->tensor.grad.empty() ? 0.0 : p->tensor.grad[i];
            const double keep = p->tensor.data[i];
            p->tensor.data[i] = keep + eps;
            const double fp = eval();
            p->tensor.data[i] = keep - eps;
            const double fm = eval();
            p->tensor.data[i] = keep;
            const double fd = (fp - fm) / (2.0 * eps);
            // the 1e-3 floor keeps central-difference roundoff (~|f|*1e-14/eps)
            // from dominating entries whose true gradient is near zero
            const double denom = std::max({std::fabs(analytic), std::fabs(fd), 1e-3});
            worst = std::max(worst, std::fabs(analytic - fd) / denom);
        }
        report.entries.push_back({p->name, worst});
    }
    for (auto* p : params) p->tensor.clear_grad();
    return report;
}

}  // namespace seqprobe
