#pragma once

// Test-only reference implementations, kept independent of the library's
// forward/backward paths.

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracles {

// plain triple-loop matrix product
template <class S>
std::vector<S> matmul(const std::vector<S>& a, const std::vector<S>& b, int m, int k, int n) {
    std::vector<S> c(static_cast<size_t>(m) * n, S(0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            for (int p = 0; p < k; ++p)
                c[i * n + j] += a[i * k + p] * b[p * n + j];
    return c;
}

// -log softmax(logits)[gold] computed directly
inline double cross_entropy(const std::vector<double>& logits, int gold) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    return mx + std::log(sum) - logits[gold];
}

// scalar, loop-per-gate LSTM step; weights laid out [in x 4d], gate order
// (input, forget, candidate, output)
struct LstmStepResult {
    std::vector<double> h, c;
};

inline LstmStepResult lstm_step(const std::vector<double>& x, const std::vector<double>& h_prev,
                                const std::vector<double>& c_prev,
                                const std::vector<double>& wx, const std::vector<double>& wh,
                                const std::vector<double>& bias, int in_dim, int d) {
    auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    std::vector<double> pre(4 * d, 0.0);
    for (int j = 0; j < 4 * d; ++j) {
        double acc = bias[j];
        for (int i = 0; i < in_dim; ++i) acc += x[i] * wx[i * 4 * d + j];
        for (int i = 0; i < d; ++i) acc += h_prev[i] * wh[i * 4 * d + j];
        pre[j] = acc;
    }
    LstmStepResult out;
    out.h.resize(d);
    out.c.resize(d);
    for (int j = 0; j < d; ++j) {
        const double ig = sigmoid(pre[j]);
        const double fg = sigmoid(pre[d + j]);
        const double cand = std::tanh(pre[2 * d + j]);
        const double og = sigmoid(pre[3 * d + j]);
        out.c[j] = fg * c_prev[j] + ig * cand;
        out.h[j] = og * std::tanh(out.c[j]);
    }
    return out;
}

// exact label histogram recount
inline std::map<std::string, long long> histogram(const std::vector<std::string>& labels) {
    std::map<std::string, long long> out;
    for (const auto& l : labels) out[l] += 1;
    return out;
}

inline long long count_matches(const std::vector<int>& a, const std::vector<int>& b) {
    long long n = 0;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] == b[i]) n += 1;
    return n;
}

inline std::vector<double> random_vec(int n, std::mt19937& rng, double lo = -1.0,
                                      double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

inline std::vector<float> random_vec_f(int n, std::mt19937& rng, float lo = -1.0f,
                                       float hi = 1.0f) {
    std::uniform_real_distribution<float> dist(lo, hi);
    std::vector<float> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

}  // namespace oracles
