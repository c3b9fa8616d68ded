#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seqprobe/errors.hpp"

namespace seqprobe {

using Shape = std::vector<int>;

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

// Dense n-dimensional array in row-major order with an optional gradient
// buffer of the same shape.
template <class S>
struct TensorT {
    Shape shape;
    std::vector<S> data;
    std::vector<S> grad;  // empty, or data.size()

    TensorT() = default;
    explicit TensorT(Shape sh) : shape(std::move(sh)), data(shape_numel(shape), S(0)) {}
    TensorT(Shape sh, std::vector<S> values) : shape(std::move(sh)), data(std::move(values)) {
        if (static_cast<int64_t>(data.size()) != shape_numel(shape))
            throw ShapeError("tensor data size " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), S(0));
    }
    void clear_grad() { grad.clear(); }

    bool finite() const {
        for (S v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

using Tensor = TensorT<float>;

// A named, optionally trainable tensor. Names must be unique within a model;
// they key the checkpoint container and the optimizer's auxiliary buffers.
template <class S>
struct ParamT {
    std::string name;
    TensorT<S> tensor;
    bool trainable = true;

    ParamT() = default;
    ParamT(std::string n, Shape sh) : name(std::move(n)), tensor(std::move(sh)) {}

    int64_t numel() const { return tensor.numel(); }
};

using Param = ParamT<float>;

// Glorot-uniform fill: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <class S>
void glorot_init(TensorT<S>& t, std::mt19937& rng) {
    int fan_in = 1, fan_out = 1;
    if (t.shape.size() == 2) {
        fan_in = t.shape[0];
        fan_out = t.shape[1];
    } else if (!t.shape.empty()) {
        fan_in = fan_out = t.shape[0];
    }
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-a, a);
    for (auto& v : t.data) v = static_cast<S>(dist(rng));
}

}  // namespace seqprobe
