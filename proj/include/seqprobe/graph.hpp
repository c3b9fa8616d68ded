#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "seqprobe/tensor.hpp"

namespace seqprobe {

enum class Act { tanh_fn, sigmoid_fn, relu_fn };

// Reverse-mode tape. Ops evaluate eagerly and record a backward closure;
// creation order is a topological order, so backward() is a single reverse
// sweep. One graph per training step; parameters are bound as leaves and
// their gradients are flushed into ParamT::grad at the end of backward().
template <class S>
class GraphT {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    GraphT() = default;
    GraphT(const GraphT&) = delete;
    GraphT& operator=(const GraphT&) = delete;

    size_t size() const { return nodes_.size(); }

    const Shape& shape(Var v) const { return nodes_[v.id].shape; }
    const std::vector<S>& val(Var v) const { return nodes_[v.id].value; }
    const std::vector<S>& grad(Var v) const { return nodes_[v.id].grad; }
    // for custom-op backward closures
    std::vector<S>& grad_mut(Var v) { return nodes_[v.id].grad; }

    // ---- leaves ----

    Var constant(Shape sh, std::vector<S> values) {
        check_finite(values, "constant");
        return push(std::move(sh), std::move(values), false, nullptr);
    }

    Var zeros(int n) { return push({n}, std::vector<S>(n, S(0)), false, nullptr); }

    // Copies the parameter's current values; grads flow back into p.grad.
    Var param(ParamT<S>& p) {
        Var v = push(p.tensor.shape, p.tensor.data, true, nullptr);
        bound_.push_back({v.id, &p});
        return v;
    }

    // Row gather from an embedding table. Gradients scatter straight into
    // the table's grad rows, so the full table is never copied.
    Var lookup(ParamT<S>& table, const std::vector<int>& ids) {
        if (table.tensor.shape.size() != 2)
            throw ShapeError("lookup table must be rank 2, got " + shape_str(table.tensor.shape));
        const int rows = table.tensor.shape[0];
        const int dim = table.tensor.shape[1];
        for (size_t r = 0; r < ids.size(); ++r)
            if (ids[r] < 0 || ids[r] >= rows)
                throw LabelError("lookup index " + std::to_string(ids[r]) + " out of range [0," +
                                 std::to_string(rows) + ") at row " + std::to_string(r));
        const int n = static_cast<int>(ids.size());
        std::vector<S> out(static_cast<size_t>(n) * dim);
        for (int r = 0; r < n; ++r)
            std::copy_n(table.tensor.data.begin() + static_cast<int64_t>(ids[r]) * dim, dim,
                        out.begin() + static_cast<int64_t>(r) * dim);
        ParamT<S>* tp = &table;
        std::vector<int> idcopy = ids;
        Var v = push({n, dim}, std::move(out), true, [tp, idcopy, dim](GraphT& g, int self) {
            tp->tensor.ensure_grad();
            const auto& go = g.nodes_[self].grad;
            for (size_t r = 0; r < idcopy.size(); ++r) {
                S* dst = tp->tensor.grad.data() + static_cast<int64_t>(idcopy[r]) * dim;
                const S* src = go.data() + static_cast<int64_t>(r) * dim;
                for (int j = 0; j < dim; ++j) dst[j] += src[j];
            }
        });
        return v;
    }

    // ---- elementwise ----

    Var add(Var a, Var b) {
        same_shape(a, b, "add");
        std::vector<S> out = val(a);
        const auto& vb = val(b);
        for (size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
        return binary_ew(a, b, std::move(out), [](GraphT& g, int self, int ia, int ib) {
            const auto& go = g.nodes_[self].grad;
            accum(g.nodes_[ia].grad, go, S(1));
            accum(g.nodes_[ib].grad, go, S(1));
        });
    }

    Var sub(Var a, Var b) {
        same_shape(a, b, "sub");
        std::vector<S> out = val(a);
        const auto& vb = val(b);
        for (size_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
        return binary_ew(a, b, std::move(out), [](GraphT& g, int self, int ia, int ib) {
            const auto& go = g.nodes_[self].grad;
            accum(g.nodes_[ia].grad, go, S(1));
            accum(g.nodes_[ib].grad, go, S(-1));
        });
    }

    Var mul(Var a, Var b) {
        same_shape(a, b, "mul");
        std::vector<S> out = val(a);
        const auto& vb = val(b);
        for (size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
        int ia = a.id, ib = b.id;
        return push(shape(a), std::move(out), needs(a) || needs(b),
                    [ia, ib](GraphT& g, int self) {
                        const auto& go = g.nodes_[self].grad;
                        const auto& va = g.nodes_[ia].value;
                        const auto& vb2 = g.nodes_[ib].value;
                        auto& da = g.nodes_[ia].grad;
                        auto& db = g.nodes_[ib].grad;
                        if (!da.empty())
                            for (size_t i = 0; i < go.size(); ++i) da[i] += go[i] * vb2[i];
                        if (!db.empty())
                            for (size_t i = 0; i < go.size(); ++i) db[i] += go[i] * va[i];
                    });
    }

    Var scale(Var a, S c) {
        std::vector<S> out = val(a);
        for (auto& v : out) v *= c;
        int ia = a.id;
        return push(shape(a), std::move(out), needs(a), [ia, c](GraphT& g, int self) {
            accum(g.nodes_[ia].grad, g.nodes_[self].grad, c);
        });
    }

    Var abs(Var a) {
        std::vector<S> out = val(a);
        for (auto& v : out) v = std::fabs(v);
        int ia = a.id;
        return push(shape(a), std::move(out), needs(a), [ia](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            const auto& va = g.nodes_[ia].value;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            for (size_t i = 0; i < go.size(); ++i) {
                if (va[i] > S(0)) da[i] += go[i];
                else if (va[i] < S(0)) da[i] -= go[i];
            }
        });
    }

    Var activation(Var a, Act kind) {
        switch (kind) {
            case Act::tanh_fn: return tanh(a);
            case Act::sigmoid_fn: return sigmoid(a);
            case Act::relu_fn: return relu(a);
        }
        throw StateError("unknown activation kind");
    }

    Var tanh(Var a) {
        std::vector<S> out = val(a);
        for (auto& v : out) v = std::tanh(v);
        int ia = a.id;
        return push(shape(a), std::move(out), needs(a), [ia](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            const auto& y = g.nodes_[self].value;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            for (size_t i = 0; i < go.size(); ++i) da[i] += go[i] * (S(1) - y[i] * y[i]);
        });
    }

    Var sigmoid(Var a) {
        std::vector<S> out = val(a);
        for (auto& v : out) v = stable_sigmoid(v);
        int ia = a.id;
        return push(shape(a), std::move(out), needs(a), [ia](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            const auto& y = g.nodes_[self].value;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            for (size_t i = 0; i < go.size(); ++i) da[i] += go[i] * y[i] * (S(1) - y[i]);
        });
    }

    // relu'(0) = 0, fixed for bit-reproducibility.
    Var relu(Var a) {
        std::vector<S> out = val(a);
        for (auto& v : out) v = v > S(0) ? v : S(0);
        int ia = a.id;
        return push(shape(a), std::move(out), needs(a), [ia](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            const auto& va = g.nodes_[ia].value;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            for (size_t i = 0; i < go.size(); ++i)
                if (va[i] > S(0)) da[i] += go[i];
        });
    }

    // ---- linear algebra ----

    Var matmul(Var a, Var b) {
        rank2(a, "matmul lhs");
        rank2(b, "matmul rhs");
        const int m = shape(a)[0], k = shape(a)[1];
        const int k2 = shape(b)[0], n = shape(b)[1];
        if (k != k2)
            throw ShapeError("matmul dimension mismatch: " + shape_str(shape(a)) + " x " +
                             shape_str(shape(b)));
        std::vector<S> out(static_cast<size_t>(m) * n, S(0));
        const auto& va = val(a);
        const auto& vb = val(b);
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
                const S aip = va[static_cast<size_t>(i) * k + p];
                const S* brow = vb.data() + static_cast<size_t>(p) * n;
                S* crow = out.data() + static_cast<size_t>(i) * n;
                for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
            }
        int ia = a.id, ib = b.id;
        return push({m, n}, std::move(out), needs(a) || needs(b),
                    [ia, ib, m, k, n](GraphT& g, int self) {
                        const auto& go = g.nodes_[self].grad;
                        const auto& va = g.nodes_[ia].value;
                        const auto& vb2 = g.nodes_[ib].value;
                        auto& da = g.nodes_[ia].grad;
                        auto& db = g.nodes_[ib].grad;
                        if (!da.empty()) {
                            // dA += dC * B^T
                            for (int i = 0; i < m; ++i)
                                for (int p = 0; p < k; ++p) {
                                    S acc = 0;
                                    const S* grow = go.data() + static_cast<size_t>(i) * n;
                                    const S* brow = vb2.data() + static_cast<size_t>(p) * n;
                                    for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
                                    da[static_cast<size_t>(i) * k + p] += acc;
                                }
                        }
                        if (!db.empty()) {
                            // dB += A^T * dC
                            for (int p = 0; p < k; ++p)
                                for (int i = 0; i < m; ++i) {
                                    const S aip = va[static_cast<size_t>(i) * k + p];
                                    const S* grow = go.data() + static_cast<size_t>(i) * n;
                                    S* brow = db.data() + static_cast<size_t>(p) * n;
                                    for (int j = 0; j < n; ++j) brow[j] += aip * grow[j];
                                }
                        }
                    });
    }

    // y = x^T A for vector x[k], A[k x n].
    Var vecmat(Var x, Var a) {
        rank1(x, "vecmat vector");
        rank2(a, "vecmat matrix");
        const int k = shape(x)[0];
        if (shape(a)[0] != k)
            throw ShapeError("vecmat dimension mismatch: " + shape_str(shape(x)) + " x " +
                             shape_str(shape(a)));
        const int n = shape(a)[1];
        std::vector<S> out(n, S(0));
        const auto& vx = val(x);
        const auto& va = val(a);
        for (int p = 0; p < k; ++p) {
            const S xp = vx[p];
            const S* arow = va.data() + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) out[j] += xp * arow[j];
        }
        int ix = x.id, ia = a.id;
        return push({n}, std::move(out), needs(x) || needs(a),
                    [ix, ia, k, n](GraphT& g, int self) {
                        const auto& go = g.nodes_[self].grad;
                        const auto& vx = g.nodes_[ix].value;
                        const auto& va = g.nodes_[ia].value;
                        auto& dx = g.nodes_[ix].grad;
                        auto& da = g.nodes_[ia].grad;
                        if (!dx.empty())
                            for (int p = 0; p < k; ++p) {
                                S acc = 0;
                                const S* arow = va.data() + static_cast<size_t>(p) * n;
                                for (int j = 0; j < n; ++j) acc += arow[j] * go[j];
                                dx[p] += acc;
                            }
                        if (!da.empty())
                            for (int p = 0; p < k; ++p) {
                                const S xp = vx[p];
                                S* arow = da.data() + static_cast<size_t>(p) * n;
                                for (int j = 0; j < n; ++j) arow[j] += xp * go[j];
                            }
                    });
    }

    // y = A x for A[m x k], x[k].
    Var matvec(Var a, Var x) {
        rank2(a, "matvec matrix");
        rank1(x, "matvec vector");
        const int m = shape(a)[0], k = shape(a)[1];
        if (shape(x)[0] != k)
            throw ShapeError("matvec dimension mismatch: " + shape_str(shape(a)) + " x " +
                             shape_str(shape(x)));
        std::vector<S> out(m, S(0));
        const auto& va = val(a);
        const auto& vx = val(x);
        for (int i = 0; i < m; ++i) {
            const S* arow = va.data() + static_cast<size_t>(i) * k;
            S acc = 0;
            for (int p = 0; p < k; ++p) acc += arow[p] * vx[p];
            out[i] = acc;
        }
        int ia = a.id, ix = x.id;
        return push({m}, std::move(out), needs(a) || needs(x),
                    [ia, ix, m, k](GraphT& g, int self) {
                        const auto& go = g.nodes_[self].grad;
                        const auto& va = g.nodes_[ia].value;
                        const auto& vx = g.nodes_[ix].value;
                        auto& da = g.nodes_[ia].grad;
                        auto& dx = g.nodes_[ix].grad;
                        if (!da.empty())
                            for (int i = 0; i < m; ++i) {
                                S* arow = da.data() + static_cast<size_t>(i) * k;
                                for (int p = 0; p < k; ++p) arow[p] += go[i] * vx[p];
                            }
                        if (!dx.empty())
                            for (int i = 0; i < m; ++i) {
                                const S* arow = va.data() + static_cast<size_t>(i) * k;
                                for (int p = 0; p < k; ++p) dx[p] += arow[p] * go[i];
                            }
                    });
    }

    // A[m x n] + row vector b[n] broadcast over rows.
    Var add_rowvec(Var a, Var b) {
        rank2(a, "add_rowvec matrix");
        rank1(b, "add_rowvec vector");
        const int m = shape(a)[0], n = shape(a)[1];
        if (shape(b)[0] != n)
            throw ShapeError("add_rowvec dimension mismatch: " + shape_str(shape(a)) + " + " +
                             shape_str(shape(b)));
        std::vector<S> out = val(a);
        const auto& vb = val(b);
        for (int i = 0; i < m; ++i) {
            S* row = out.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) row[j] += vb[j];
        }
        int ia = a.id, ib = b.id;
        return push({m, n}, std::move(out), needs(a) || needs(b),
                    [ia, ib, m, n](GraphT& g, int self) {
                        const auto& go = g.nodes_[self].grad;
                        auto& da = g.nodes_[ia].grad;
                        auto& db = g.nodes_[ib].grad;
                        if (!da.empty()) accum(da, go, S(1));
                        if (!db.empty())
                            for (int i = 0; i < m; ++i) {
                                const S* row = go.data() + static_cast<size_t>(i) * n;
                                for (int j = 0; j < n; ++j) db[j] += row[j];
                            }
                    });
    }

    // ---- structure ----

    Var concat(const std::vector<Var>& parts) {
        if (parts.empty()) throw InputError("concat of zero vectors");
        int total = 0;
        bool ng = false;
        for (Var p : parts) {
            rank1(p, "concat part");
            total += shape(p)[0];
            ng = ng || needs(p);
        }
        std::vector<S> out;
        out.reserve(total);
        for (Var p : parts) {
            const auto& v = val(p);
            out.insert(out.end(), v.begin(), v.end());
        }
        std::vector<int> ids(parts.size());
        for (size_t i = 0; i < parts.size(); ++i) ids[i] = parts[i].id;
        return push({total}, std::move(out), ng, [ids](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            size_t off = 0;
            for (int id : ids) {
                auto& d = g.nodes_[id].grad;
                const size_t len = g.nodes_[id].value.size();
                if (!d.empty())
                    for (size_t j = 0; j < len; ++j) d[j] += go[off + j];
                off += len;
            }
        });
    }

    Var slice(Var a, int start, int len) {
        rank1(a, "slice");
        const int n = shape(a)[0];
        if (start < 0 || len <= 0 || start + len > n)
            throw ShapeError("slice [" + std::to_string(start) + "," + std::to_string(start + len) +
                             ") out of bounds for " + shape_str(shape(a)));
        std::vector<S> out(val(a).begin() + start, val(a).begin() + start + len);
        int ia = a.id;
        return push({len}, std::move(out), needs(a), [ia, start, len](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            for (int j = 0; j < len; ++j) da[start + j] += go[j];
        });
    }

    Var row(Var a, int i) {
        rank2(a, "row");
        const int m = shape(a)[0], n = shape(a)[1];
        if (i < 0 || i >= m)
            throw ShapeError("row " + std::to_string(i) + " out of bounds for " +
                             shape_str(shape(a)));
        std::vector<S> out(val(a).begin() + static_cast<size_t>(i) * n,
                           val(a).begin() + static_cast<size_t>(i + 1) * n);
        int ia = a.id;
        return push({n}, std::move(out), needs(a), [ia, i, n](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            S* dst = da.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) dst[j] += go[j];
        });
    }

    Var stack_rows(const std::vector<Var>& rows) {
        if (rows.empty()) throw InputError("stack_rows of zero vectors");
        rank1(rows[0], "stack_rows row");
        const int n = shape(rows[0])[0];
        bool ng = false;
        for (Var r : rows) {
            rank1(r, "stack_rows row");
            if (shape(r)[0] != n)
                throw ShapeError("stack_rows ragged input: " + shape_str(shape(r)) + " vs [" +
                                 std::to_string(n) + "]");
            ng = ng || needs(r);
        }
        const int m = static_cast<int>(rows.size());
        std::vector<S> out;
        out.reserve(static_cast<size_t>(m) * n);
        for (Var r : rows) {
            const auto& v = val(r);
            out.insert(out.end(), v.begin(), v.end());
        }
        std::vector<int> ids(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) ids[i] = rows[i].id;
        return push({m, n}, std::move(out), ng, [ids, n](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            for (size_t i = 0; i < ids.size(); ++i) {
                auto& d = g.nodes_[ids[i]].grad;
                if (d.empty()) continue;
                const S* src = go.data() + i * static_cast<size_t>(n);
                for (int j = 0; j < n; ++j) d[j] += src[j];
            }
        });
    }

    // Elementwise max over same-shaped vectors; grad routes to the first
    // attaining input per coordinate.
    Var maxpool(const std::vector<Var>& parts) {
        if (parts.empty()) throw InputError("maxpool of zero vectors");
        rank1(parts[0], "maxpool part");
        const int n = shape(parts[0])[0];
        bool ng = false;
        for (Var p : parts) {
            rank1(p, "maxpool part");
            if (shape(p)[0] != n)
                throw ShapeError("maxpool ragged input: " + shape_str(shape(p)) + " vs [" +
                                 std::to_string(n) + "]");
            ng = ng || needs(p);
        }
        std::vector<S> out = val(parts[0]);
        std::vector<int> arg(n, 0);
        for (size_t i = 1; i < parts.size(); ++i) {
            const auto& v = val(parts[i]);
            for (int j = 0; j < n; ++j)
                if (v[j] > out[j]) {
                    out[j] = v[j];
                    arg[j] = static_cast<int>(i);
                }
        }
        std::vector<int> ids(parts.size());
        for (size_t i = 0; i < parts.size(); ++i) ids[i] = parts[i].id;
        return push({n}, std::move(out), ng, [ids, arg, n](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            for (int j = 0; j < n; ++j) {
                auto& d = g.nodes_[ids[arg[j]]].grad;
                if (!d.empty()) d[j] += go[j];
            }
        });
    }

    // ---- reductions and losses ----

    Var sum(Var a) {
        S acc = 0;
        for (S v : val(a)) acc += v;
        int ia = a.id;
        return push({1}, {acc}, needs(a), [ia](GraphT& g, int self) {
            const S go = g.nodes_[self].grad[0];
            auto& da = g.nodes_[ia].grad;
            for (auto& d : da) d += go;
        });
    }

    Var mean(Var a) {
        const auto n = static_cast<S>(val(a).size());
        return scale(sum(a), S(1) / n);
    }

    // Numerically stable softmax over a vector (max-subtraction).
    Var softmax(Var a) {
        rank1(a, "softmax");
        const int n = shape(a)[0];
        if (n < 1) throw ShapeError("softmax of empty vector");
        std::vector<S> out = val(a);
        softmax_inplace(out.data(), n);
        int ia = a.id;
        return push({n}, std::move(out), needs(a), [ia, n](GraphT& g, int self) {
            const auto& go = g.nodes_[self].grad;
            const auto& y = g.nodes_[self].value;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            S dot = 0;
            for (int j = 0; j < n; ++j) dot += go[j] * y[j];
            for (int j = 0; j < n; ++j) da[j] += y[j] * (go[j] - dot);
        });
    }

    // -log softmax(logits)[gold] for a single logit vector.
    Var cross_entropy(Var logits, int gold) {
        rank1(logits, "cross_entropy logits");
        const int n = shape(logits)[0];
        if (gold < 0 || gold >= n)
            throw LabelError("cross_entropy gold index " + std::to_string(gold) +
                             " out of range [0," + std::to_string(n) + ")");
        const auto& x = val(logits);
        const S lse = logsumexp(x.data(), n);
        int ia = logits.id;
        return push({1}, {lse - x[gold]}, needs(logits), [ia, gold, n, lse](GraphT& g, int self) {
            const S go = g.nodes_[self].grad[0];
            const auto& x2 = g.nodes_[ia].value;
            auto& da = g.nodes_[ia].grad;
            if (da.empty()) return;
            for (int j = 0; j < n; ++j) {
                S p = std::exp(x2[j] - lse);
                da[j] += go * (p - (j == gold ? S(1) : S(0)));
            }
        });
    }

    // Mean of per-row -log softmax(row)[gold] over a batch of logit rows.
    Var cross_entropy_rows(Var logits, const std::vector<int>& gold) {
        rank2(logits, "cross_entropy logits");
        const int b = shape(logits)[0], k = shape(logits)[1];
        if (static_cast<int>(gold.size()) != b)
            throw ShapeError("cross_entropy batch " + std::to_string(b) + " vs " +
                             std::to_string(gold.size()) + " labels");
        for (int r = 0; r < b; ++r)
            if (gold[r] < 0 || gold[r] >= k)
                throw LabelError("cross_entropy gold index " + std::to_string(gold[r]) +
                                 " out of range [0," + std::to_string(k) + ") at row " +
                                 std::to_string(r));
        const auto& x = val(logits);
        std::vector<S> lses(b);
        S total = 0;
        for (int r = 0; r < b; ++r) {
            const S* rowp = x.data() + static_cast<size_t>(r) * k;
            lses[r] = logsumexp(rowp, k);
            total += lses[r] - rowp[gold[r]];
        }
        int ia = logits.id;
        std::vector<int> gcopy = gold;
        return push({1}, {total / static_cast<S>(b)}, needs(logits),
                    [ia, gcopy, b, k, lses](GraphT& g, int self) {
                        const S go = g.nodes_[self].grad[0] / static_cast<S>(b);
                        const auto& x2 = g.nodes_[ia].value;
                        auto& da = g.nodes_[ia].grad;
                        if (da.empty()) return;
                        for (int r = 0; r < b; ++r) {
                            const S* rowp = x2.data() + static_cast<size_t>(r) * k;
                            S* drow = da.data() + static_cast<size_t>(r) * k;
                            for (int j = 0; j < k; ++j) {
                                S p = std::exp(rowp[j] - lses[r]);
                                drow[j] += go * (p - (j == gcopy[r] ? S(1) : S(0)));
                            }
                        }
                    });
    }

    // Escape hatch for custom ops; the gradient checker's corruption
    // fixtures also go through here.
    Var custom(Shape sh, std::vector<S> values, std::vector<Var> inputs,
               std::function<void(GraphT&, int)> back) {
        bool ng = false;
        for (Var v : inputs) ng = ng || needs(v);
        return push(std::move(sh), std::move(values), ng, std::move(back));
    }

    // ---- backward ----

    void backward(Var loss) {
        if (backward_done_)
            throw StateError("backward called twice without a fresh forward pass");
        if (shape_numel(shape(loss)) != 1)
            throw ShapeError("backward requires a scalar loss, got " + shape_str(shape(loss)));
        backward_done_ = true;
        for (auto& n : nodes_)
            if (n.needs_grad) n.grad.assign(n.value.size(), S(0));
        nodes_[loss.id].grad.assign(1, S(1));
        for (int i = loss.id; i >= 0; --i) {
            auto& n = nodes_[i];
            if (n.needs_grad && n.back) n.back(*this, i);
        }
        for (auto& [id, p] : bound_) {
            p->tensor.ensure_grad();
            const auto& g = nodes_[id].grad;
            for (size_t j = 0; j < g.size(); ++j) p->tensor.grad[j] += g[j];
        }
    }

private:
    struct Node {
        Shape shape;
        std::vector<S> value;
        std::vector<S> grad;
        std::function<void(GraphT&, int)> back;
        bool needs_grad = false;
    };

    std::vector<Node> nodes_;
    std::vector<std::pair<int, ParamT<S>*>> bound_;
    bool backward_done_ = false;

    Var push(Shape sh, std::vector<S> values, bool needs_grad,
             std::function<void(GraphT&, int)> back) {
        Node n;
        n.shape = std::move(sh);
        n.value = std::move(values);
        n.back = std::move(back);
        n.needs_grad = needs_grad;
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    bool needs(Var v) const { return nodes_[v.id].needs_grad; }

    template <class F>
    Var binary_ew(Var a, Var b, std::vector<S> out, F&& f) {
        int ia = a.id, ib = b.id;
        return push(shape(a), std::move(out), needs(a) || needs(b),
                    [ia, ib, f](GraphT& g, int self) { f(g, self, ia, ib); });
    }

    void same_shape(Var a, Var b, const char* op) const {
        if (shape(a) != shape(b))
            throw ShapeError(std::string(op) + " shape mismatch: " + shape_str(shape(a)) +
                             " vs " + shape_str(shape(b)));
    }
    void rank1(Var a, const char* what) const {
        if (shape(a).size() != 1)
            throw ShapeError(std::string(what) + " must be rank 1, got " + shape_str(shape(a)));
    }
    void rank2(Var a, const char* what) const {
        if (shape(a).size() != 2)
            throw ShapeError(std::string(what) + " must be rank 2, got " + shape_str(shape(a)));
    }

    static void check_finite(const std::vector<S>& v, const char* what) {
        for (S x : v)
            if (!std::isfinite(static_cast<double>(x)))
                throw InputError(std::string(what) + " contains a non-finite value");
    }

    static void accum(std::vector<S>& dst, const std::vector<S>& src, S c) {
        if (dst.empty()) return;
        for (size_t i = 0; i < src.size(); ++i) dst[i] += c * src[i];
    }

    static S stable_sigmoid(S x) {
        if (x >= S(0)) {
            S e = std::exp(-x);
            return S(1) / (S(1) + e);
        }
        S e = std::exp(x);
        return e / (S(1) + e);
    }

    static void softmax_inplace(S* x, int n) {
        S mx = x[0];
        for (int j = 1; j < n; ++j) mx = std::max(mx, x[j]);
        S sum = 0;
        for (int j = 0; j < n; ++j) {
            x[j] = std::exp(x[j] - mx);
            sum += x[j];
        }
        for (int j = 0; j < n; ++j) x[j] /= sum;
    }

    static S logsumexp(const S* x, int n) {
        S mx = x[0];
        for (int j = 1; j < n; ++j) mx = std::max(mx, x[j]);
        S sum = 0;
        for (int j = 0; j < n; ++j) sum += std::exp(x[j] - mx);
        return mx + std::log(sum);
    }
};

using Graph = GraphT<float>;
using GraphD = GraphT<double>;

}  // namespace seqprobe
