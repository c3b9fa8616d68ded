#pragma once

#include <string>
#include <vector>

#include "seqprobe/seq2seq.hpp"

namespace seqprobe {

enum class ReprScheme { concat_last, maxpool };
enum class Combiner { concat, infersent };

ReprScheme parse_repr_scheme(const std::string& name);
std::string repr_scheme_name(ReprScheme s);
Combiner parse_combiner(const std::string& name);
std::string combiner_name(Combiner c);

template <class S = float>
struct SentenceRepT {
    std::vector<S> vector;  // dimension 2d
    ReprScheme scheme = ReprScheme::concat_last;
    int source_length = 0;
};
using SentenceRep = SentenceRepT<float>;

template <class S = float>
struct PairRepT {
    std::vector<S> vector;  // 4d (concat) or 8d (infersent)
    Combiner combiner = Combiner::concat;
};
using PairRep = PairRepT<float>;

// [forward top-layer state at the final position ; backward top-layer state
// at its own final step, i.e. token position 1].
template <class S>
SentenceRepT<S> extract_concat_last(const EncoderOutputT<S>& enc) {
    if (enc.length < 1) throw InputError("extract_concat_last: empty encoder output");
    SentenceRepT<S> rep;
    rep.scheme = ReprScheme::concat_last;
    rep.source_length = enc.length;
    rep.vector.resize(2 * static_cast<size_t>(enc.d));
    const int top = enc.layers - 1;
    const S* fwd = enc.state(top, 0, enc.length - 1);
    const S* bwd = enc.state(top, 1, 0);
    std::copy(fwd, fwd + enc.d, rep.vector.begin());
    std::copy(bwd, bwd + enc.d, rep.vector.begin() + enc.d);
    return rep;
}

// Per position concatenate forward and backward top-layer states, then take
// the elementwise max over positions.
template <class S>
SentenceRepT<S> extract_maxpool(const EncoderOutputT<S>& enc) {
    if (enc.length < 1) throw InputError("extract_maxpool: empty encoder output");
    SentenceRepT<S> rep;
    rep.scheme = ReprScheme::maxpool;
    rep.source_length = enc.length;
    const int d = enc.d;
    rep.vector.assign(2 * static_cast<size_t>(d), S(0));
    const int top = enc.layers - 1;
    for (int t = 0; t < enc.length; ++t) {
        const S* fwd = enc.state(top, 0, t);
        const S* bwd = enc.state(top, 1, t);
        if (t == 0) {
            std::copy(fwd, fwd + d, rep.vector.begin());
            std::copy(bwd, bwd + d, rep.vector.begin() + d);
            continue;
        }
        for (int j = 0; j < d; ++j) {
            if (fwd[j] > rep.vector[j]) rep.vector[j] = fwd[j];
            if (bwd[j] > rep.vector[d + j]) rep.vector[d + j] = bwd[j];
        }
    }
    return rep;
}

template <class S>
SentenceRepT<S> extract_rep(const EncoderOutputT<S>& enc, ReprScheme scheme) {
    return scheme == ReprScheme::concat_last ? extract_concat_last(enc) : extract_maxpool(enc);
}

// [v ; vbar] in that (context, hypothesis) order.
template <class S>
PairRepT<S> combine_concat(const SentenceRepT<S>& v, const SentenceRepT<S>& vbar) {
    if (v.vector.size() != vbar.vector.size())
        throw ShapeError("combine_concat dimension mismatch: " +
                         std::to_string(v.vector.size()) + " vs " +
                         std::to_string(vbar.vector.size()));
    PairRepT<S> out;
    out.combiner = Combiner::concat;
    out.vector.reserve(2 * v.vector.size());
    out.vector.insert(out.vector.end(), v.vector.begin(), v.vector.end());
    out.vector.insert(out.vector.end(), vbar.vector.begin(), vbar.vector.end());
    return out;
}

// (vbar, v, |vbar - v|, vbar * v) with elementwise product and subtraction.
template <class S>
PairRepT<S> combine_infersent(const SentenceRepT<S>& v, const SentenceRepT<S>& vbar) {
    if (v.vector.size() != vbar.vector.size())
        throw ShapeError("combine_infersent dimension mismatch: " +
                         std::to_string(v.vector.size()) + " vs " +
                         std::to_string(vbar.vector.size()));
    const size_t n = v.vector.size();
    PairRepT<S> out;
    out.combiner = Combiner::infersent;
    out.vector.resize(4 * n);
    for (size_t j = 0; j < n; ++j) {
        out.vector[j] = vbar.vector[j];
        out.vector[n + j] = v.vector[j];
        out.vector[2 * n + j] = std::fabs(vbar.vector[j] - v.vector[j]);
        out.vector[3 * n + j] = vbar.vector[j] * v.vector[j];
    }
    return out;
}

template <class S>
PairRepT<S> combine(const SentenceRepT<S>& v, const SentenceRepT<S>& vbar, Combiner c) {
    return c == Combiner::concat ? combine_concat(v, vbar) : combine_infersent(v, vbar);
}

// ---- representation dump files ----
// Header: magic "SPRR1", u8 scheme tag, u32 dim, u32 count; then count
// records of dim little-endian float32 values, ordered as the source dataset.
// A paired index file (.idx) lists the dataset row ids, one per line.

struct RepDump {
    ReprScheme scheme = ReprScheme::concat_last;
    int dim = 0;
    std::vector<std::vector<float>> rows;
};

void save_rep_dump(const std::string& path, const RepDump& dump);
RepDump load_rep_dump(const std::string& path);

void save_rep_index(const std::string& path, const std::vector<int64_t>& row_ids);
std::vector<int64_t> load_rep_index(const std::string& path);

}  // namespace seqprobe
