#pragma once

#include <string>
#include <vector>

#include "skelaug/numcore/params.hpp"
#include "skelaug/numcore/tape.hpp"

namespace skelaug::num {

enum class Activation { kNone, kTanh, kSigmoid };
enum class CellKind { kGru, kLstm };

// Parameter registration. Weight matrices are Glorot-uniform, biases zero.
void add_dense_params(ParamSet& ps, const std::string& prefix, std::int64_t in, std::int64_t out, Rng& rng);
void add_gru_params(ParamSet& ps, const std::string& prefix, std::int64_t in, std::int64_t hidden, Rng& rng);
void add_lstm_params(ParamSet& ps, const std::string& prefix, std::int64_t in, std::int64_t hidden, Rng& rng);
void add_attention_params(ParamSet& ps, const std::string& prefix, std::int64_t hidden, std::int64_t attn, Rng& rng);
void add_conv2d_params(ParamSet& ps, const std::string& prefix, std::int64_t in_ch, std::int64_t out_ch,
                       std::int64_t kh, std::int64_t kw, Rng& rng);

// x [B x n] -> x.W + b, activation elementwise.
Value dense(const ParamLeaves& p, const std::string& prefix, Value x, Activation act);

// One GRU step: z and r sigmoid gates, candidate tanh(W x + U (r o h) + b),
// h_t = (1 - z) o h_prev + z o candidate.
Value gru_cell(const ParamLeaves& p, const std::string& prefix, Value x_t, Value h_prev);

struct LstmState {
    Value h;
    Value c;
};
LstmState lstm_cell(const ParamLeaves& p, const std::string& prefix, Value x_t, LstmState prev);

// Folds the cell over x [B x T x d] from a zero initial state; returns every
// hidden state as [B x T x H].
Value sequence_forward(const ParamLeaves& p, const std::string& prefix, CellKind kind, Value x,
                       std::int64_t hidden);

// Additive single-head attention over h [B x T x H]: scores v . tanh(W h_t),
// softmax over time, convex combination of the h_t. Returns [B x H].
Value self_attention(const ParamLeaves& p, const std::string& prefix, Value h);

// conv2d + per-filter bias + activation.
Value conv2d_layer(const ParamLeaves& p, const std::string& prefix, Value x, std::int64_t stride,
                   std::int64_t pad, Activation act);

// Mean over the batch of -log softmax(logits)[label]; softmax is
// max-subtracted and the log is floored, so finite logits give a finite loss.
Value sparse_ce_loss(Value logits, const std::vector<std::int64_t>& labels);

}  // namespace skelaug::num
