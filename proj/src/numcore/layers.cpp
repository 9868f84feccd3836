#include "skelaug/numcore/layers.hpp"

namespace skelaug::num {

namespace {

Value activate(Value v, Activation act) {
    switch (act) {
        case Activation::kNone: return v;
        case Activation::kTanh: return tanh(v);
        case Activation::kSigmoid: return sigmoid(v);
    }
    throw contract_error("unknown activation");
}

// x.W + U(r o h) style gate preactivation: x.W + h.U + b
Value gate_pre(const ParamLeaves& p, const std::string& prefix, const char* gate, Value x, Value h) {
    Value xw = matmul(x, p[prefix + ".w" + gate]);
    Value hu = matmul(h, p[prefix + ".u" + gate]);
    return add(add(xw, hu), p[prefix + ".b" + gate]);
}

}  // namespace

void add_dense_params(ParamSet& ps, const std::string& prefix, std::int64_t in, std::int64_t out, Rng& rng) {
    ps.add(prefix + ".w", glorot_uniform(Shape{in, out}, in, out, rng));
    ps.add(prefix + ".b", NDArray(Shape{out}));
}

void add_gru_params(ParamSet& ps, const std::string& prefix, std::int64_t in, std::int64_t hidden, Rng& rng) {
    for (const char* g : {"z", "r", "h"}) {
        ps.add(prefix + ".w" + g, glorot_uniform(Shape{in, hidden}, in, hidden, rng));
        ps.add(prefix + ".u" + g, glorot_uniform(Shape{hidden, hidden}, hidden, hidden, rng));
        ps.add(prefix + ".b" + g, NDArray(Shape{hidden}));
    }
}

void add_lstm_params(ParamSet& ps, const std::string& prefix, std::int64_t in, std::int64_t hidden, Rng& rng) {
    for (const char* g : {"i", "f", "o", "g"}) {
        ps.add(prefix + ".w" + g, glorot_uniform(Shape{in, hidden}, in, hidden, rng));
        ps.add(prefix + ".u" + g, glorot_uniform(Shape{hidden, hidden}, hidden, hidden, rng));
        ps.add(prefix + ".b" + g, NDArray(Shape{hidden}));
    }
}

void add_attention_params(ParamSet& ps, const std::string& prefix, std::int64_t hidden, std::int64_t attn, Rng& rng) {
    ps.add(prefix + ".w", glorot_uniform(Shape{hidden, attn}, hidden, attn, rng));
    ps.add(prefix + ".v", glorot_uniform(Shape{attn, 1}, attn, 1, rng));
}

void add_conv2d_params(ParamSet& ps, const std::string& prefix, std::int64_t in_ch, std::int64_t out_ch,
                       std::int64_t kh, std::int64_t kw, Rng& rng) {
    ps.add(prefix + ".k", glorot_uniform(Shape{out_ch, in_ch, kh, kw}, in_ch * kh * kw, out_ch * kh * kw, rng));
    ps.add(prefix + ".b", NDArray(Shape{out_ch}));
}

Value dense(const ParamLeaves& p, const std::string& prefix, Value x, Activation act) {
    return activate(add(matmul(x, p[prefix + ".w"]), p[prefix + ".b"]), act);
}

Value gru_cell(const ParamLeaves& p, const std::string& prefix, Value x_t, Value h_prev) {
    Value z = sigmoid(gate_pre(p, prefix, "z", x_t, h_prev));
    Value r = sigmoid(gate_pre(p, prefix, "r", x_t, h_prev));
    Value rh = mul(r, h_prev);
    Value cand = tanh(add(add(matmul(x_t, p[prefix + ".wh"]), matmul(rh, p[prefix + ".uh"])), p[prefix + ".bh"]));
    Value keep = add_scalar(scale(z, -1.0), 1.0);  // 1 - z
    return add(mul(keep, h_prev), mul(z, cand));
}

LstmState lstm_cell(const ParamLeaves& p, const std::string& prefix, Value x_t, LstmState prev) {
    Value i = sigmoid(gate_pre(p, prefix, "i", x_t, prev.h));
    Value f = sigmoid(gate_pre(p, prefix, "f", x_t, prev.h));
    Value o = sigmoid(gate_pre(p, prefix, "o", x_t, prev.h));
    Value g = tanh(gate_pre(p, prefix, "g", x_t, prev.h));
    Value c = add(mul(f, prev.c), mul(i, g));
    Value h = mul(o, tanh(c));
    return LstmState{h, c};
}

Value sequence_forward(const ParamLeaves& p, const std::string& prefix, CellKind kind, Value x,
                       std::int64_t hidden) {
    const Shape& s = x.shape();
    if (s.rank() != 3) throw contract_error("sequence_forward: input must be [B x T x d], got " + s.str());
    const std::int64_t B = s[0], T = s[1], d = s[2];
    if (T < 1) throw contract_error("sequence_forward: empty sequence");

    Tape& tape = *x.tape;
    Value h = tape.constant(NDArray(Shape{B, hidden}));
    Value c = kind == CellKind::kLstm ? tape.constant(NDArray(Shape{B, hidden})) : Value{};
    std::vector<Value> states;
    states.reserve(static_cast<std::size_t>(T));
    for (std::int64_t t = 0; t < T; ++t) {
        Value x_t = reshape(slice(x, 1, t, 1), Shape{B, d});
        if (kind == CellKind::kGru) {
            h = gru_cell(p, prefix, x_t, h);
        } else {
            LstmState st = lstm_cell(p, prefix, x_t, LstmState{h, c});
            h = st.h;
            c = st.c;
        }
        states.push_back(reshape(h, Shape{B, 1, hidden}));
    }
    return states.size() == 1 ? states.front() : concat(states, 1);
}

Value self_attention(const ParamLeaves& p, const std::string& prefix, Value h) {
    const Shape& s = h.shape();
    if (s.rank() != 3) throw contract_error("self_attention: input must be [B x T x H], got " + s.str());
    const std::int64_t B = s[0], T = s[1], H = s[2];

    std::vector<Value> steps, scores;
    steps.reserve(static_cast<std::size_t>(T));
    scores.reserve(static_cast<std::size_t>(T));
    for (std::int64_t t = 0; t < T; ++t) {
        Value h_t = reshape(slice(h, 1, t, 1), Shape{B, H});
        steps.push_back(h_t);
        scores.push_back(matmul(tanh(matmul(h_t, p[prefix + ".w"])), p[prefix + ".v"]));  // [B x 1]
    }
    Value alpha = softmax(scores.size() == 1 ? scores.front() : concat(scores, 1));  // [B x T]
    Value ctx;
    for (std::int64_t t = 0; t < T; ++t) {
        Value w_t = slice(alpha, 1, t, 1);  // [B x 1], broadcasts over H
        Value term = mul(w_t, steps[static_cast<std::size_t>(t)]);
        ctx = t == 0 ? term : add(ctx, term);
    }
    return ctx;
}

Value conv2d_layer(const ParamLeaves& p, const std::string& prefix, Value x, std::int64_t stride,
                   std::int64_t pad, Activation act) {
    Value y = conv2d(x, p[prefix + ".k"], stride, stride, pad, pad);
    const std::int64_t F = p[prefix + ".b"].shape()[0];
    Value b3 = reshape(p[prefix + ".b"], Shape{F, 1, 1});
    return activate(add(y, b3), act);
}

Value sparse_ce_loss(Value logits, const std::vector<std::int64_t>& labels) {
    const Shape& s = logits.shape();
    if (s.rank() != 2) throw contract_error("sparse_ce_loss: logits must be [B x K]");
    const std::int64_t B = s[0], K = s[1];
    if (static_cast<std::int64_t>(labels.size()) != B)
        throw contract_error("sparse_ce_loss: batch/label count mismatch");

    NDArray onehot(Shape{B, K});
    for (std::int64_t i = 0; i < B; ++i) {
        const std::int64_t lab = labels[static_cast<std::size_t>(i)];
        if (lab < 0 || lab >= K)
            throw contract_error("sparse_ce_loss: label " + std::to_string(lab) + " outside [0, " +
                                 std::to_string(K) + ")");
        onehot.at2(i, lab) = 1.0;
    }
    Tape& tape = *logits.tape;
    Value p = softmax(logits);
    Value picked = mul(p, tape.constant(std::move(onehot)));
    Value row = matmul(picked, tape.constant(NDArray::full(Shape{K, 1}, 1.0)));  // [B x 1]
    return scale(mean(log(row)), -1.0);
}

}  // namespace skelaug::num
