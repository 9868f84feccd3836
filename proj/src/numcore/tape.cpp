#include "skelaug/numcore/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace skelaug::num {

const NDArray& Value::val() const { return tape->node(id).value; }
const NDArray& Value::grad() const { return tape->node(id).grad; }

Value Tape::emit(Node n) {
    for (auto in : n.inputs)
        if (in < 0 || in >= size())
            throw contract_error("tape: node references an id outside the tape");
    nodes_.push_back(std::move(n));
    return Value{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Value Tape::leaf(NDArray v, bool requires_grad) {
    Node n;
    n.op = Op::kLeaf;
    n.value = std::move(v);
    n.requires_grad = requires_grad;
    return emit(std::move(n));
}

namespace {

// Right-aligned strides for broadcasting `in` over `out`; 0 where stretched.
std::vector<std::int64_t> bcast_strides(const Shape& out, const Shape& in) {
    auto in_strides = in.strides();
    std::vector<std::int64_t> s(static_cast<std::size_t>(out.rank()), 0);
    for (std::int64_t i = 0; i < in.rank(); ++i) {
        const std::int64_t od = out.rank() - 1 - i;
        const std::int64_t id = in.rank() - 1 - i;
        s[static_cast<std::size_t>(od)] = in[id] == 1 ? 0 : in_strides[static_cast<std::size_t>(id)];
    }
    return s;
}

// Calls fn(out_index, a_index, b_index) over every element of `out`.
template <typename Fn>
void for_each_bcast(const Shape& out, const Shape& a, const Shape& b, Fn&& fn) {
    const std::int64_t rank = out.rank();
    const auto sa = bcast_strides(out, a);
    const auto sb = bcast_strides(out, b);
    std::vector<std::int64_t> idx(static_cast<std::size_t>(rank), 0);
    std::int64_t ai = 0, bi = 0;
    const std::int64_t total = out.count();
    for (std::int64_t oi = 0; oi < total; ++oi) {
        fn(oi, ai, bi);
        for (std::int64_t d = rank - 1; d >= 0; --d) {
            auto& k = idx[static_cast<std::size_t>(d)];
            ++k;
            ai += sa[static_cast<std::size_t>(d)];
            bi += sb[static_cast<std::size_t>(d)];
            if (k < out[d]) break;
            ai -= k * sa[static_cast<std::size_t>(d)];
            bi -= k * sb[static_cast<std::size_t>(d)];
            k = 0;
        }
    }
}

void check_same_tape(Value a, Value b) {
    if (a.tape != b.tape) throw contract_error("tape: operands live on different tapes");
}

struct ConcatSplit {
    std::int64_t outer, inner;
};

ConcatSplit axis_split(const Shape& s, std::int64_t axis) {
    ConcatSplit r{1, 1};
    for (std::int64_t i = 0; i < axis; ++i) r.outer *= s[i];
    for (std::int64_t i = axis + 1; i < s.rank(); ++i) r.inner *= s[i];
    return r;
}

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Value add(Value a, Value b) {
    check_same_tape(a, b);
    Node n;
    n.op = Op::kAdd;
    n.inputs = {a.id, b.id};
    n.value = NDArray(broadcast_shape(a.shape(), b.shape()));
    const auto& av = a.val();
    const auto& bv = b.val();
    auto* o = n.value.data();
    for_each_bcast(n.value.shape(), av.shape(), bv.shape(),
                   [&](std::int64_t oi, std::int64_t ai, std::int64_t bi) { o[oi] = av[ai] + bv[bi]; });
    return a.tape->emit(std::move(n));
}

Value mul(Value a, Value b) {
    check_same_tape(a, b);
    Node n;
    n.op = Op::kMul;
    n.inputs = {a.id, b.id};
    n.value = NDArray(broadcast_shape(a.shape(), b.shape()));
    const auto& av = a.val();
    const auto& bv = b.val();
    auto* o = n.value.data();
    for_each_bcast(n.value.shape(), av.shape(), bv.shape(),
                   [&](std::int64_t oi, std::int64_t ai, std::int64_t bi) { o[oi] = av[ai] * bv[bi]; });
    return a.tape->emit(std::move(n));
}

Value matmul(Value a, Value b) {
    check_same_tape(a, b);
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sa.rank() != 2 || sb.rank() != 2 || sa[1] != sb[0])
        throw contract_error("matmul: need [n x k] by [k x m], got " + sa.str() + " and " + sb.str());
    const std::int64_t nrows = sa[0], k = sa[1], m = sb[1];
    Node n;
    n.op = Op::kMatMul;
    n.inputs = {a.id, b.id};
    n.value = NDArray(Shape{nrows, m});
    const double* av = a.val().data();
    const double* bv = b.val().data();
    double* o = n.value.data();
    for (std::int64_t i = 0; i < nrows; ++i) {
        double* orow = o + i * m;
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const double aik = av[i * k + kk];
            const double* brow = bv + kk * m;
            for (std::int64_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
        }
    }
    return a.tape->emit(std::move(n));
}

namespace {

Value unary(Value x, Op op, double (*fwd)(double)) {
    Node n;
    n.op = op;
    n.inputs = {x.id};
    n.value = NDArray(x.shape());
    const auto& xv = x.val();
    for (std::int64_t i = 0; i < xv.size(); ++i) n.value[i] = fwd(xv[i]);
    return x.tape->emit(std::move(n));
}

}  // namespace

Value sigmoid(Value x) { return unary(x, Op::kSigmoid, +[](double v) { return stable_sigmoid(v); }); }
Value tanh(Value x) { return unary(x, Op::kTanh, +[](double v) { return std::tanh(v); }); }
Value exp(Value x) { return unary(x, Op::kExp, +[](double v) { return std::exp(v); }); }
Value log(Value x) {
    return unary(x, Op::kLog, +[](double v) { return std::log(v < kLogFloor ? kLogFloor : v); });
}
Value abs(Value x) { return unary(x, Op::kAbs, +[](double v) { return std::fabs(v); }); }

Value mean(Value x) {
    Node n;
    n.op = Op::kMean;
    n.inputs = {x.id};
    const auto& xv = x.val();
    double acc = 0.0;
    for (std::int64_t i = 0; i < xv.size(); ++i) acc += xv[i];
    n.value = NDArray::scalar(acc / static_cast<double>(xv.size()));
    return x.tape->emit(std::move(n));
}

Value concat(const std::vector<Value>& xs, std::int64_t axis) {
    if (xs.empty()) throw contract_error("concat: no inputs");
    Tape* t = xs.front().tape;
    const Shape& first = xs.front().shape();
    if (axis < 0 || axis >= first.rank()) throw contract_error("concat: axis out of range");
    std::int64_t axis_total = 0;
    for (const auto& v : xs) {
        if (v.tape != t) throw contract_error("tape: operands live on different tapes");
        const Shape& s = v.shape();
        if (s.rank() != first.rank()) throw contract_error("concat: rank mismatch");
        for (std::int64_t d = 0; d < s.rank(); ++d)
            if (d != axis && s[d] != first[d])
                throw contract_error("concat: shapes differ off-axis: " + first.str() + " vs " + s.str());
        axis_total += s[axis];
    }
    Shape out = first;
    out.dims[static_cast<std::size_t>(axis)] = axis_total;

    Node n;
    n.op = Op::kConcat;
    n.axis = axis;
    n.value = NDArray(out);
    for (const auto& v : xs) n.inputs.push_back(v.id);

    const auto split = axis_split(out, axis);
    double* o = n.value.data();
    std::int64_t col = 0;
    for (const auto& v : xs) {
        const auto& xv = v.val();
        const std::int64_t w = v.shape()[axis] * split.inner;
        const std::int64_t out_w = axis_total * split.inner;
        for (std::int64_t r = 0; r < split.outer; ++r)
            std::memcpy(o + r * out_w + col, xv.data() + r * w, static_cast<std::size_t>(w) * sizeof(double));
        col += w;
    }
    return t->emit(std::move(n));
}

Value slice(Value x, std::int64_t axis, std::int64_t start, std::int64_t len) {
    const Shape& s = x.shape();
    if (axis < 0 || axis >= s.rank()) throw contract_error("slice: axis out of range");
    if (len <= 0 || start < 0 || start + len > s[axis])
        throw contract_error("slice: window [" + std::to_string(start) + ", " + std::to_string(start + len) +
                             ") outside dim " + std::to_string(s[axis]));
    Shape out = s;
    out.dims[static_cast<std::size_t>(axis)] = len;

    Node n;
    n.op = Op::kSlice;
    n.axis = axis;
    n.start = start;
    n.len = len;
    n.inputs = {x.id};
    n.value = NDArray(out);

    const auto split = axis_split(s, axis);
    const std::int64_t in_w = s[axis] * split.inner;
    const std::int64_t out_w = len * split.inner;
    const double* xv = x.val().data();
    double* o = n.value.data();
    for (std::int64_t r = 0; r < split.outer; ++r)
        std::memcpy(o + r * out_w, xv + r * in_w + start * split.inner,
                    static_cast<std::size_t>(out_w) * sizeof(double));
    return x.tape->emit(std::move(n));
}

Value softmax(Value x) {
    const Shape& s = x.shape();
    const std::int64_t cols = s[s.rank() - 1];
    const std::int64_t rows = s.count() / cols;
    Node n;
    n.op = Op::kSoftmax;
    n.inputs = {x.id};
    n.value = NDArray(s);
    const double* xv = x.val().data();
    double* o = n.value.data();
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xr = xv + r * cols;
        double* orow = o + r * cols;
        double mx = xr[0];
        for (std::int64_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
        double denom = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) {
            orow[j] = std::exp(xr[j] - mx);
            denom += orow[j];
        }
        for (std::int64_t j = 0; j < cols; ++j) orow[j] /= denom;
    }
    return x.tape->emit(std::move(n));
}

Value conv2d(Value x, Value kernels, std::int64_t stride_h, std::int64_t stride_w,
             std::int64_t pad_h, std::int64_t pad_w) {
    check_same_tape(x, kernels);
    const Shape& xs = x.shape();
    const Shape& ks = kernels.shape();
    if (xs.rank() != 4 || ks.rank() != 4) throw contract_error("conv2d: need NCHW input and FCHW kernels");
    if (xs[1] != ks[1]) throw contract_error("conv2d: channel mismatch " + xs.str() + " vs " + ks.str());
    if (stride_h < 1 || stride_w < 1 || pad_h < 0 || pad_w < 0) throw contract_error("conv2d: bad stride/pad");
    const std::int64_t B = xs[0], C = xs[1], H = xs[2], W = xs[3];
    const std::int64_t F = ks[0], kh = ks[2], kw = ks[3];
    if (H + 2 * pad_h < kh || W + 2 * pad_w < kw)
        throw contract_error("conv2d: kernel larger than padded input");
    const std::int64_t OH = (H + 2 * pad_h - kh) / stride_h + 1;
    const std::int64_t OW = (W + 2 * pad_w - kw) / stride_w + 1;

    Node n;
    n.op = Op::kConv2d;
    n.inputs = {x.id, kernels.id};
    n.stride_h = stride_h;
    n.stride_w = stride_w;
    n.pad_h = pad_h;
    n.pad_w = pad_w;
    n.value = NDArray(Shape{B, F, OH, OW});
    const double* xv = x.val().data();
    const double* kv = kernels.val().data();
    double* o = n.value.data();
    for (std::int64_t b = 0; b < B; ++b)
        for (std::int64_t f = 0; f < F; ++f)
            for (std::int64_t oh = 0; oh < OH; ++oh)
                for (std::int64_t ow = 0; ow < OW; ++ow) {
                    double acc = 0.0;
                    for (std::int64_t c = 0; c < C; ++c)
                        for (std::int64_t i = 0; i < kh; ++i) {
                            const std::int64_t ih = oh * stride_h + i - pad_h;
                            if (ih < 0 || ih >= H) continue;
                            for (std::int64_t j = 0; j < kw; ++j) {
                                const std::int64_t iw = ow * stride_w + j - pad_w;
                                if (iw < 0 || iw >= W) continue;
                                acc += xv[((b * C + c) * H + ih) * W + iw] *
                                       kv[((f * C + c) * kh + i) * kw + j];
                            }
                        }
                    o[((b * F + f) * OH + oh) * OW + ow] = acc;
                }
    return x.tape->emit(std::move(n));
}

Value maxpool2d(Value x, std::int64_t win_h, std::int64_t win_w) {
    const Shape& xs = x.shape();
    if (xs.rank() != 4) throw contract_error("maxpool2d: need NCHW input");
    if (win_h < 1 || win_w < 1) throw contract_error("maxpool2d: bad window");
    const std::int64_t B = xs[0], C = xs[1], H = xs[2], W = xs[3];
    const std::int64_t OH = H / win_h, OW = W / win_w;
    if (OH < 1 || OW < 1) throw contract_error("maxpool2d: window larger than input");

    Node n;
    n.op = Op::kMaxPool2d;
    n.inputs = {x.id};
    n.win_h = win_h;
    n.win_w = win_w;
    n.value = NDArray(Shape{B, C, OH, OW});
    n.arg.resize(static_cast<std::size_t>(n.value.size()));
    const double* xv = x.val().data();
    double* o = n.value.data();
    std::int64_t oi = 0;
    for (std::int64_t b = 0; b < B; ++b)
        for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t oh = 0; oh < OH; ++oh)
                for (std::int64_t ow = 0; ow < OW; ++ow, ++oi) {
                    double best = -1e308;
                    std::int64_t best_at = 0;
                    for (std::int64_t i = 0; i < win_h; ++i)
                        for (std::int64_t j = 0; j < win_w; ++j) {
                            const std::int64_t at = ((b * C + c) * H + oh * win_h + i) * W + ow * win_w + j;
                            if (xv[at] > best) {
                                best = xv[at];
                                best_at = at;
                            }
                        }
                    o[oi] = best;
                    n.arg[static_cast<std::size_t>(oi)] = best_at;
                }
    return x.tape->emit(std::move(n));
}

Value reshape(Value x, Shape shape) {
    Node n;
    n.op = Op::kReshape;
    n.inputs = {x.id};
    n.value = x.val().reshaped(std::move(shape));
    return x.tape->emit(std::move(n));
}

void Tape::backward(Value loss) {
    if (loss.tape != this) throw contract_error("backward: loss lives on another tape");
    Node& top = node(loss.id);
    if (top.value.size() != 1) throw contract_error("backward: loss must be a scalar, got shape " + top.value.shape().str());

    for (auto& n : nodes_) {
        n.grad = NDArray(n.value.shape());  // zero-filled
    }
    top.grad[0] = 1.0;

    for (std::int32_t id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        const double* g = n.grad.data();
        switch (n.op) {
            case Op::kLeaf:
                break;
            case Op::kAdd: {
                Node& a = node(n.inputs[0]);
                Node& b = node(n.inputs[1]);
                double* ga = a.grad.data();
                double* gb = b.grad.data();
                for_each_bcast(n.value.shape(), a.value.shape(), b.value.shape(),
                               [&](std::int64_t oi, std::int64_t ai, std::int64_t bi) {
                                   ga[ai] += g[oi];
                                   gb[bi] += g[oi];
                               });
                break;
            }
            case Op::kMul: {
                Node& a = node(n.inputs[0]);
                Node& b = node(n.inputs[1]);
                double* ga = a.grad.data();
                double* gb = b.grad.data();
                const double* av = a.value.data();
                const double* bv = b.value.data();
                for_each_bcast(n.value.shape(), a.value.shape(), b.value.shape(),
                               [&](std::int64_t oi, std::int64_t ai, std::int64_t bi) {
                                   ga[ai] += g[oi] * bv[bi];
                                   gb[bi] += g[oi] * av[ai];
                               });
                break;
            }
            case Op::kMatMul: {
                Node& a = node(n.inputs[0]);
                Node& b = node(n.inputs[1]);
                const std::int64_t nrows = a.value.shape()[0], k = a.value.shape()[1], m = b.value.shape()[1];
                const double* av = a.value.data();
                const double* bv = b.value.data();
                double* ga = a.grad.data();
                double* gb = b.grad.data();
                // dA = dO . B^T
                for (std::int64_t i = 0; i < nrows; ++i)
                    for (std::int64_t kk = 0; kk < k; ++kk) {
                        const double* grow = g + i * m;
                        const double* brow = bv + kk * m;
                        double acc = 0.0;
                        for (std::int64_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
                        ga[i * k + kk] += acc;
                    }
                // dB = A^T . dO
                for (std::int64_t i = 0; i < nrows; ++i) {
                    const double* grow = g + i * m;
                    for (std::int64_t kk = 0; kk < k; ++kk) {
                        const double aik = av[i * k + kk];
                        double* gbrow = gb + kk * m;
                        for (std::int64_t j = 0; j < m; ++j) gbrow[j] += aik * grow[j];
                    }
                }
                break;
            }
            case Op::kSigmoid: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                const double* s = n.value.data();
                for (std::int64_t i = 0; i < n.value.size(); ++i) ga[i] += g[i] * s[i] * (1.0 - s[i]);
                break;
            }
            case Op::kTanh: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                const double* t = n.value.data();
                for (std::int64_t i = 0; i < n.value.size(); ++i) ga[i] += g[i] * (1.0 - t[i] * t[i]);
                break;
            }
            case Op::kExp: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                const double* e = n.value.data();
                for (std::int64_t i = 0; i < n.value.size(); ++i) ga[i] += g[i] * e[i];
                break;
            }
            case Op::kLog: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                const double* xv = a.value.data();
                for (std::int64_t i = 0; i < n.value.size(); ++i)
                    if (xv[i] >= kLogFloor) ga[i] += g[i] / xv[i];
                break;
            }
            case Op::kAbs: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                const double* xv = a.value.data();
                for (std::int64_t i = 0; i < n.value.size(); ++i) {
                    if (xv[i] > 0)
                        ga[i] += g[i];
                    else if (xv[i] < 0)
                        ga[i] -= g[i];
                }
                break;
            }
            case Op::kMean: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                const double w = g[0] / static_cast<double>(a.value.size());
                for (std::int64_t i = 0; i < a.value.size(); ++i) ga[i] += w;
                break;
            }
            case Op::kConcat: {
                const auto split = axis_split(n.value.shape(), n.axis);
                const std::int64_t out_w = n.value.shape()[n.axis] * split.inner;
                std::int64_t col = 0;
                for (auto in_id : n.inputs) {
                    Node& a = node(in_id);
                    const std::int64_t w = a.value.shape()[n.axis] * split.inner;
                    double* ga = a.grad.data();
                    for (std::int64_t r = 0; r < split.outer; ++r) {
                        const double* grow = g + r * out_w + col;
                        double* garow = ga + r * w;
                        for (std::int64_t j = 0; j < w; ++j) garow[j] += grow[j];
                    }
                    col += w;
                }
                break;
            }
            case Op::kSlice: {
                Node& a = node(n.inputs[0]);
                const auto split = axis_split(a.value.shape(), n.axis);
                const std::int64_t in_w = a.value.shape()[n.axis] * split.inner;
                const std::int64_t out_w = n.len * split.inner;
                double* ga = a.grad.data();
                for (std::int64_t r = 0; r < split.outer; ++r) {
                    const double* grow = g + r * out_w;
                    double* garow = ga + r * in_w + n.start * split.inner;
                    for (std::int64_t j = 0; j < out_w; ++j) garow[j] += grow[j];
                }
                break;
            }
            case Op::kSoftmax: {
                Node& a = node(n.inputs[0]);
                const std::int64_t cols = n.value.shape()[n.value.shape().rank() - 1];
                const std::int64_t rows = n.value.size() / cols;
                double* ga = a.grad.data();
                const double* s = n.value.data();
                for (std::int64_t r = 0; r < rows; ++r) {
                    const double* srow = s + r * cols;
                    const double* grow = g + r * cols;
                    double dot = 0.0;
                    for (std::int64_t j = 0; j < cols; ++j) dot += grow[j] * srow[j];
                    double* garow = ga + r * cols;
                    for (std::int64_t j = 0; j < cols; ++j) garow[j] += srow[j] * (grow[j] - dot);
                }
                break;
            }
            case Op::kConv2d: {
                Node& x = node(n.inputs[0]);
                Node& ker = node(n.inputs[1]);
                const Shape& xs = x.value.shape();
                const Shape& ks = ker.value.shape();
                const std::int64_t B = xs[0], C = xs[1], H = xs[2], W = xs[3];
                const std::int64_t F = ks[0], kh = ks[2], kw = ks[3];
                const std::int64_t OH = n.value.shape()[2], OW = n.value.shape()[3];
                const double* xv = x.value.data();
                const double* kv = ker.value.data();
                double* gx = x.grad.data();
                double* gk = ker.grad.data();
                for (std::int64_t b = 0; b < B; ++b)
                    for (std::int64_t f = 0; f < F; ++f)
                        for (std::int64_t oh = 0; oh < OH; ++oh)
                            for (std::int64_t ow = 0; ow < OW; ++ow) {
                                const double go = g[((b * F + f) * OH + oh) * OW + ow];
                                if (go == 0.0) continue;
                                for (std::int64_t c = 0; c < C; ++c)
                                    for (std::int64_t i = 0; i < kh; ++i) {
                                        const std::int64_t ih = oh * n.stride_h + i - n.pad_h;
                                        if (ih < 0 || ih >= H) continue;
                                        for (std::int64_t j = 0; j < kw; ++j) {
                                            const std::int64_t iw = ow * n.stride_w + j - n.pad_w;
                                            if (iw < 0 || iw >= W) continue;
                                            const std::int64_t xat = ((b * C + c) * H + ih) * W + iw;
                                            const std::int64_t kat = ((f * C + c) * kh + i) * kw + j;
                                            gx[xat] += go * kv[kat];
                                            gk[kat] += go * xv[xat];
                                        }
                                    }
                            }
                break;
            }
            case Op::kMaxPool2d: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                for (std::int64_t i = 0; i < n.value.size(); ++i)
                    ga[n.arg[static_cast<std::size_t>(i)]] += g[i];
                break;
            }
            case Op::kReshape: {
                Node& a = node(n.inputs[0]);
                double* ga = a.grad.data();
                for (std::int64_t i = 0; i < n.value.size(); ++i) ga[i] += g[i];
                break;
            }
        }
    }
}

Value scale(Value x, double c) { return mul(x, x.tape->constant_scalar(c)); }
Value add_scalar(Value x, double c) { return add(x, x.tape->constant_scalar(c)); }
Value sub(Value a, Value b) { return add(a, scale(b, -1.0)); }
Value sum(Value x) { return scale(mean(x), static_cast<double>(x.val().size())); }
Value l1_mean(Value a, Value b) { return mean(abs(sub(a, b))); }

}  // namespace skelaug::num
