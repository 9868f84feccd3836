#pragma once

#include <cstdint>
#include <vector>

#include "skelaug/numcore/array.hpp"

namespace skelaug::num {

class Tape;

// Handle to one differentiable value on a tape. The node carries the data,
// the gradient (populated by Tape::backward) and its id within the tape.
struct Value {
    Tape* tape = nullptr;
    std::int32_t id = -1;

    const NDArray& val() const;
    const NDArray& grad() const;
    const Shape& shape() const { return val().shape(); }
};

enum class Op : std::uint8_t {
    kLeaf,
    kAdd,       // broadcasting
    kMul,       // broadcasting, elementwise
    kMatMul,    // rank-2 only
    kSigmoid,
    kTanh,
    kExp,
    kLog,       // clamped at kLogFloor so finite inputs stay finite
    kAbs,
    kMean,      // full reduction to a scalar
    kConcat,
    kSlice,
    kSoftmax,   // last axis, max-subtracted
    kConv2d,    // cross-correlation, NCHW
    kMaxPool2d, // non-overlapping window
    kReshape,
};

inline constexpr double kLogFloor = 1e-300;

struct Node {
    Op op = Op::kLeaf;
    NDArray value;
    NDArray grad;  // empty until backward touches the tape
    std::vector<std::int32_t> inputs;
    bool requires_grad = false;  // meaningful for leaves

    // per-op extras
    std::int64_t axis = 0, start = 0, len = 0;
    std::int64_t stride_h = 1, stride_w = 1, pad_h = 0, pad_w = 0;
    std::int64_t win_h = 1, win_w = 1;
    std::vector<std::int64_t> arg;  // maxpool winner offsets
};

// Append-only computation tape. Nodes may only reference earlier nodes, so the
// recorded graph is acyclic by construction; backward walks it once in
// reverse. One tape is single-owner; separate tapes are independent.
class Tape {
public:
    Value leaf(NDArray v, bool requires_grad = false);
    Value constant(NDArray v) { return leaf(std::move(v), false); }
    Value constant_scalar(double v) { return leaf(NDArray::scalar(v), false); }

    // Populates grad = d(loss)/d(node) on every node; resets previous grads.
    void backward(Value loss);

    Node& node(std::int32_t id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(nodes_.size()); }

    Value emit(Node n);

private:
    std::vector<Node> nodes_;
};

// Primitives. Anything else in the toolkit is composed from these.
Value add(Value a, Value b);
Value mul(Value a, Value b);
Value matmul(Value a, Value b);
Value sigmoid(Value x);
Value tanh(Value x);
Value exp(Value x);
Value log(Value x);
Value abs(Value x);
Value mean(Value x);
Value concat(const std::vector<Value>& xs, std::int64_t axis);
Value slice(Value x, std::int64_t axis, std::int64_t start, std::int64_t len);
Value softmax(Value x);
Value conv2d(Value x, Value kernels, std::int64_t stride_h, std::int64_t stride_w,
             std::int64_t pad_h, std::int64_t pad_w);
Value maxpool2d(Value x, std::int64_t win_h, std::int64_t win_w);
Value reshape(Value x, Shape shape);

// Compositions.
Value scale(Value x, double c);                 // x * c
Value add_scalar(Value x, double c);            // x + c
Value sub(Value a, Value b);                    // a + (-1) * b
Value sum(Value x);                             // mean(x) * count
Value l1_mean(Value a, Value b);                // mean(|a - b|)

}  // namespace skelaug::num
