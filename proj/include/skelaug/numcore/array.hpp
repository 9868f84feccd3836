#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skelaug/common.hpp"

namespace skelaug::num {

// Dense row-major shape, rank >= 1.
struct Shape {
    std::vector<std::int64_t> dims;

    Shape() = default;
    Shape(std::initializer_list<std::int64_t> d) : dims(d) {}
    explicit Shape(std::vector<std::int64_t> d) : dims(std::move(d)) {}

    std::int64_t rank() const { return static_cast<std::int64_t>(dims.size()); }
    std::int64_t operator[](std::int64_t i) const { return dims[static_cast<std::size_t>(i)]; }
    std::int64_t count() const;
    bool operator==(const Shape& o) const { return dims == o.dims; }
    bool operator!=(const Shape& o) const { return !(*this == o); }
    std::string str() const;

    // Row-major strides; trailing dim has stride 1.
    std::vector<std::int64_t> strides() const;
};

// Contiguous dense array of 64-bit reals.
class NDArray {
public:
    NDArray() = default;
    explicit NDArray(Shape shape, double fill = 0.0);
    NDArray(Shape shape, std::vector<double> values);

    static NDArray zeros(Shape shape) { return NDArray(std::move(shape)); }
    static NDArray full(Shape shape, double v) { return NDArray(std::move(shape), v); }
    static NDArray scalar(double v) { return NDArray(Shape{1}, std::vector<double>{v}); }

    const Shape& shape() const { return shape_; }
    std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }
    bool empty() const { return v_.empty(); }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& vec() { return v_; }
    const std::vector<double>& vec() const { return v_; }

    double& operator[](std::int64_t i) { return v_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return v_[static_cast<std::size_t>(i)]; }

    double& at2(std::int64_t r, std::int64_t c) { return v_[static_cast<std::size_t>(r * shape_[1] + c)]; }
    double at2(std::int64_t r, std::int64_t c) const { return v_[static_cast<std::size_t>(r * shape_[1] + c)]; }

    // Same data, new shape; element count must match.
    NDArray reshaped(Shape shape) const;

    void fill(double v);
    bool all_finite() const;

private:
    Shape shape_;
    std::vector<double> v_;
};

// NumPy-style broadcast of two shapes (dims aligned from the right; a dim may
// be stretched when it is 1). Throws contract_error when incompatible.
Shape broadcast_shape(const Shape& a, const Shape& b);

}  // namespace skelaug::num
