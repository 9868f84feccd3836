#include "skelaug/numcore/array.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace skelaug::num {

std::int64_t Shape::count() const {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::string Shape::str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << "x";
        os << dims[i];
    }
    os << "]";
    return os.str();
}

std::vector<std::int64_t> Shape::strides() const {
    std::vector<std::int64_t> s(dims.size(), 1);
    for (std::int64_t i = rank() - 2; i >= 0; --i)
        s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i + 1)] * dims[static_cast<std::size_t>(i + 1)];
    return s;
}

NDArray::NDArray(Shape shape, double fill) : shape_(std::move(shape)) {
    if (shape_.rank() < 1) throw contract_error("NDArray: rank must be >= 1");
    for (auto d : shape_.dims)
        if (d <= 0) throw contract_error("NDArray: dims must be positive, got " + shape_.str());
    v_.assign(static_cast<std::size_t>(shape_.count()), fill);
}

NDArray::NDArray(Shape shape, std::vector<double> values) : shape_(std::move(shape)), v_(std::move(values)) {
    if (shape_.rank() < 1) throw contract_error("NDArray: rank must be >= 1");
    if (shape_.count() != static_cast<std::int64_t>(v_.size()))
        throw contract_error("NDArray: " + std::to_string(v_.size()) + " values do not fill shape " + shape_.str());
}

NDArray NDArray::reshaped(Shape shape) const {
    if (shape.count() != size())
        throw contract_error("reshape: element count mismatch " + shape_.str() + " -> " + shape.str());
    NDArray out;
    out.shape_ = std::move(shape);
    out.v_ = v_;
    return out;
}

void NDArray::fill(double v) { std::fill(v_.begin(), v_.end(), v); }

bool NDArray::all_finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
    const std::int64_t rank = std::max(a.rank(), b.rank());
    std::vector<std::int64_t> dims(static_cast<std::size_t>(rank), 1);
    for (std::int64_t i = 0; i < rank; ++i) {
        const std::int64_t da = i < a.rank() ? a[a.rank() - 1 - i] : 1;
        const std::int64_t db = i < b.rank() ? b[b.rank() - 1 - i] : 1;
        if (da != db && da != 1 && db != 1)
            throw contract_error("broadcast: incompatible shapes " + a.str() + " and " + b.str());
        dims[static_cast<std::size_t>(rank - 1 - i)] = std::max(da, db);
    }
    return Shape(std::move(dims));
}

}  // namespace skelaug::num
