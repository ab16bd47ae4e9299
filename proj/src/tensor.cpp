#include "qocr/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "qocr/error.hpp"
#include "qocr/kernels.hpp"

namespace qocr {

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    for (auto e : shape_)
        if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape_));
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    for (auto e : shape_)
        if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape_));
    if (data_.size() != shape_size(shape_))
        throw DimensionError("data length " + std::to_string(data_.size()) + " does not match shape " +
                             shape_string(shape_));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("ragged matrix literal");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size())
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_string(shape_));
    return shape_[axis];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
    if (index.size() != shape_.size())
        throw DimensionError("index rank " + std::to_string(index.size()) + " does not match shape " +
                             shape_string(shape_));
    std::size_t off = 0;
    std::size_t axis = 0;
    for (auto i : index) {
        if (i >= shape_[axis]) throw DimensionError("index out of range for shape " + shape_string(shape_));
        off = off * shape_[axis] + i;
        ++axis;
    }
    return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const& {
    Tensor copy = *this;
    return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
    if (shape_size(shape) != data_.size())
        throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), std::move(data_));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void check_finite(const Tensor& t, const std::string& context) {
    for (double v : t.values())
        if (!std::isfinite(v)) throw NonFiniteError(context + ": non-finite value in tensor " + shape_string(t.shape()));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw DimensionError("matmul shape mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor c({m, n});
    kernels::gemm(false, false, m, n, k, 1.0, a.data(), k, b.data(), n, 0.0, c.data(), n);
    check_finite(c, "matmul");
    return c;
}

Tensor elementwise(const Tensor& a, const Tensor& b, ElementwiseOp op) {
    const bool same = a.shape() == b.shape();
    const bool bias = !same && b.rank() == 1 && a.rank() >= 1 && b.dim(0) == a.shape().back();
    if (!same && !bias)
        throw DimensionError("elementwise shape mismatch: " + shape_string(a.shape()) + " vs " +
                             shape_string(b.shape()));
    Tensor out(a.shape());
    const std::size_t period = b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[bias ? i % period : i];
        switch (op) {
            case ElementwiseOp::add: out[i] = x + y; break;
            case ElementwiseOp::sub: out[i] = x - y; break;
            case ElementwiseOp::mul: out[i] = x * y; break;
        }
    }
    check_finite(out, "elementwise");
    return out;
}

Reduction reduce(const Tensor& a, std::size_t axis, ReduceOp op) {
    if (axis >= a.rank())
        throw DimensionError("reduce axis " + std::to_string(axis) + " out of range for shape " +
                             shape_string(a.shape()));
    const Shape& s = a.shape();
    const std::size_t extent = s[axis];
    const std::size_t outer = shape_size(Shape(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(axis)));
    const std::size_t inner = shape_size(Shape(s.begin() + static_cast<std::ptrdiff_t>(axis) + 1, s.end()));

    Shape out_shape;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i != axis) out_shape.push_back(s[i]);
    // Reducing a vector yields a single-element tensor rather than a rank-0 one.
    if (out_shape.empty()) out_shape.push_back(1);

    Reduction r{Tensor(out_shape), {}};
    if (op == ReduceOp::max) r.indices.assign(outer * inner, 0);

    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const double* base = a.data() + o * extent * inner + in;
            double acc = base[0];
            std::size_t best = 0;
            for (std::size_t j = 1; j < extent; ++j) {
                const double v = base[j * inner];
                if (op == ReduceOp::max) {
                    if (v > acc) {
                        acc = v;
                        best = j;
                    }
                } else {
                    acc += v;
                }
            }
            if (op == ReduceOp::mean) acc /= static_cast<double>(extent);
            r.values[o * inner + in] = acc;
            if (op == ReduceOp::max) r.indices[o * inner + in] = best;
        }
    }
    check_finite(r.values, "reduce");
    return r;
}

double sum_all(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    return s;
}

}  // namespace qocr
