#include "odernn/tensor.hpp"

#include <cmath>
#include <sstream>

namespace odernn {

namespace {

std::int64_t product(const std::vector<std::int64_t>& shape) {
    std::int64_t p = 1;
    for (auto e : shape) p *= e;
    return p;
}

void validate_shape(const std::vector<std::int64_t>& shape) {
    if (shape.empty() || shape.size() > 2) {
        throw DimensionError("tensor rank must be 1 or 2, got " + std::to_string(shape.size()));
    }
    for (auto e : shape) {
        if (e < 1) throw DimensionError("tensor extents must be >= 1");
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    validate_shape(shape);
    if (static_cast<std::int64_t>(data.size()) != product(shape)) {
        throw DimensionError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(*this));
    }
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
    validate_shape(shape);
    std::vector<double> d(static_cast<std::size_t>(product(shape)), 0.0);
    return Tensor(std::move(shape), std::move(d));
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
    validate_shape(shape);
    std::vector<double> d(static_cast<std::size_t>(product(shape)), value);
    return Tensor(std::move(shape), std::move(d));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vec(std::vector<double> values) {
    auto n = static_cast<std::int64_t>(values.size());
    return Tensor({n}, std::move(values));
}

Tensor Tensor::identity(std::int64_t n) {
    Tensor t = zeros({n, n});
    for (std::int64_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string shape_str(const Tensor& t) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) os << "x";
        os << t.shape[i];
    }
    os << "]";
    return os.str();
}

void require_finite(const Tensor& t, const char* where) {
    if (!t.all_finite()) {
        throw NumericError(std::string("non-finite value produced by ") + where);
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2) throw DimensionError("matmul: left operand must be rank 2, got " + shape_str(a));
    const std::int64_t m = a.rows(), k = a.cols();
    const std::int64_t bk = b.rows(), n = b.cols();
    if (k != bk) {
        throw DimensionError("matmul: inner extents differ, " + shape_str(a) + " vs " + shape_str(b));
    }
    // Rank-1 right operand is treated as a k-vector; result is an m-vector.
    Tensor out = (b.rank() == 1) ? Tensor::zeros({m}) : Tensor::zeros({m, n});
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::int64_t p = 0; p < k; ++p) acc += a.at(i, p) * b.data[static_cast<std::size_t>(p * n + j)];
            out.data[static_cast<std::size_t>(i * n + j)] = acc;
        }
    }
    require_finite(out, "matmul");
    return out;
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
}

template <typename F>
Tensor map2(const Tensor& a, const Tensor& b, F f, const char* op) {
    require_same_shape(a, b, op);
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = f(a.data[i], b.data[i]);
    require_finite(out, op);
    return out;
}

template <typename F>
Tensor map1(const Tensor& a, F f, const char* op) {
    Tensor out = a;
    for (auto& v : out.data) v = f(v);
    require_finite(out, op);
    return out;
}

}  // namespace

double sigmoid_scalar(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor add(const Tensor& a, const Tensor& b) {
    return map2(a, b, [](double x, double y) { return x + y; }, "add");
}
Tensor sub(const Tensor& a, const Tensor& b) {
    return map2(a, b, [](double x, double y) { return x - y; }, "sub");
}
Tensor mul(const Tensor& a, const Tensor& b) {
    return map2(a, b, [](double x, double y) { return x * y; }, "mul");
}
Tensor scale(const Tensor& a, double k) {
    return map1(a, [k](double x) { return x * k; }, "scale");
}
Tensor sigmoid(const Tensor& a) {
    return map1(a, [](double x) { return sigmoid_scalar(x); }, "sigmoid");
}
Tensor tanh_t(const Tensor& a) {
    return map1(a, [](double x) { return std::tanh(x); }, "tanh");
}

double reduce_sum(const Tensor& t) {
    if (t.data.empty()) throw DimensionError("sum: empty tensor");
    double acc = 0.0;
    for (double v : t.data) acc += v;
    return acc;
}

double reduce_mean(const Tensor& t) {
    if (t.data.empty()) throw DimensionError("mean: empty tensor");
    return reduce_sum(t) / static_cast<double>(t.data.size());
}

std::int64_t reduce_max_index(const Tensor& t) {
    if (t.data.empty()) throw DimensionError("max_index: empty tensor");
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.data.size(); ++i) {
        if (t.data[i] > t.data[best]) best = i;
    }
    return static_cast<std::int64_t>(best);
}

}  // namespace odernn
