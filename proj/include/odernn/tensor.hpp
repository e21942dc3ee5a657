#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odernn/errors.hpp"

namespace odernn {

/// Dense row-major array of 64-bit reals, rank 1 or 2. Immutable by
/// convention once handed to the tape; all operations return fresh values.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::int64_t> shape_, std::vector<double> data_);

    static Tensor zeros(std::vector<std::int64_t> shape);
    static Tensor full(std::vector<std::int64_t> shape, double value);
    static Tensor scalar(double value);
    static Tensor vec(std::vector<double> values);
    static Tensor identity(std::int64_t n);

    std::int64_t rank() const { return static_cast<std::int64_t>(shape.size()); }
    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    std::int64_t rows() const { return shape[0]; }
    std::int64_t cols() const { return rank() == 2 ? shape[1] : 1; }

    double& at(std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    double at(std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }
    double& at(std::int64_t i, std::int64_t j) { return data[static_cast<std::size_t>(i * cols() + j)]; }
    double at(std::int64_t i, std::int64_t j) const { return data[static_cast<std::size_t>(i * cols() + j)]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
};

std::string shape_str(const Tensor& t);

/// Throws NumericError if any element is NaN/Inf.
void require_finite(const Tensor& t, const char* where);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double k);
Tensor sigmoid(const Tensor& a);
Tensor tanh_t(const Tensor& a);

double sigmoid_scalar(double x);

double reduce_sum(const Tensor& t);
double reduce_mean(const Tensor& t);
/// Ties break toward the lowest index.
std::int64_t reduce_max_index(const Tensor& t);

}  // namespace odernn
