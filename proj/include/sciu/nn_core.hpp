#pragma once

// Dense float64 numerics for the SCIU head: matrices, linear layers,
// activations, softmax/cross-entropy, momentum SGD, and a central-difference
// gradient oracle used by the tests.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sciu {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct LinearLayer {
    Matrix weight;  // out x in
    Vector bias;    // out

    LinearLayer() = default;
    LinearLayer(std::size_t in, std::size_t out) : weight(out, in), bias(out, 0.0) {}

    std::size_t in_dim() const { return weight.cols(); }
    std::size_t out_dim() const { return weight.rows(); }
    std::size_t param_count() const { return weight.rows() * weight.cols() + bias.size(); }

    friend bool operator==(const LinearLayer&, const LinearLayer&) = default;
};

/// W·x + b. Throws ConfigError when x.size() != in_dim or bias/weight disagree.
Vector linear_forward(const LinearLayer& layer, std::span<const double> x);

/// Wᵀ·g, the input-gradient of a linear layer.
Vector linear_backward_input(const LinearLayer& layer, std::span<const double> grad_out);

Vector relu(std::span<const double> x);

double sigmoid(double x);

/// Max-subtracted softmax.
Vector softmax(std::span<const double> logits);

inline constexpr double kLogClamp = 1e-12;

/// −log(max(probs[label], 1e-12)).
double cross_entropy(std::span<const double> probs, std::size_t label);

/// Lowest index among maximal entries.
std::size_t argmax(std::span<const double> values);

/// Classic (Polyak) momentum: v ← μ·v + g; p ← p − lr·v.
void sgd_momentum_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, double lr, double momentum);

/// Central differences (L(p+h·e_i) − L(p−h·e_i)) / 2h for every coordinate.
Vector finite_difference_gradient(const std::function<double(std::span<const double>)>& loss_fn,
                                  std::span<const double> params, double h = 1e-5);

/// |a−b| / max(|a|, |b|, floor). Used by the gradient checks.
double relative_error(double a, double b, double floor = 1e-8);

bool all_finite(std::span<const double> values);

}  // namespace sciu
