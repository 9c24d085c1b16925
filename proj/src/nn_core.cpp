#include "sciu/nn_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sciu/errors.hpp"

namespace sciu {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ConfigError("matrix data length " + std::to_string(data_.size()) + " != " +
                          std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector linear_forward(const LinearLayer& layer, std::span<const double> x) {
    const auto& w = layer.weight;
    if (x.size() != w.cols()) {
        throw ConfigError("linear_forward: input has " + std::to_string(x.size()) +
                          " entries, layer expects " + std::to_string(w.cols()));
    }
    if (layer.bias.size() != w.rows()) {
        throw ConfigError("linear_forward: bias length does not match weight rows");
    }
    Vector out(layer.bias);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const auto row = w.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
    return out;
}

Vector linear_backward_input(const LinearLayer& layer, std::span<const double> grad_out) {
    const auto& w = layer.weight;
    if (grad_out.size() != w.rows()) {
        throw ConfigError("linear_backward_input: gradient length does not match layer output");
    }
    Vector out(w.cols(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const double g = grad_out[r];
        if (g == 0.0) continue;
        const auto row = w.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * g;
    }
    return out;
}

Vector relu(std::span<const double> x) {
    Vector out(x.begin(), x.end());
    for (auto& v : out) v = std::max(0.0, v);
    return out;
}

double sigmoid(double x) {
    // Branch on sign so exp never overflows.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vector softmax(std::span<const double> logits) {
    if (logits.empty()) throw ConfigError("softmax of empty vector");
    const double mx = *std::max_element(logits.begin(), logits.end());
    Vector out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
    if (label >= probs.size()) {
        throw ConfigError("cross_entropy: label " + std::to_string(label) + " out of range");
    }
    return -std::log(std::max(probs[label], kLogClamp));
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw ConfigError("argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

void sgd_momentum_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, double lr, double momentum) {
    if (params.size() != grads.size() || params.size() != velocity.size()) {
        throw ConfigError("sgd_momentum_step: params/grads/velocity sizes differ (" +
                          std::to_string(params.size()) + ", " + std::to_string(grads.size()) +
                          ", " + std::to_string(velocity.size()) + ")");
    }
    if (!(lr >= 0.0) || !(momentum >= 0.0 && momentum < 1.0)) {
        throw ConfigError("sgd_momentum_step: need lr >= 0 and momentum in [0, 1)");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] + grads[i];
        params[i] -= lr * velocity[i];
    }
}

Vector finite_difference_gradient(const std::function<double(std::span<const double>)>& loss_fn,
                                  std::span<const double> params, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_difference_gradient: step must be positive");
    Vector probe(params.begin(), params.end());
    Vector grad(params.size());
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double up = loss_fn(probe);
        probe[i] = orig - h;
        const double down = loss_fn(probe);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double relative_error(double a, double b, double floor) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / scale;
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace sciu
