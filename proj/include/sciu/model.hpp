#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "sciu/dataset.hpp"
#include "sciu/nn_core.hpp"

namespace sciu {

struct ModelDims {
    std::size_t input = 16;   // d
    std::size_t embed = 32;   // e
    std::size_t hidden = 4;   // h, weight-branch width
    std::size_t classes = 7;  // K

    void validate() const;
    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Encoder (Linear+ReLU) feeding two heads: a linear classifier and a
// two-layer sigmoid weight branch w = σ(W2·ReLU(W1·x + b1) + b2).
struct SciuModel {
    LinearLayer encoder;        // d → e
    LinearLayer classifier;     // e → K
    LinearLayer weight_hidden;  // e → h
    LinearLayer weight_out;     // h → 1

    SciuModel() = default;
    explicit SciuModel(const ModelDims& dims);

    ModelDims dims() const;

    // Flat order: encoder, classifier, weight_hidden, weight_out; each layer
    // as row-major weight followed by bias.
    std::size_t parameter_count() const;
    Vector flatten() const;
    void assign(std::span<const double> flat);

    friend bool operator==(const SciuModel&, const SciuModel&) = default;
};

struct ForwardOutput {
    Vector embedding;
    Vector logits;
    Vector probs;           // softmax(logits)
    double weight = 0.5;    // w ∈ (0, 1)
    Vector weighted_probs;  // softmax(w · logits)
};

// weighted: cross-entropy on softmax(w·logits), every branch trained.
// plain:    cross-entropy on softmax(logits), weight branch untouched.
enum class LossKind { weighted, plain };

ForwardOutput forward(const SciuModel& model, std::span<const double> features);
inline ForwardOutput forward(const SciuModel& model, const Sample& sample) {
    return forward(model, sample.features);
}

/// Cross-entropy of the weight-scaled distribution against `label`.
double wce_loss(const ForwardOutput& output, ClassIndex label);

double loss(const ForwardOutput& output, ClassIndex label, LossKind kind);

/// Adds scale·∂loss/∂θ into `grad` (flat layout) and returns the loss.
double backward_accumulate(const SciuModel& model, std::span<const double> features,
                           ClassIndex label, LossKind kind, std::span<double> grad,
                           double scale = 1.0);

/// Flat gradient of the loss for one sample.
Vector backward(const SciuModel& model, const Sample& sample, ClassIndex label,
                LossKind kind = LossKind::weighted);

/// Uniform(±1/√fan_in) weights and biases; the weight-branch output bias is
/// zero so w starts near 0.5.
SciuModel init_model(const ModelDims& dims, std::uint64_t seed);

// Text checkpoint: "sciu-checkpoint 1" then, per tensor, a line
// "<name> <rows> <cols>" followed by one line of space-separated values (%.17g).
std::string serialize_checkpoint(const SciuModel& model);
SciuModel parse_checkpoint(std::string_view text);
void save_checkpoint(const SciuModel& model, const std::filesystem::path& path);
SciuModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sciu
