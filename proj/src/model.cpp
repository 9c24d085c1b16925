#include "sciu/model.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "sciu/errors.hpp"

namespace sciu {

void ModelDims::validate() const {
    if (input == 0 || embed == 0 || hidden == 0) throw ConfigError("model dimensions must be positive");
    if (classes < 2) throw ConfigError("model needs at least 2 classes");
}

SciuModel::SciuModel(const ModelDims& dims)
    : encoder(dims.input, dims.embed),
      classifier(dims.embed, dims.classes),
      weight_hidden(dims.embed, dims.hidden),
      weight_out(dims.hidden, 1) {
    dims.validate();
}

ModelDims SciuModel::dims() const {
    return {encoder.in_dim(), encoder.out_dim(), weight_hidden.out_dim(), classifier.out_dim()};
}

namespace {

template <typename Model>
auto layers_of(Model& m) {
    return std::array{&m.encoder, &m.classifier, &m.weight_hidden, &m.weight_out};
}

void check_dims(const SciuModel& m) {
    const auto d = m.dims();
    d.validate();
    if (m.classifier.in_dim() != d.embed || m.weight_hidden.in_dim() != d.embed ||
        m.weight_out.in_dim() != d.hidden || m.weight_out.out_dim() != 1) {
        throw ConfigError("inconsistent SCIU model layer dimensions");
    }
    for (const auto* layer : layers_of(m)) {
        if (layer->bias.size() != layer->out_dim()) throw ConfigError("layer bias length mismatch");
    }
}

}  // namespace

std::size_t SciuModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto* layer : layers_of(*this)) n += layer->param_count();
    return n;
}

Vector SciuModel::flatten() const {
    Vector flat;
    flat.reserve(parameter_count());
    for (const auto* layer : layers_of(*this)) {
        const auto w = layer->weight.data();
        flat.insert(flat.end(), w.begin(), w.end());
        flat.insert(flat.end(), layer->bias.begin(), layer->bias.end());
    }
    return flat;
}

void SciuModel::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ConfigError("assign: expected " + std::to_string(parameter_count()) +
                          " parameters, got " + std::to_string(flat.size()));
    }
    std::size_t pos = 0;
    for (auto* layer : layers_of(*this)) {
        auto w = layer->weight.data();
        std::copy_n(flat.begin() + pos, w.size(), w.begin());
        pos += w.size();
        std::copy_n(flat.begin() + pos, layer->bias.size(), layer->bias.begin());
        pos += layer->bias.size();
    }
}

ForwardOutput forward(const SciuModel& model, std::span<const double> features) {
    ForwardOutput out;
    out.embedding = relu(linear_forward(model.encoder, features));
    out.logits = linear_forward(model.classifier, out.embedding);
    const Vector hidden = relu(linear_forward(model.weight_hidden, out.embedding));
    out.weight = sigmoid(linear_forward(model.weight_out, hidden)[0]);
    out.probs = softmax(out.logits);
    Vector scaled(out.logits);
    for (auto& v : scaled) v *= out.weight;
    out.weighted_probs = softmax(scaled);
    return out;
}

double wce_loss(const ForwardOutput& output, ClassIndex label) {
    return cross_entropy(output.weighted_probs, label);
}

double loss(const ForwardOutput& output, ClassIndex label, LossKind kind) {
    return kind == LossKind::weighted ? wce_loss(output, label) : cross_entropy(output.probs, label);
}

namespace {

// Adds scale · g ⊗ x into the weight block and scale · g into the bias block
// of a layer whose flat slice starts at `offset`. Returns the next offset.
std::size_t accumulate_linear(const LinearLayer& layer, std::span<const double> g,
                              std::span<const double> x, std::span<double> grad,
                              std::size_t offset, double scale) {
    const std::size_t rows = layer.out_dim();
    const std::size_t cols = layer.in_dim();
    for (std::size_t r = 0; r < rows; ++r) {
        const double gr = scale * g[r];
        if (gr == 0.0) continue;
        double* dst = grad.data() + offset + r * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += gr * x[c];
    }
    offset += rows * cols;
    for (std::size_t r = 0; r < rows; ++r) grad[offset + r] += scale * g[r];
    return offset + rows;
}

}  // namespace

double backward_accumulate(const SciuModel& model, std::span<const double> features,
                           ClassIndex label, LossKind kind, std::span<double> grad, double scale) {
    const std::size_t n_params = model.parameter_count();
    if (grad.size() != n_params) throw ConfigError("gradient buffer has wrong size");
    const std::size_t K = model.classifier.out_dim();
    if (label >= K) throw ConfigError("label " + std::to_string(label) + " out of range");

    // Forward with cached pre-activations.
    const Vector pre_embed = linear_forward(model.encoder, features);
    const Vector embed = relu(pre_embed);
    const Vector logits = linear_forward(model.classifier, embed);
    const Vector pre_hidden = linear_forward(model.weight_hidden, embed);
    const Vector hidden = relu(pre_hidden);
    const double w = sigmoid(linear_forward(model.weight_out, hidden)[0]);

    const bool weighted = kind == LossKind::weighted;
    const double s = weighted ? w : 1.0;
    Vector scaled(logits);
    for (auto& v : scaled) v *= s;
    const Vector p = softmax(scaled);
    const double value = cross_entropy(p, label);

    // ∂L/∂(s·logits) = p − onehot(label)
    Vector g_scaled(p);
    g_scaled[label] -= 1.0;

    // Classifier receives s·g; the weight receives g·logits.
    Vector g_logits(K);
    double g_w = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        g_logits[k] = s * g_scaled[k];
        g_w += g_scaled[k] * logits[k];
    }

    const std::size_t off_classifier = model.encoder.param_count();
    const std::size_t off_hidden = off_classifier + model.classifier.param_count();
    const std::size_t off_out = off_hidden + model.weight_hidden.param_count();

    Vector g_embed = linear_backward_input(model.classifier, g_logits);
    accumulate_linear(model.classifier, g_logits, embed, grad, off_classifier, scale);

    if (weighted) {
        const std::array<double, 1> g_u{g_w * w * (1.0 - w)};
        accumulate_linear(model.weight_out, g_u, hidden, grad, off_out, scale);
        Vector g_hidden = linear_backward_input(model.weight_out, g_u);
        for (std::size_t j = 0; j < g_hidden.size(); ++j) {
            if (pre_hidden[j] <= 0.0) g_hidden[j] = 0.0;
        }
        accumulate_linear(model.weight_hidden, g_hidden, embed, grad, off_hidden, scale);
        const Vector g_embed_w = linear_backward_input(model.weight_hidden, g_hidden);
        for (std::size_t j = 0; j < g_embed.size(); ++j) g_embed[j] += g_embed_w[j];
    }

    for (std::size_t j = 0; j < g_embed.size(); ++j) {
        if (pre_embed[j] <= 0.0) g_embed[j] = 0.0;
    }
    accumulate_linear(model.encoder, g_embed, features, grad, 0, scale);
    return value;
}

Vector backward(const SciuModel& model, const Sample& sample, ClassIndex label, LossKind kind) {
    Vector grad(model.parameter_count(), 0.0);
    backward_accumulate(model, sample.features, label, kind, grad);
    return grad;
}

SciuModel init_model(const ModelDims& dims, std::uint64_t seed) {
    SciuModel model(dims);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](LinearLayer& layer) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_dim()));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : layer.weight.data()) v = dist(rng);
        for (auto& v : layer.bias) v = dist(rng);
    };
    fill(model.encoder);
    fill(model.classifier);
    fill(model.weight_hidden);
    fill(model.weight_out);
    // zero bias centres w around 0.5
    std::fill(model.weight_out.bias.begin(), model.weight_out.bias.end(), 0.0);
    return model;
}

namespace {

constexpr std::array<const char*, 4> kTensorNames{"encoder", "classifier", "weight_hidden", "weight_out"};

}  // namespace

std::string serialize_checkpoint(const SciuModel& model) {
    std::string out = "sciu-checkpoint 1\n";
    const auto layers = layers_of(model);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& layer = *layers[i];
        auto emit = [&out](const std::string& header, std::span<const double> values) {
            out += header + '\n';
            for (std::size_t k = 0; k < values.size(); ++k) {
                if (k) out += ' ';
                out += format_real(values[k]);
            }
            out += '\n';
        };
        const std::string name = kTensorNames[i];
        emit(name + ".weight " + std::to_string(layer.out_dim()) + ' ' + std::to_string(layer.in_dim()),
             layer.weight.data());
        emit(name + ".bias " + std::to_string(layer.out_dim()) + " 1", layer.bias);
    }
    return out;
}

SciuModel parse_checkpoint(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "sciu-checkpoint" || version != 1) {
        throw ParseError("not a sciu checkpoint");
    }
    SciuModel model;
    auto layers = layers_of(model);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto read_tensor = [&](const std::string& expected) {
            std::string name;
            std::size_t rows = 0, cols = 0;
            if (!(in >> name >> rows >> cols) || name != expected) {
                throw ParseError("checkpoint: expected tensor " + expected);
            }
            std::vector<double> values(rows * cols);
            for (auto& v : values) {
                if (!(in >> v)) throw ParseError("checkpoint: truncated tensor " + expected);
            }
            return std::make_pair(rows, std::move(values));
        };
        const std::string name = kTensorNames[i];
        auto [rows, wdata] = read_tensor(name + ".weight");
        const std::size_t cols = rows ? wdata.size() / rows : 0;
        layers[i]->weight = Matrix(rows, cols, std::move(wdata));
        layers[i]->bias = read_tensor(name + ".bias").second;
    }
    check_dims(model);
    if (!all_finite(model.flatten())) throw ParseError("checkpoint: non-finite parameter");
    return model;
}

void save_checkpoint(const SciuModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << serialize_checkpoint(model);
    if (!out) throw IoError("write failed for " + path.string());
}

SciuModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_checkpoint(buf.str());
}

}  // namespace sciu
