#include "sciu/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sciu/errors.hpp"
#include "sciu/fgc.hpp"

namespace sciu {

std::string_view to_string(ScoreSource v) {
    return v == ScoreSource::annotated_class ? "annotated_class" : "max_class";
}

std::string_view to_string(ProbSource v) { return v == ProbSource::weighted ? "weighted" : "unweighted"; }

std::string_view to_string(Stage v) {
    switch (v) {
        case Stage::plain: return "plain";
        case Stage::cgp: return "cgp";
        case Stage::fgc: return "fgc";
    }
    return "?";
}

std::optional<ScoreSource> parse_score_source(std::string_view text) {
    if (text == "annotated_class") return ScoreSource::annotated_class;
    if (text == "max_class") return ScoreSource::max_class;
    return std::nullopt;
}

std::optional<ProbSource> parse_prob_source(std::string_view text) {
    if (text == "weighted") return ProbSource::weighted;
    if (text == "unweighted") return ProbSource::unweighted;
    return std::nullopt;
}

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (window_t < 1) fail("window_t must be >= 1");
    if (epochs <= warmup_epochs + window_t) {
        fail("epochs (" + std::to_string(epochs) + ") must exceed warmup_epochs + window_t (" +
             std::to_string(warmup_epochs + window_t) + ")");
    }
    if (!(lambda > 0.0 && lambda < 1.0)) fail("lambda must be in (0, 1)");
    if (!(tau > 0.0 && tau < 1.0)) fail("tau must be in (0, 1)");
    if (embed_dim < 1 || hidden_dim < 1) fail("embed_dim and hidden_dim must be positive");
}

ModelDims TrainConfig::model_dims(const Dataset& data) const {
    return {data.dim(), embed_dim, hidden_dim, data.n_classes()};
}

namespace {

std::mt19937_64 epoch_rng(std::uint64_t seed, std::uint64_t stream, std::size_t epoch) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(epoch)};
    return std::mt19937_64(seq);
}

std::string join_ids(const Dataset& data, std::span<const std::size_t> idx) {
    std::string out;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(data[idx[k]].id);
    }
    return out;
}

}  // namespace

EpochResult run_epoch(SciuModel& model, const Dataset& dataset, const TrainConfig& config,
                      OptimizerState& optimizer, std::size_t epoch, LossKind loss_kind,
                      std::uint64_t stream) {
    if (dataset.empty()) throw DegenerateRunError("run_epoch on an empty dataset");
    const std::size_t n_params = model.parameter_count();
    if (optimizer.velocity.size() != n_params) optimizer.velocity.assign(n_params, 0.0);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = epoch_rng(config.seed, stream, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    Vector params = model.flatten();
    Vector grad(n_params);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        const std::span<const std::size_t> batch(order.data() + start, end - start);
        const double scale = 1.0 / static_cast<double>(batch.size());
        std::fill(grad.begin(), grad.end(), 0.0);
        double batch_loss = 0.0;
        for (const std::size_t i : batch) {
            const auto& s = dataset[i];
            batch_loss += backward_accumulate(model, s.features, s.label, loss_kind, grad, scale);
        }
        if (!std::isfinite(batch_loss) || !all_finite(grad)) {
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index) + " (samples " + join_ids(dataset, batch) + ")");
        }
        loss_sum += batch_loss;
        sgd_momentum_step(params, grad, optimizer.velocity, config.learning_rate, config.momentum);
        model.assign(params);
    }
    if (!all_finite(params)) {
        throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    }

    EpochResult result;
    result.record.epoch = epoch;
    result.record.mean_loss = loss_sum / static_cast<double>(dataset.size());
    result.record.active_sample_count = dataset.size();
    result.outputs.reserve(dataset.size());
    ConfusionMatrix cm(dataset.n_classes());
    for (const auto& s : dataset.samples()) {
        result.outputs.push_back(forward(model, s));
        cm.add(s.label, argmax(result.outputs.back().probs));
    }
    result.record.train_war = war(cm);
    result.record.train_uar = uar(cm).value;
    return result;
}

Evaluation evaluate(const SciuModel& model, const Dataset& test) {
    Evaluation ev{ConfusionMatrix(test.n_classes()), 0.0, {}};
    for (const auto& s : test.samples()) {
        const auto& oracle = s.oracle_for_evaluation();
        if (oracle.quality_flag == QualityFlag::low_quality) continue;
        const ClassIndex truth = oracle.true_label.value_or(s.label);
        ev.confusion.add(truth, argmax(forward(model, s).probs));
    }
    ev.war = war(ev.confusion);
    ev.uar = uar(ev.confusion);
    return ev;
}

StageResult train_stage(const Dataset& dataset, const TrainConfig& config, Stage stage,
                        const Dataset* test, std::uint64_t stream, const StageObserver& observer,
                        const SciuModel* initial_model) {
    config.validate();
    if (dataset.empty()) throw DegenerateRunError("cannot train on an empty dataset");
    const ModelDims dims = config.model_dims(dataset);
    if (test && (test->dim() != dataset.dim() || test->n_classes() != dataset.n_classes())) {
        throw ConfigError("test set dimensions do not match the training set");
    }

    StageResult result;
    if (initial_model) {
        if (initial_model->dims() != dims) throw ConfigError("initial model does not match dataset dimensions");
        result.model = *initial_model;
    } else {
        result.model = init_model(dims, config.seed * 1000003ULL + stream);
    }

    const LossKind loss_kind = stage == Stage::plain ? LossKind::plain : LossKind::weighted;
    PruneState prune(config.lambda, config.window_t, config.warmup_epochs);
    CorrectionState correct(config.tau, config.window_t);
    OptimizerState optimizer;
    Dataset working = dataset;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        auto [record, outputs] = run_epoch(result.model, working, config, optimizer, epoch, loss_kind, stream);

        if (stage == Stage::cgp) {
            for (std::size_t i = 0; i < working.size(); ++i) {
                result.last_weight[working[i].id] = outputs[i].weight;
            }
        }

        if (epoch > config.warmup_epochs) {
            if (stage == Stage::cgp) {
                for (std::size_t i = 0; i < working.size(); ++i) {
                    const auto& out = outputs[i];
                    const double p = config.score_source == ScoreSource::annotated_class
                                         ? out.probs[working[i].label]
                                         : out.probs[argmax(out.probs)];
                    prune.record_score(working[i].id, out.weight, p, epoch);
                }
                auto [d3, newly] = prune.apply_pruning(working, epoch);
                if (d3.empty()) {
                    throw DegenerateRunError("all samples pruned at epoch " + std::to_string(epoch) +
                                             ": lower lambda");
                }
                working = std::move(d3);
            } else if (stage == Stage::fgc) {
                for (std::size_t i = 0; i < working.size(); ++i) {
                    const auto& out = outputs[i];
                    const Vector& probs =
                        config.prob_source == ProbSource::weighted ? out.weighted_probs : out.probs;
                    correct.record_prediction(working[i].id, probs, working[i].label, epoch);
                }
                working = correct.apply_corrections(working, epoch).first;
            }
        }

        record.cumulative_pruned = prune.pruned_ids().size();
        record.cumulative_corrected = correct.corrections().size();
        record.active_sample_count = working.size();
        if (test && !test->empty()) {
            const auto ev = evaluate(result.model, *test);
            record.test_war = ev.war;
            record.test_uar = ev.uar.value;
        }
        result.epochs.push_back(record);

        if (observer) observer(epoch, working, prune.pruned_ids());
        if (config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 &&
            !config.checkpoint_dir.empty()) {
            std::filesystem::create_directories(config.checkpoint_dir);
            save_checkpoint(result.model, config.checkpoint_dir / (std::string(to_string(stage)) + "_epoch" +
                                                                   std::to_string(epoch) + ".ckpt"));
        }
    }

    result.output = std::move(working);
    result.pruning_log = prune.log();
    result.correction_log = correct.corrections();
    result.pruned_ids = prune.pruned_ids();
    return result;
}

}  // namespace sciu
