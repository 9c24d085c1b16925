#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "sciu/cgp.hpp"
#include "sciu/dataset.hpp"
#include "sciu/metrics.hpp"
#include "sciu/model.hpp"

namespace sciu {

// Which probability feeds the pruning score s = w · p.
enum class ScoreSource { annotated_class, max_class };
// Which distribution feeds the correction histories.
enum class ProbSource { weighted, unweighted };
enum class Stage { plain, cgp, fgc };

std::string_view to_string(ScoreSource v);
std::string_view to_string(ProbSource v);
std::string_view to_string(Stage v);
std::optional<ScoreSource> parse_score_source(std::string_view text);
std::optional<ProbSource> parse_prob_source(std::string_view text);

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    std::size_t epochs = 60;
    std::size_t warmup_epochs = 5;
    std::size_t window_t = 3;
    double lambda = 0.7;
    double tau = 0.2;
    std::uint64_t seed = 1;
    ScoreSource score_source = ScoreSource::max_class;
    ProbSource prob_source = ProbSource::weighted;
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 4;
    std::size_t checkpoint_every = 0;  // 0 disables
    std::filesystem::path checkpoint_dir;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    ModelDims model_dims(const Dataset& data) const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct OptimizerState {
    Vector velocity;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double train_war = 0.0;
    double train_uar = 0.0;
    std::optional<double> test_war;
    std::optional<double> test_uar;
    std::size_t active_sample_count = 0;
    std::size_t cumulative_pruned = 0;
    std::size_t cumulative_corrected = 0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct EpochResult {
    EpochRecord record;
    std::vector<ForwardOutput> outputs;  // aligned with the dataset, post-update parameters
};

/// One pass of minibatch momentum SGD followed by an evaluation pass. Sample
/// order is shuffled from (config.seed, stream, epoch). Throws NumericError on
/// a non-finite batch loss.
EpochResult run_epoch(SciuModel& model, const Dataset& dataset, const TrainConfig& config,
                      OptimizerState& optimizer, std::size_t epoch, LossKind loss_kind,
                      std::uint64_t stream = 0);

struct Evaluation {
    ConfusionMatrix confusion;
    double war = 0.0;
    UarResult uar;
};

/// Predictions are argmax of the unweighted probabilities (w > 0 never changes
/// the argmax). Ground truth is the oracle true_label when present, else the
/// annotated label; samples flagged low_quality are skipped.
Evaluation evaluate(const SciuModel& model, const Dataset& test);

struct StageResult {
    SciuModel model;
    Dataset output;  // D3 for cgp, D4 for fgc, the input for plain
    std::vector<EpochRecord> epochs;
    std::vector<PruneEvent> pruning_log;
    std::vector<CorrectionEvent> correction_log;
    std::set<SampleId> pruned_ids;
    // Learned weight of each input sample from the last epoch it was active.
    std::map<SampleId, double> last_weight;
};

// Called at the end of every epoch with the working set after that epoch's
// pruning/correction has been applied.
using StageObserver = std::function<void(std::size_t epoch, const Dataset& working,
                                         const std::set<SampleId>& pruned)>;

/// Trains a freshly initialised model on `dataset` for config.epochs epochs.
/// cgp: weighted loss, score recording and pruning after warm-up. Throws
///      DegenerateRunError when every sample is pruned.
/// fgc: weighted loss, prediction recording and relabeling after warm-up.
/// plain: unweighted cross-entropy only.
StageResult train_stage(const Dataset& dataset, const TrainConfig& config, Stage stage,
                        const Dataset* test = nullptr, std::uint64_t stream = 0,
                        const StageObserver& observer = {},
                        const SciuModel* initial_model = nullptr);

}  // namespace sciu
