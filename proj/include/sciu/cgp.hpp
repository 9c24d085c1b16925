#pragma once

// Coarse-grained pruning: each active sample accumulates a window of
// weighted scores s = w · p; once the window is full, the trailing mean S_T
// is compared against λ and samples with S_T ≤ λ are pruned permanently.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "sciu/dataset.hpp"
#include "sciu/ring_window.hpp"

namespace sciu {

struct ScoreHistory {
    explicit ScoreHistory(std::size_t window = 1) : scores(window) {}

    RingWindow<double> scores;
    std::size_t epochs_recorded() const { return scores.recorded(); }
};

/// Mean of the buffered scores, or nullopt until a full window has been recorded.
std::optional<double> trailing_mean(const ScoreHistory& history);

enum class PruneDecision { keep, prune };

/// keep iff score_mean > lambda.
PruneDecision prune_decision(double score_mean, double lambda);

struct PruneEvent {
    std::size_t epoch = 0;
    SampleId sample_id = 0;
    double score_mean = 0.0;
    double lambda = 0.0;

    friend bool operator==(const PruneEvent&, const PruneEvent&) = default;
};

class PruneState {
public:
    PruneState(double lambda, std::size_t window, std::size_t warmup_epochs);

    double lambda() const { return lambda_; }
    std::size_t window() const { return window_; }
    std::size_t warmup_epochs() const { return warmup_; }

    /// Appends s = weight · prob_of_label. Throws std::logic_error for a pruned id.
    void record_score(SampleId id, double weight, double prob_of_label, std::size_t epoch);

    /// Prunes every active sample of `dataset` whose full-window mean is ≤ λ.
    /// Returns D3 (the active remainder) and the ids pruned by this call.
    std::pair<Dataset, std::set<SampleId>> apply_pruning(const Dataset& dataset, std::size_t epoch);

    const std::set<SampleId>& pruned_ids() const { return pruned_; }
    bool is_pruned(SampleId id) const { return pruned_.contains(id); }
    const std::vector<PruneEvent>& log() const { return log_; }

    /// nullptr when the id has no recorded scores.
    const ScoreHistory* history(SampleId id) const;

private:
    double lambda_;
    std::size_t window_;
    std::size_t warmup_;
    std::map<SampleId, ScoreHistory> histories_;
    std::set<SampleId> pruned_;
    std::vector<PruneEvent> log_;
};

}  // namespace sciu
