#include "sciu/cgp.hpp"

#include <stdexcept>
#include <string>

#include "sciu/errors.hpp"

namespace sciu {

std::optional<double> trailing_mean(const ScoreHistory& history) {
    const auto& w = history.scores;
    if (w.recorded() < w.capacity()) return std::nullopt;
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w.at(i);
    return sum / static_cast<double>(w.size());
}

PruneDecision prune_decision(double score_mean, double lambda) {
    return score_mean > lambda ? PruneDecision::keep : PruneDecision::prune;
}

PruneState::PruneState(double lambda, std::size_t window, std::size_t warmup_epochs)
    : lambda_(lambda), window_(window), warmup_(warmup_epochs) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must be in (0, 1)");
    if (window == 0) throw ConfigError("window_t must be positive");
}

void PruneState::record_score(SampleId id, double weight, double prob_of_label, std::size_t epoch) {
    if (pruned_.contains(id)) {
        throw std::logic_error("record_score for pruned sample " + std::to_string(id));
    }
    if (epoch <= warmup_) {
        throw std::logic_error("record_score during warm-up epoch " + std::to_string(epoch));
    }
    if (!(weight >= 0.0 && weight <= 1.0) || !(prob_of_label >= 0.0 && prob_of_label <= 1.0)) {
        throw ConfigError("record_score: weight and probability must lie in [0, 1]");
    }
    auto [it, inserted] = histories_.try_emplace(id, window_);
    it->second.scores.push(weight * prob_of_label);
}

std::pair<Dataset, std::set<SampleId>> PruneState::apply_pruning(const Dataset& dataset,
                                                                 std::size_t epoch) {
    if (epoch <= warmup_) {
        throw std::logic_error("apply_pruning during warm-up epoch " + std::to_string(epoch));
    }
    // Keyed by id so the log is in sample-id order regardless of dataset order.
    std::map<SampleId, double> decided;
    for (const auto& sample : dataset.samples()) {
        if (pruned_.contains(sample.id)) continue;
        const auto it = histories_.find(sample.id);
        if (it == histories_.end()) continue;
        const auto mean = trailing_mean(it->second);
        if (!mean || prune_decision(*mean, lambda_) == PruneDecision::keep) continue;
        decided.emplace(sample.id, *mean);
    }
    std::set<SampleId> newly;
    for (const auto& [id, mean] : decided) {
        newly.insert(id);
        log_.push_back({epoch, id, mean, lambda_});
    }
    pruned_.insert(newly.begin(), newly.end());
    return {dataset.exclude(pruned_), std::move(newly)};
}

const ScoreHistory* PruneState::history(SampleId id) const {
    const auto it = histories_.find(id);
    return it == histories_.end() ? nullptr : &it->second;
}

}  // namespace sciu
