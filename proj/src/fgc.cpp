#include "sciu/fgc.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sciu/errors.hpp"
#include "sciu/nn_core.hpp"

namespace sciu {

bool label_stable(const PredictionHistory& history) {
    const auto& w = history.entries;
    if (w.recorded() < w.capacity()) return false;
    const ClassIndex first = w.at(0).predicted_label;
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (w.at(i).predicted_label != first) return false;
    }
    return true;
}

double score_gap(const PredictionHistory& history) {
    const auto& w = history.entries;
    if (w.recorded() < w.capacity()) {
        throw std::logic_error("score_gap needs a full window (" + std::to_string(w.recorded()) +
                               " of " + std::to_string(w.capacity()) + " recorded)");
    }
    double predicted = 0.0;
    double gt = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        predicted += w.at(i).predicted_prob;
        gt += w.at(i).gt_prob;
    }
    const auto n = static_cast<double>(w.size());
    return predicted / n - gt / n;
}

CorrectionDecision correction_decision(const PredictionHistory& history, double tau) {
    if (!label_stable(history)) return CorrectionDecision::reject;
    return score_gap(history) > tau ? CorrectionDecision::accept : CorrectionDecision::reject;
}

PredictionEntry make_prediction_entry(std::span<const double> probs, ClassIndex gt_label) {
    if (gt_label >= probs.size()) throw ConfigError("gt_label out of range for probability vector");
    const ClassIndex y = argmax(probs);
    return {y, probs[y], probs[gt_label]};
}

CorrectionState::CorrectionState(double tau, std::size_t window) : tau_(tau), window_(window) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must be in (0, 1)");
    if (window == 0) throw ConfigError("window_t must be positive");
}

void CorrectionState::record_prediction(SampleId id, std::span<const double> probs,
                                        ClassIndex gt_label, std::size_t /*epoch*/) {
    auto [it, inserted] = histories_.try_emplace(id, window_);
    it->second.entries.push(make_prediction_entry(probs, gt_label));
}

std::pair<Dataset, std::vector<CorrectionEvent>> CorrectionState::apply_corrections(
    const Dataset& dataset, std::size_t epoch) {
    std::vector<Sample> out;
    out.reserve(dataset.size());
    std::vector<CorrectionEvent> events;
    for (const auto& sample : dataset.samples()) {
        out.push_back(sample);
        const auto it = histories_.find(sample.id);
        if (it == histories_.end()) continue;
        auto& history = it->second;
        if (correction_decision(history, tau_) == CorrectionDecision::reject) continue;
        const ClassIndex new_label = history.entries.newest().predicted_label;
        if (new_label == sample.label) continue;  // gap > τ > 0 rules this out
        events.push_back({sample.id, sample.label, new_label, epoch});
        out.back().label = new_label;
        history.entries.clear();
    }
    std::sort(events.begin(), events.end(),
              [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    corrections_.insert(corrections_.end(), events.begin(), events.end());
    return {Dataset(std::move(out), dataset.n_classes(), dataset.dim()), std::move(events)};
}

const PredictionHistory* CorrectionState::history(SampleId id) const {
    const auto it = histories_.find(id);
    return it == histories_.end() ? nullptr : &it->second;
}

}  // namespace sciu
