#pragma once

// Fine-grained correction. Each sample keeps a window of (predicted label,
// predicted-label probability, annotated-label probability). A label is
// replaced by the prediction when the predicted label has not changed over
// the whole window and the mean probability gap exceeds τ.

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sciu/dataset.hpp"
#include "sciu/ring_window.hpp"

namespace sciu {

struct PredictionEntry {
    ClassIndex predicted_label = 0;
    double predicted_prob = 0.0;
    double gt_prob = 0.0;  // probability of the current annotated label

    friend bool operator==(const PredictionEntry&, const PredictionEntry&) = default;
};

struct PredictionHistory {
    explicit PredictionHistory(std::size_t window = 1) : entries(window) {}

    RingWindow<PredictionEntry> entries;
    std::size_t epochs_recorded() const { return entries.recorded(); }
};

/// Full window and every buffered predicted label identical.
bool label_stable(const PredictionHistory& history);

/// mean(p′) − mean(p_gt) over the window. Throws std::logic_error on a short window.
double score_gap(const PredictionHistory& history);

enum class CorrectionDecision { accept, reject };

/// accept iff label_stable and score_gap > tau.
CorrectionDecision correction_decision(const PredictionHistory& history, double tau);

/// {argmax, probs[argmax], probs[gt_label]}, ties to the lowest index.
PredictionEntry make_prediction_entry(std::span<const double> probs, ClassIndex gt_label);

class CorrectionState {
public:
    CorrectionState(double tau, std::size_t window);

    double tau() const { return tau_; }
    std::size_t window() const { return window_; }

    void record_prediction(SampleId id, std::span<const double> probs, ClassIndex gt_label,
                           std::size_t epoch);

    /// Relabels every accepted sample with its stable prediction and clears its
    /// history. The returned dataset has the same members as the input.
    std::pair<Dataset, std::vector<CorrectionEvent>> apply_corrections(const Dataset& dataset,
                                                                       std::size_t epoch);

    const std::vector<CorrectionEvent>& corrections() const { return corrections_; }
    const PredictionHistory* history(SampleId id) const;

private:
    double tau_;
    std::size_t window_;
    std::map<SampleId, PredictionHistory> histories_;
    std::vector<CorrectionEvent> corrections_;
};

}  // namespace sciu
