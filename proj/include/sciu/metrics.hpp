#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sciu/dataset.hpp"

namespace sciu {

class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t n_classes = 0);
    ConfusionMatrix(std::size_t n_classes, std::vector<std::vector<std::size_t>> counts);

    void add(ClassIndex truth, ClassIndex predicted, std::size_t n = 1);

    std::size_t n_classes() const { return counts_.size(); }
    std::size_t count(ClassIndex truth, ClassIndex predicted) const { return counts_[truth][predicted]; }
    std::size_t row_total(ClassIndex truth) const;
    std::size_t total() const;
    const std::vector<std::vector<std::size_t>>& counts() const { return counts_; }

    /// Rows as "true\pred,0,1,..." CSV.
    std::string to_csv() const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::vector<std::vector<std::size_t>> counts_;
};

/// trace / total. Throws EvaluationError when empty.
double war(const ConfusionMatrix& cm);

struct UarResult {
    double value = 0.0;
    std::vector<ClassIndex> excluded_classes;  // classes with no true samples
};

/// Mean per-class recall over classes that have true samples.
UarResult uar(const ConfusionMatrix& cm);

struct PruningQuality {
    std::optional<double> precision;  // nullopt when nothing was pruned
    std::optional<double> recall;     // nullopt when there are no low-quality samples
};

/// Against quality_flag. Throws EvaluationError if any sample lacks the flag.
PruningQuality pruning_quality(const std::set<SampleId>& pruned_ids, const Dataset& dataset);

struct CorrectionQuality {
    std::optional<double> correction_accuracy;  // nullopt when there are no events
    std::optional<double> harmful_rate;
};

/// Against true_label. Throws EvaluationError if an event's sample lacks it.
CorrectionQuality correction_quality(std::span<const CorrectionEvent> events, const Dataset& dataset);

}  // namespace sciu
