#include "sciu/metrics.hpp"

#include <map>
#include <numeric>

#include "sciu/errors.hpp"

namespace sciu {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes)
    : counts_(n_classes, std::vector<std::size_t>(n_classes, 0)) {}

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes, std::vector<std::vector<std::size_t>> counts)
    : counts_(std::move(counts)) {
    if (counts_.size() != n_classes) throw ConfigError("confusion matrix row count mismatch");
    for (const auto& row : counts_) {
        if (row.size() != n_classes) throw ConfigError("confusion matrix must be square");
    }
}

void ConfusionMatrix::add(ClassIndex truth, ClassIndex predicted, std::size_t n) {
    if (truth >= n_classes() || predicted >= n_classes()) {
        throw ConfigError("confusion matrix index out of range");
    }
    counts_[truth][predicted] += n;
}

std::size_t ConfusionMatrix::row_total(ClassIndex truth) const {
    return std::accumulate(counts_[truth].begin(), counts_[truth].end(), std::size_t{0});
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (std::size_t c = 0; c < n_classes(); ++c) t += row_total(c);
    return t;
}

std::string ConfusionMatrix::to_csv() const {
    std::string out = "true\\pred";
    for (std::size_t c = 0; c < n_classes(); ++c) out += ',' + std::to_string(c);
    out += '\n';
    for (std::size_t r = 0; r < n_classes(); ++r) {
        out += std::to_string(r);
        for (std::size_t c = 0; c < n_classes(); ++c) out += ',' + std::to_string(counts_[r][c]);
        out += '\n';
    }
    return out;
}

double war(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw EvaluationError("WAR undefined for an empty confusion matrix");
    std::size_t diag = 0;
    for (std::size_t c = 0; c < cm.n_classes(); ++c) diag += cm.count(c, c);
    return static_cast<double>(diag) / static_cast<double>(total);
}

UarResult uar(const ConfusionMatrix& cm) {
    UarResult result;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < cm.n_classes(); ++c) {
        const std::size_t support = cm.row_total(c);
        if (support == 0) {
            result.excluded_classes.push_back(c);
            continue;
        }
        sum += static_cast<double>(cm.count(c, c)) / static_cast<double>(support);
        ++used;
    }
    if (used == 0) throw EvaluationError("UAR undefined: every class has zero support");
    result.value = sum / static_cast<double>(used);
    return result;
}

PruningQuality pruning_quality(const std::set<SampleId>& pruned_ids, const Dataset& dataset) {
    std::size_t low = 0;
    std::size_t hit = 0;
    std::size_t pruned_present = 0;
    for (const auto& s : dataset.samples()) {
        const auto& flag = s.oracle_for_evaluation().quality_flag;
        if (!flag) {
            throw EvaluationError("sample " + std::to_string(s.id) + " has no quality_flag");
        }
        const bool is_low = *flag == QualityFlag::low_quality;
        const bool pruned = pruned_ids.contains(s.id);
        low += is_low;
        pruned_present += pruned;
        hit += is_low && pruned;
    }
    PruningQuality q;
    if (pruned_present > 0) q.precision = static_cast<double>(hit) / static_cast<double>(pruned_present);
    if (low > 0) q.recall = static_cast<double>(hit) / static_cast<double>(low);
    return q;
}

CorrectionQuality correction_quality(std::span<const CorrectionEvent> events, const Dataset& dataset) {
    std::map<SampleId, ClassIndex> truth;
    for (const auto& s : dataset.samples()) {
        if (const auto& tl = s.oracle_for_evaluation().true_label) truth.emplace(s.id, *tl);
    }
    CorrectionQuality q;
    if (events.empty()) return q;
    std::size_t correct = 0;
    std::size_t harmful = 0;
    for (const auto& e : events) {
        const auto it = truth.find(e.sample_id);
        if (it == truth.end()) {
            throw EvaluationError("sample " + std::to_string(e.sample_id) + " has no true_label");
        }
        correct += e.new_label == it->second;
        harmful += e.old_label == it->second && e.new_label != it->second;
    }
    const auto n = static_cast<double>(events.size());
    q.correction_accuracy = static_cast<double>(correct) / n;
    q.harmful_rate = static_cast<double>(harmful) / n;
    return q;
}

}  // namespace sciu
