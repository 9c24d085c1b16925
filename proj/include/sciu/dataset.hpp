#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sciu/nn_core.hpp"

namespace sciu {

using SampleId = std::int64_t;
using ClassIndex = std::size_t;

enum class QualityFlag { clean, low_quality };

std::string_view to_string(QualityFlag flag);
std::optional<QualityFlag> parse_quality_flag(std::string_view text);

// Ground truth known only to the data generator. Training code never reads it;
// the only accessor is Sample::oracle_for_evaluation().
struct OracleInfo {
    std::optional<ClassIndex> true_label;
    std::optional<QualityFlag> quality_flag;

    friend bool operator==(const OracleInfo&, const OracleInfo&) = default;
};

class Sample {
public:
    Sample() = default;
    Sample(SampleId id, Vector features, ClassIndex label, OracleInfo oracle = {})
        : id(id), features(std::move(features)), label(label), oracle_(std::move(oracle)) {}

    SampleId id = 0;
    Vector features;
    ClassIndex label = 0;  // annotated label

    const OracleInfo& oracle_for_evaluation() const { return oracle_; }
    Sample without_oracle() const { return Sample(id, features, label); }

    friend bool operator==(const Sample&, const Sample&) = default;

private:
    OracleInfo oracle_;
};

struct CorrectionEvent {
    SampleId sample_id = 0;
    ClassIndex old_label = 0;
    ClassIndex new_label = 0;
    std::size_t epoch = 0;

    friend bool operator==(const CorrectionEvent&, const CorrectionEvent&) = default;
};

class Dataset {
public:
    Dataset() = default;
    /// Validates: unique ids, shared dimension, labels below n_classes, finite features.
    Dataset(std::vector<Sample> samples, std::size_t n_classes, std::size_t dim);

    const std::vector<Sample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t n_classes() const { return n_classes_; }
    std::size_t dim() const { return dim_; }

    const Sample& operator[](std::size_t i) const { return samples_[i]; }

    std::set<SampleId> ids() const;

    /// Same samples with oracle fields dropped.
    Dataset without_oracle() const;

    /// Subset of samples whose id is (not) in `ids`, preserving order.
    Dataset select(const std::set<SampleId>& ids) const;
    Dataset exclude(const std::set<SampleId>& ids) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<Sample> samples_;
    std::size_t n_classes_ = 0;
    std::size_t dim_ = 0;
};

// Line-delimited JSON. First line is a header
//   {"format":"sciu-dataset","version":1,"n_classes":K,"dim":d}
// followed by one record per line with fixed field order
//   {"id":..,"features":[..],"label":..,"true_label":..,"quality_flag":".."}
// where the last two are present only when known. Doubles use 17 significant digits.
// An empty dataset is an empty file (no header).
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(std::string_view text, const std::string& source_name = "<memory>");

/// Deterministic per-class split on the annotated label.
std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, double train_fraction,
                                             std::uint64_t seed);

/// "%.17g": 17 significant digits, round-trips every finite double.
std::string format_real(double value);
/// Shortest text that still round-trips; for CSV and console output.
std::string format_short(double value);

}  // namespace sciu
