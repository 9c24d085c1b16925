#pragma once

#include <cstddef>
#include <cstdint>

#include "sciu/dataset.hpp"

namespace sciu {

// Gaussian-blob classification data with two injected noise types:
// low-quality samples (features carry no class signal, label kept) and
// mislabeled samples (clean features, flipped label). Class 0 plays the
// "Neutral" role that low-intensity samples get mislabeled as.
struct SynthConfig {
    std::size_t n_classes = 7;
    std::size_t dim = 16;
    std::size_t per_class = 700;
    double low_quality_rate = 0.15;
    double mislabel_rate = 0.15;
    double neutral_bias_fraction = 0.5;
    double intensity_low = 1.8;
    double intensity_high = 3.0;
    double cluster_spread = 0.35;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct SynthSummary {
    std::size_t total = 0;
    std::size_t clean = 0;
    std::size_t low_quality = 0;
    std::size_t mislabeled = 0;
    std::size_t neutral_flips = 0;  // mislabels that went to class 0
};

Dataset generate(const SynthConfig& config);

/// Counts read from oracle fields; samples lacking them are counted as clean.
SynthSummary summarize(const Dataset& dataset);

}  // namespace sciu
