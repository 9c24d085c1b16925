#include "sciu/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "sciu/errors.hpp"

namespace sciu {

void SynthConfig::validate() const {
    auto fail = [](const char* field, const char* why) {
        throw ConfigError(std::string(field) + ": " + why);
    };
    if (n_classes < 2) fail("n_classes", "need at least 2 classes");
    if (dim < 1) fail("dim", "must be positive");
    if (per_class < 2) fail("per_class", "need at least 2 samples per class");
    if (!(low_quality_rate >= 0.0 && low_quality_rate < 1.0)) fail("low_quality_rate", "must be in [0, 1)");
    if (!(mislabel_rate >= 0.0 && mislabel_rate < 1.0)) fail("mislabel_rate", "must be in [0, 1)");
    if (!(low_quality_rate + mislabel_rate < 1.0)) {
        fail("low_quality_rate", "low_quality_rate + mislabel_rate must be < 1");
    }
    if (!(neutral_bias_fraction >= 0.0 && neutral_bias_fraction <= 1.0)) {
        fail("neutral_bias_fraction", "must be in [0, 1]");
    }
    if (!(intensity_low > 0.0)) fail("intensity_low", "must be positive");
    if (!(intensity_high >= intensity_low)) fail("intensity_high", "must be >= intensity_low");
    if (!(cluster_spread > 0.0)) fail("cluster_spread", "must be positive");
}

Dataset generate(const SynthConfig& config) {
    config.validate();
    const std::size_t K = config.n_classes;
    const std::size_t d = config.dim;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit_uniform(0.0, 1.0);
    std::uniform_real_distribution<double> intensity_dist(config.intensity_low, config.intensity_high);
    std::uniform_int_distribution<std::size_t> other_class(0, K - 2);

    std::vector<Vector> directions(K, Vector(d));
    for (auto& dir : directions) {
        double norm = 0.0;
        for (auto& v : dir) {
            v = unit_normal(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : dir) v /= norm;
    }

    // Per-coordinate variance of a clean sample, averaged over dimensions.
    const double lo = config.intensity_low;
    const double hi = config.intensity_high;
    const double mean_sq_intensity = (lo * lo + lo * hi + hi * hi) / 3.0;
    const double global_sd =
        std::sqrt(mean_sq_intensity / static_cast<double>(d) + config.cluster_spread * config.cluster_spread);

    const auto n_low = static_cast<std::size_t>(std::llround(config.low_quality_rate * config.per_class));
    const auto n_mis = static_cast<std::size_t>(std::llround(config.mislabel_rate * config.per_class));

    std::vector<Sample> samples;
    samples.reserve(K * config.per_class);
    std::vector<std::size_t> order(config.per_class);

    for (std::size_t c = 0; c < K; ++c) {
        // order[k] < n_low → low quality; < n_low + n_mis → mislabeled.
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);

        for (std::size_t k = 0; k < config.per_class; ++k) {
            const bool low_quality = order[k] < n_low;
            const bool mislabeled = !low_quality && order[k] < n_low + n_mis;

            double intensity = intensity_dist(rng);
            ClassIndex label = c;
            if (mislabeled) {
                const bool neutral = unit_uniform(rng) < config.neutral_bias_fraction;
                if (neutral && c != 0) {
                    intensity = config.intensity_low;
                    label = 0;
                } else {
                    const std::size_t r = other_class(rng);
                    label = r >= c ? r + 1 : r;
                }
            }

            Vector features(d);
            if (low_quality) {
                for (auto& v : features) v = global_sd * unit_normal(rng);
            } else {
                for (std::size_t i = 0; i < d; ++i) {
                    features[i] = directions[c][i] * intensity + config.cluster_spread * unit_normal(rng);
                }
            }

            OracleInfo oracle{c, low_quality ? QualityFlag::low_quality : QualityFlag::clean};
            const auto id = static_cast<SampleId>(c * config.per_class + k);
            samples.emplace_back(id, std::move(features), label, oracle);
        }
    }
    return Dataset(std::move(samples), K, d);
}

SynthSummary summarize(const Dataset& dataset) {
    SynthSummary s;
    s.total = dataset.size();
    for (const auto& sample : dataset.samples()) {
        const auto& oracle = sample.oracle_for_evaluation();
        if (oracle.quality_flag == QualityFlag::low_quality) {
            ++s.low_quality;
        } else if (oracle.true_label && *oracle.true_label != sample.label) {
            ++s.mislabeled;
            if (sample.label == 0) ++s.neutral_flips;
        } else {
            ++s.clean;
        }
    }
    return s;
}

}  // namespace sciu
