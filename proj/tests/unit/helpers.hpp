#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sciu/dataset.hpp"
#include "sciu/synth.hpp"

namespace testing {

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("sciu_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

// Small default-shaped dataset for fast end-to-end tests.
inline sciu::SynthConfig small_synth(std::uint64_t seed = 3) {
    sciu::SynthConfig c;
    c.per_class = 300;
    c.seed = seed;
    return c;
}

}  // namespace testing
