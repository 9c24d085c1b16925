#include "sciu/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sciu/errors.hpp"

namespace sciu {

using nlohmann::json;

std::string_view to_string(QualityFlag flag) {
    return flag == QualityFlag::clean ? "clean" : "low_quality";
}

std::optional<QualityFlag> parse_quality_flag(std::string_view text) {
    if (text == "clean") return QualityFlag::clean;
    if (text == "low_quality") return QualityFlag::low_quality;
    return std::nullopt;
}

Dataset::Dataset(std::vector<Sample> samples, std::size_t n_classes, std::size_t dim)
    : samples_(std::move(samples)), n_classes_(n_classes), dim_(dim) {
    std::set<SampleId> seen;
    for (const auto& s : samples_) {
        const auto id = std::to_string(s.id);
        if (!seen.insert(s.id).second) throw ValidationError("duplicate sample id " + id);
        if (s.features.size() != dim_) {
            throw ValidationError("sample " + id + " has " + std::to_string(s.features.size()) +
                                  " features, dataset dimension is " + std::to_string(dim_));
        }
        if (s.label >= n_classes_) {
            throw ValidationError("sample " + id + " label " + std::to_string(s.label) +
                                  " out of range for " + std::to_string(n_classes_) + " classes");
        }
        const auto& tl = s.oracle_for_evaluation().true_label;
        if (tl && *tl >= n_classes_) {
            throw ValidationError("sample " + id + " true_label " + std::to_string(*tl) +
                                  " out of range");
        }
        if (!all_finite(s.features)) throw ValidationError("sample " + id + " has non-finite features");
    }
}

std::set<SampleId> Dataset::ids() const {
    std::set<SampleId> out;
    for (const auto& s : samples_) out.insert(s.id);
    return out;
}

Dataset Dataset::without_oracle() const {
    std::vector<Sample> stripped;
    stripped.reserve(samples_.size());
    for (const auto& s : samples_) stripped.push_back(s.without_oracle());
    return Dataset(std::move(stripped), n_classes_, dim_);
}

Dataset Dataset::select(const std::set<SampleId>& ids) const {
    std::vector<Sample> kept;
    for (const auto& s : samples_) {
        if (ids.contains(s.id)) kept.push_back(s);
    }
    return Dataset(std::move(kept), n_classes_, dim_);
}

Dataset Dataset::exclude(const std::set<SampleId>& ids) const {
    std::vector<Sample> kept;
    for (const auto& s : samples_) {
        if (!ids.contains(s.id)) kept.push_back(s);
    }
    return Dataset(std::move(kept), n_classes_, dim_);
}

std::string format_real(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_short(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string serialize_dataset(const Dataset& dataset) {
    if (dataset.empty()) return {};
    std::string out;
    out += "{\"format\":\"sciu-dataset\",\"version\":1,\"n_classes\":" +
           std::to_string(dataset.n_classes()) + ",\"dim\":" + std::to_string(dataset.dim()) +
           "}\n";
    for (const auto& s : dataset.samples()) {
        out += "{\"id\":" + std::to_string(s.id) + ",\"features\":[";
        for (std::size_t i = 0; i < s.features.size(); ++i) {
            if (i) out += ',';
            out += format_real(s.features[i]);
        }
        out += "],\"label\":" + std::to_string(s.label);
        const auto& oracle = s.oracle_for_evaluation();
        if (oracle.true_label) out += ",\"true_label\":" + std::to_string(*oracle.true_label);
        if (oracle.quality_flag) {
            out += ",\"quality_flag\":\"";
            out += to_string(*oracle.quality_flag);
            out += '"';
        }
        out += "}\n";
    }
    return out;
}

namespace {

std::size_t read_count(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<std::int64_t>() < 0) {
        throw ParseError(where + ": missing or invalid \"" + key + "\"");
    }
    return j[key].get<std::size_t>();
}

}  // namespace

Dataset parse_dataset(std::string_view text, const std::string& source_name) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::size_t n_classes = 0;
    std::size_t dim = 0;
    bool have_header = false;
    std::vector<Sample> samples;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!j.is_object()) throw ParseError(where + ": expected an object");

        if (!have_header) {
            if (j.value("format", "") != "sciu-dataset") {
                throw ParseError(where + ": missing sciu-dataset header");
            }
            if (j.value("version", 0) != 1) throw ParseError(where + ": unsupported version");
            n_classes = read_count(j, "n_classes", where);
            dim = read_count(j, "dim", where);
            have_header = true;
            continue;
        }

        if (!j.contains("id") || !j["id"].is_number_integer()) {
            throw ParseError(where + ": missing integer \"id\"");
        }
        if (!j.contains("features") || !j["features"].is_array()) {
            throw ParseError(where + ": missing \"features\" array");
        }
        Vector features;
        features.reserve(j["features"].size());
        for (const auto& v : j["features"]) {
            if (!v.is_number()) throw ParseError(where + ": non-numeric feature");
            features.push_back(v.get<double>());
        }
        const std::size_t label = read_count(j, "label", where);

        OracleInfo oracle;
        if (j.contains("true_label")) oracle.true_label = read_count(j, "true_label", where);
        if (j.contains("quality_flag")) {
            if (!j["quality_flag"].is_string()) throw ParseError(where + ": bad \"quality_flag\"");
            oracle.quality_flag = parse_quality_flag(j["quality_flag"].get<std::string>());
            if (!oracle.quality_flag) throw ParseError(where + ": unknown quality_flag");
        }
        samples.emplace_back(j["id"].get<SampleId>(), std::move(features), label, oracle);
    }
    return Dataset(std::move(samples), n_classes, dim);
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), path.string());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << serialize_dataset(dataset);
    if (!out) throw IoError("write failed for " + path.string());
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, double train_fraction,
                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0, 1)");
    }
    std::map<ClassIndex, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].label].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<bool> in_train(dataset.size(), false);
    for (auto& [cls, idx] : by_class) {
        if (idx.size() < 2) {
            throw ValidationError("class " + std::to_string(cls) + " has fewer than 2 samples");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * idx.size()));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = true;
    }

    std::vector<Sample> train, test;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (in_train[i] ? train : test).push_back(dataset[i]);
    }
    return {Dataset(std::move(train), dataset.n_classes(), dataset.dim()),
            Dataset(std::move(test), dataset.n_classes(), dataset.dim())};
}

}  // namespace sciu
