#pragma once

// Run configuration: analysis knobs, preprocessing recipe parameters and
// synthetic-cohort parameters, loadable from a JSON file. Unknown keys are
// rejected so typos fail loudly. Defaults follow the reference workflow:
// threshold 0.5, 10 samples per case, liver window (-120, 240) at 256^3,
// tumor window (-30, 200) at (284, 256, 133) with -50 outside fill.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "mcseg/preprocess.hpp"
#include "mcseg/synth.hpp"
#include "mcseg/uncertainty.hpp"

namespace mcseg {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SynthConfig {
    std::size_t cases = 55;
    Dims3 dims{64, 64, 64};
    std::uint64_t seed = 42;
    std::size_t samples = 10;
    double noise_scale = 1.0;
};

struct RunConfig {
    double threshold = 0.5;
    EntropyVariant entropy = EntropyVariant::as_printed;
    CvVariant cv = CvVariant::as_printed;
    int expected_samples = 10;
    int jobs = 1;
    LiverRecipeConfig liver;
    TumorRecipeConfig tumor;
    SynthConfig synth;
};

inline void validate(const RunConfig& cfg) {
    if (!(cfg.threshold > 0.0) || !(cfg.threshold < 1.0))
        throw ConfigError("threshold must be in (0, 1)");
    if (cfg.expected_samples < 2) throw ConfigError("expected_samples must be >= 2");
    if (cfg.synth.cases < 3) throw ConfigError("synth.cases must be >= 3");
    if (cfg.synth.samples < 2) throw ConfigError("synth.samples must be >= 2");
    if (!(cfg.synth.noise_scale > 0.0)) throw ConfigError("synth.noise_scale must be > 0");
    try {
        detail::check_dims(cfg.synth.dims);
        detail::check_dims(cfg.liver.target_dims);
        detail::check_dims(cfg.tumor.target_dims);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

namespace detail {

inline Dims3 dims_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("'" + key + "' must be an array of 3 integers");
    for (const auto& v : j)
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            throw ConfigError("'" + key + "' entries must be positive integers");
    return Dims3{j[0].get<index_t>(), j[1].get<index_t>(), j[2].get<index_t>()};
}

inline WindowSpec window_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError("'" + key + "' must be an array of 2 numbers [lo, hi]");
    const double lo = j[0].get<double>();
    const double hi = j[1].get<double>();
    if (!(lo < hi)) throw ConfigError("'" + key + "' needs lo < hi");
    return WindowSpec{lo, hi};
}

inline NormalizationStats stats_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_object()) throw ConfigError("'" + key + "' must be an object {mean, std}");
    double mean = 0.0;
    double std_dev = 1.0;
    for (const auto& [k, v] : j.items()) {
        if (k == "mean")
            mean = v.get<double>();
        else if (k == "std")
            std_dev = v.get<double>();
        else
            throw ConfigError("unknown key '" + key + "." + k + "'");
    }
    if (!(std_dev > 0.0)) throw ConfigError("'" + key + ".std' must be > 0");
    return NormalizationStats(mean, std_dev, "from config");
}

inline void parse_liver(const nlohmann::json& j, LiverRecipeConfig& out) {
    for (const auto& [k, v] : j.items()) {
        if (k == "target_dims")
            out.target_dims = dims_from_json(v, "liver.target_dims");
        else if (k == "window")
            out.window_spec = window_from_json(v, "liver.window");
        else if (k == "normalization")
            out.stats = stats_from_json(v, "liver.normalization");
        else
            throw ConfigError("unknown key 'liver." + k + "'");
    }
}

inline void parse_tumor(const nlohmann::json& j, TumorRecipeConfig& out) {
    for (const auto& [k, v] : j.items()) {
        if (k == "target_dims")
            out.target_dims = dims_from_json(v, "tumor.target_dims");
        else if (k == "window")
            out.window_spec = window_from_json(v, "tumor.window");
        else if (k == "outside_fill") {
            if (!v.is_number()) throw ConfigError("'tumor.outside_fill' must be a number");
            out.outside_fill = v.get<double>();
        } else if (k == "normalization")
            out.stats = stats_from_json(v, "tumor.normalization");
        else
            throw ConfigError("unknown key 'tumor." + k + "'");
    }
}

inline void parse_synth(const nlohmann::json& j, SynthConfig& out) {
    for (const auto& [k, v] : j.items()) {
        if (k == "cases")
            out.cases = v.get<std::size_t>();
        else if (k == "dims")
            out.dims = dims_from_json(v, "synth.dims");
        else if (k == "seed")
            out.seed = v.get<std::uint64_t>();
        else if (k == "samples")
            out.samples = v.get<std::size_t>();
        else if (k == "noise_scale")
            out.noise_scale = v.get<double>();
        else
            throw ConfigError("unknown key 'synth." + k + "'");
    }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "threshold")
                cfg.threshold = value.get<double>();
            else if (key == "entropy_variant")
                cfg.entropy = entropy_variant_from_string(value.get<std::string>());
            else if (key == "cv_variant")
                cfg.cv = cv_variant_from_string(value.get<std::string>());
            else if (key == "expected_samples")
                cfg.expected_samples = value.get<int>();
            else if (key == "jobs")
                cfg.jobs = value.get<int>();
            else if (key == "liver")
                detail::parse_liver(value, cfg.liver);
            else if (key == "tumor")
                detail::parse_tumor(value, cfg.tumor);
            else if (key == "synth")
                detail::parse_synth(value, cfg.synth);
            else
                throw ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace mcseg
