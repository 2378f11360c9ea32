// mcseg: MC dropout segmentation uncertainty toolkit.
//
// Subcommands: analyze, correlate, flag, synth, preprocess.
// Exit codes: 0 success, 1 usage/config error, 2 I/O error,
// 3 partial per-case failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcseg/config.hpp"
#include "mcseg/format.hpp"
#include "mcseg/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitPartial = 3;

mcseg::RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return mcseg::RunConfig{};
    return mcseg::load_config(path);
}

int cmd_analyze(const std::string& manifest, const std::string& config_path,
                const std::string& out, bool emit_maps, double threshold_override,
                int jobs_override) {
    mcseg::RunConfig cfg = load_config_or_default(config_path);
    if (threshold_override >= 0.0) {
        cfg.threshold = threshold_override;
        mcseg::validate(cfg);
    }
    if (jobs_override != 0) cfg.jobs = jobs_override;

    const mcseg::AnalyzeOutcome outcome = mcseg::run_analyze(manifest, cfg, out, emit_maps);
    for (const mcseg::CaseReport& r : outcome.reports) {
        if (cfg.expected_samples > 0 && r.n_samples != cfg.expected_samples)
            std::fprintf(stderr, "note: case %s has %d samples (expected %d)\n",
                         r.case_id.c_str(), r.n_samples, cfg.expected_samples);
    }
    std::printf("analyzed %zu case(s), %zu failure(s) -> %s\n", outcome.reports.size(),
                outcome.failures.size(), out.c_str());
    for (const mcseg::CaseFailure& f : outcome.failures)
        std::fprintf(stderr, "failed case %s: %s\n", f.case_id.c_str(), f.message.c_str());
    return outcome.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_correlate(const std::string& report, const std::string& out) {
    const auto table = mcseg::run_correlate(report, out);
    for (const auto& row : table)
        std::printf("%s: rho=%s p=%s n=%zu dropped=%zu\n", row.measure.c_str(),
                    mcseg::detail::format_double(row.rho).c_str(),
                    mcseg::detail::format_double(row.p_value).c_str(), row.n, row.dropped);
    return kExitOk;
}

int cmd_flag(const std::string& report, const std::string& policy, const std::string& out) {
    std::vector<std::string> warnings;
    const auto results = mcseg::run_flag(report, policy, out, &warnings);
    for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::size_t flagged = 0;
    for (const auto& r : results)
        if (r.flagged) ++flagged;
    std::printf("flagged %zu of %zu case(s) -> %s\n", flagged, results.size(), out.c_str());
    return kExitOk;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, long long cases,
              double noise_scale, long long seed, long long samples,
              const std::vector<long long>& dims, int jobs) {
    mcseg::RunConfig cfg = load_config_or_default(config_path);
    if (cases > 0) cfg.synth.cases = static_cast<std::size_t>(cases);
    if (noise_scale > 0.0) cfg.synth.noise_scale = noise_scale;
    if (seed >= 0) cfg.synth.seed = static_cast<std::uint64_t>(seed);
    if (samples > 0) cfg.synth.samples = static_cast<std::size_t>(samples);
    if (!dims.empty()) {
        if (dims.size() != 3) throw mcseg::ConfigError("--dims needs exactly 3 values");
        cfg.synth.dims = mcseg::Dims3{dims[0], dims[1], dims[2]};
    }
    mcseg::validate(cfg);
    const auto manifest = mcseg::run_synth(cfg.synth, out_dir, jobs);
    std::printf("wrote %zu case(s) -> %s\n", cfg.synth.cases, manifest.string().c_str());
    return kExitOk;
}

int cmd_preprocess(const std::string& recipe, const std::string& input, const std::string& mask,
                   const std::string& config_path, const std::string& out) {
    const mcseg::RunConfig cfg = load_config_or_default(config_path);
    if (recipe == "liver") {
        mcseg::run_preprocess_liver(input, cfg, out);
    } else if (recipe == "tumor") {
        if (mask.empty())
            throw CLI::ValidationError("--mask", "tumor recipe requires a liver mask");
        mcseg::run_preprocess_tumor(input, mask, cfg, out);
    } else {
        throw CLI::ValidationError("--recipe", "recipe must be 'liver' or 'tumor'");
    }
    std::printf("wrote %s\n", out.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MC dropout segmentation uncertainty toolkit"};
    app.require_subcommand(1);

    std::string manifest, config_path, out, report, policy, recipe, input, mask;
    bool emit_maps = false;
    double threshold = -1.0;
    int jobs = 0;
    long long cases = 0, seed = -1, samples = 0;
    double noise_scale = 0.0;
    std::vector<long long> dims;

    auto* analyze = app.add_subcommand("analyze", "Analyze cases from a manifest");
    analyze->add_option("--manifest", manifest, "Case manifest (JSON)")->required();
    analyze->add_option("--config", config_path, "Run configuration (JSON)");
    analyze->add_option("--out", out, "Report CSV path")->required();
    analyze->add_flag("--emit-maps", emit_maps, "Write consensus and uncertainty volumes");
    analyze->add_option("--threshold", threshold, "Binarization threshold in (0,1)");
    analyze->add_option("--jobs", jobs, "Worker count (0 = config, -1 = all cores)");

    auto* correlate = app.add_subcommand("correlate", "Correlate measures against dice");
    correlate->add_option("--report", report, "Report CSV from analyze")->required();
    correlate->add_option("--out", out, "Correlation CSV path")->required();

    auto* flag = app.add_subcommand("flag", "Flag low-confidence cases");
    flag->add_option("--report", report, "Report CSV from analyze")->required();
    flag->add_option("--policy", policy, "Flag policy (JSON)")->required();
    flag->add_option("--out", out, "Flagged-case CSV path")->required();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
    synth->add_option("--config", config_path, "Run configuration (JSON)");
    synth->add_option("--out", out, "Output directory")->required();
    synth->add_option("--cases", cases, "Number of cases");
    synth->add_option("--noise", noise_scale, "Noise grid scale factor");
    synth->add_option("--seed", seed, "Base seed");
    synth->add_option("--samples", samples, "Samples per case");
    synth->add_option("--dims", dims, "Volume dims, e.g. --dims 64 64 64")->expected(3);
    synth->add_option("--jobs", jobs, "Worker count");

    auto* preprocess = app.add_subcommand("preprocess", "Run a CT preprocessing recipe");
    preprocess->add_option("--recipe", recipe, "liver or tumor")->required();
    preprocess->add_option("--input", input, "Input CT volume")->required();
    preprocess->add_option("--mask", mask, "Liver mask (tumor recipe)");
    preprocess->add_option("--config", config_path, "Run configuration (JSON)");
    preprocess->add_option("--out", out, "Output volume path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analyze->parsed())
            return cmd_analyze(manifest, config_path, out, emit_maps, threshold, jobs);
        if (correlate->parsed()) return cmd_correlate(report, out);
        if (flag->parsed()) return cmd_flag(report, policy, out);
        if (synth->parsed())
            return cmd_synth(config_path, out, cases, noise_scale, seed, samples, dims, jobs);
        if (preprocess->parsed()) return cmd_preprocess(recipe, input, mask, config_path, out);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const mcseg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const mcseg::PolicyError& e) {
        std::fprintf(stderr, "policy error: %s\n", e.what());
        return kExitUsage;
    } catch (const mcseg::UndefinedCorrelationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const mcseg::ManifestError& e) {
        std::fprintf(stderr, "manifest error: %s\n", e.what());
        return kExitIo;
    } catch (const mcseg::ReportError& e) {
        std::fprintf(stderr, "report error: %s\n", e.what());
        return kExitIo;
    } catch (const mcseg::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
