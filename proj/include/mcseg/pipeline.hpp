#pragma once

// Command bodies behind the CLI subcommands. Everything here is callable
// from tests without spawning a process. Batch analysis runs cases on a
// bounded worker pool; per-case failures are recorded and reported, they do
// not abort the batch. Output rows are sorted by case_id, so results do not
// depend on the parallelism degree.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcseg/config.hpp"
#include "mcseg/flagging.hpp"
#include "mcseg/io.hpp"
#include "mcseg/manifest.hpp"
#include "mcseg/preprocess.hpp"
#include "mcseg/report.hpp"
#include "mcseg/stats.hpp"
#include "mcseg/synth.hpp"
#include "mcseg/uncertainty.hpp"

namespace mcseg {

struct CaseFailure {
    std::string case_id;
    std::string message;
};

struct AnalyzeOutcome {
    std::vector<CaseReport> reports;
    std::vector<CaseFailure> failures;
};

namespace detail {

inline SampleSet load_sample_set(const CaseManifest& c) {
    std::vector<VoxelGrid> grids;
    grids.reserve(c.samples.size());
    for (const auto& path : c.samples) grids.push_back(read_volume(path));
    return SampleSet(c.case_id, std::move(grids));
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return text;
}

}  // namespace detail

/// Analyze every case in the manifest. Writes the report CSV to out_csv and
/// a structured JSON record next to it (same stem, .json). With emit_maps,
/// consensus and uncertainty volumes go to a maps/ directory beside out_csv.
inline AnalyzeOutcome run_analyze(const std::filesystem::path& manifest_path,
                                  const RunConfig& cfg, const std::filesystem::path& out_csv,
                                  bool emit_maps = false) {
    const std::vector<CaseManifest> cases = load_manifest(manifest_path);

    std::filesystem::path maps_dir;
    if (emit_maps) {
        maps_dir = out_csv.parent_path() / "maps";
        std::filesystem::create_directories(maps_dir);
    }

    AnalysisOptions opt;
    opt.threshold = cfg.threshold;
    opt.entropy = cfg.entropy;
    opt.cv = cfg.cv;
    opt.jobs = 1;  // parallelism is across cases here

    struct Slot {
        std::optional<CaseReport> report;
        std::optional<CaseFailure> failure;
    };
    std::vector<Slot> slots(cases.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cases.size()) return;
            const CaseManifest& c = cases[i];
            try {
                if (!c.missing.empty()) {
                    std::string msg = "missing files:";
                    for (const auto& p : c.missing) msg += " " + p.string();
                    throw IoError(msg);
                }
                const SampleSet samples = detail::load_sample_set(c);
                std::optional<BinaryMask> gt;
                if (c.ground_truth) gt = read_mask(*c.ground_truth);
                CaseAnalysis analysis =
                    analyze_case_full(samples, gt ? &*gt : nullptr, opt);
                if (emit_maps) {
                    write_mask(analysis.consensus, maps_dir / (c.case_id + "_consensus.nii.gz"));
                    write_volume(analysis.uncertainty.grid,
                                 maps_dir / (c.case_id + "_uncertainty.nii.gz"));
                }
                slots[i].report = std::move(analysis.report);
            } catch (const std::exception& e) {
                slots[i].failure = CaseFailure{c.case_id, e.what()};
            }
        }
    };

    const int jobs = resolve_jobs(cfg.jobs);
    if (jobs <= 1 || cases.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int degree = std::min<int>(jobs, static_cast<int>(cases.size()));
        pool.reserve(static_cast<std::size_t>(degree));
        for (int t = 0; t < degree; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    AnalyzeOutcome outcome;
    for (Slot& s : slots) {
        if (s.report) outcome.reports.push_back(std::move(*s.report));
        if (s.failure) outcome.failures.push_back(std::move(*s.failure));
    }
    std::sort(outcome.reports.begin(), outcome.reports.end(),
              [](const CaseReport& a, const CaseReport& b) { return a.case_id < b.case_id; });
    std::sort(outcome.failures.begin(), outcome.failures.end(),
              [](const CaseFailure& a, const CaseFailure& b) { return a.case_id < b.case_id; });

    if (!out_csv.parent_path().empty()) std::filesystem::create_directories(out_csv.parent_path());
    detail::write_text_file(out_csv, reports_to_csv(outcome.reports));

    nlohmann::json record;
    record["cases"] = nlohmann::json::array();
    for (const CaseReport& r : outcome.reports) record["cases"].push_back(report_to_json(r));
    record["failures"] = nlohmann::json::array();
    for (const CaseFailure& f : outcome.failures)
        record["failures"].push_back({{"case_id", f.case_id}, {"error", f.message}});
    std::filesystem::path record_path = out_csv;
    record_path.replace_extension(".json");
    detail::write_text_file(record_path, record.dump(2) + "\n");

    return outcome;
}

/// Correlation table (cv, d_pw, u_labelled vs dice) from a report CSV.
inline std::vector<CorrelationResult> run_correlate(const std::filesystem::path& report_csv,
                                                    const std::filesystem::path& out_csv) {
    const std::vector<CaseReport> reports = parse_reports_csv(detail::read_text_file(report_csv));
    const std::vector<CorrelationResult> table = correlation_table(reports);
    if (!out_csv.parent_path().empty()) std::filesystem::create_directories(out_csv.parent_path());
    detail::write_text_file(out_csv, correlations_to_csv(table));
    return table;
}

/// Apply a flag policy to a report CSV; orientation warnings land in
/// *warnings when given.
inline std::vector<FlagResult> run_flag(const std::filesystem::path& report_csv,
                                        const std::filesystem::path& policy_path,
                                        const std::filesystem::path& out_csv,
                                        std::vector<std::string>* warnings = nullptr) {
    nlohmann::json policy_json;
    {
        std::ifstream in(policy_path);
        if (!in) throw PolicyError("cannot open policy file: " + policy_path.string());
        try {
            in >> policy_json;
        } catch (const nlohmann::json::exception& e) {
            throw PolicyError("policy file " + policy_path.string() + ": " + e.what());
        }
    }
    const FlagPolicy policy = parse_policy(policy_json);
    if (warnings) validate(policy, warnings);
    const std::vector<CaseReport> reports = parse_reports_csv(detail::read_text_file(report_csv));
    const std::vector<FlagResult> results = evaluate_flags(policy, reports);
    if (!out_csv.parent_path().empty()) std::filesystem::create_directories(out_csv.parent_path());
    detail::write_text_file(out_csv, flags_to_csv(results));
    return results;
}

/// Generate a cohort on disk: per-case directories of probability samples
/// plus a ground-truth mask, and a manifest that run_analyze accepts as-is.
/// One case is materialized at a time to bound memory.
inline std::filesystem::path run_synth(const SynthConfig& cfg,
                                       const std::filesystem::path& out_dir, int jobs = 1) {
    const auto specs =
        make_cohort_specs(cfg.cases, default_noise_grid(cfg.noise_scale), cfg.dims, cfg.seed,
                          cfg.samples);
    std::filesystem::create_directories(out_dir);

    std::vector<CaseManifest> manifest;
    manifest.reserve(specs.size());
    for (const auto& spec : specs) {
        const SynthCase synth_case = realize_case(spec, jobs);
        const std::filesystem::path case_dir = out_dir / spec.case_id;
        std::filesystem::create_directories(case_dir);

        CaseManifest entry;
        entry.case_id = spec.case_id;
        for (std::size_t i = 0; i < synth_case.samples.count(); ++i) {
            std::string num = std::to_string(i);
            const std::filesystem::path path =
                case_dir / ("sample_" + std::string(num.size() < 2 ? 2 - num.size() : 0, '0') +
                            num + ".nii.gz");
            write_volume(synth_case.samples.sample(i), path);
            entry.samples.push_back(path);
        }
        const std::filesystem::path gt_path = case_dir / "ground_truth.nii.gz";
        write_mask(synth_case.ground_truth, gt_path);
        entry.ground_truth = gt_path;
        manifest.push_back(std::move(entry));
    }

    const std::filesystem::path manifest_path = out_dir / "manifest.json";
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

namespace detail {

inline nlohmann::json preprocess_sidecar(const std::string& recipe, const Dims3& input_dims,
                                         const Dims3& target_dims, const WindowSpec& window,
                                         const NormalizationStats& stats,
                                         std::optional<double> outside_fill) {
    nlohmann::json j;
    j["recipe"] = recipe;
    j["input_dims"] = {input_dims.nx, input_dims.ny, input_dims.nz};
    j["target_dims"] = {target_dims.nx, target_dims.ny, target_dims.nz};
    j["window"] = {window.lo, window.hi};
    j["normalization"] = {{"mean", stats.mean}, {"std", stats.std}, {"note", stats.note}};
    if (outside_fill) j["outside_fill"] = *outside_fill;
    return j;
}

}  // namespace detail

/// Liver recipe: resample to target dims, window, z-score.
inline VoxelGrid run_preprocess_liver(const std::filesystem::path& input,
                                      const RunConfig& cfg, const std::filesystem::path& out) {
    const VoxelGrid ct = read_volume(input);
    VoxelGrid result = preprocess_liver(ct, cfg.liver);
    if (!out.parent_path().empty()) std::filesystem::create_directories(out.parent_path());
    write_volume(result, out);
    detail::write_text_file(
        std::filesystem::path(out.string() + ".params.json"),
        detail::preprocess_sidecar("liver", ct.dims(), cfg.liver.target_dims,
                                   cfg.liver.window_spec, cfg.liver.stats, std::nullopt)
                .dump(2) +
            "\n");
    return result;
}

/// Tumor recipe: crop to the liver bounding box, fill outside the mask,
/// window inside, resample, z-score.
inline VoxelGrid run_preprocess_tumor(const std::filesystem::path& input,
                                      const std::filesystem::path& mask_path,
                                      const RunConfig& cfg, const std::filesystem::path& out) {
    const VoxelGrid ct = read_volume(input);
    const BinaryMask liver = read_mask(mask_path);
    VoxelGrid result = preprocess_tumor(ct, liver, cfg.tumor);
    if (!out.parent_path().empty()) std::filesystem::create_directories(out.parent_path());
    write_volume(result, out);
    detail::write_text_file(
        std::filesystem::path(out.string() + ".params.json"),
        detail::preprocess_sidecar("tumor", ct.dims(), cfg.tumor.target_dims,
                                   cfg.tumor.window_spec, cfg.tumor.stats,
                                   cfg.tumor.outside_fill)
                .dump(2) +
            "\n");
    return result;
}

}  // namespace mcseg
