#pragma once

// Aggregation of a Monte Carlo dropout sample set into the consensus mask
// and voxelwise uncertainty map, plus the three scalar uncertainty measures
// (coefficient of variation, mean pairwise Dice, mean labelled uncertainty).
//
// Per-voxel accumulations over the N samples run in ascending value order,
// and pair/count reductions are sorted before summing, so every result is
// bit-identical under permutation of the sample order.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mcseg/parallel.hpp"
#include "mcseg/volume.hpp"

namespace mcseg {

/// The voxelwise score is -(1/N) * sum_i p_i ln p_i as printed; the binary
/// variant adds the complementary -(1/N) * sum_i (1-p_i) ln(1-p_i) term.
enum class EntropyVariant { as_printed, binary };

/// As printed: population variance of per-sample foreground volumes over
/// their mean plus one. The std_over_mean variant replaces the variance
/// with its square root (the classical coefficient-of-variation numerator),
/// keeping the +1 guard.
enum class CvVariant { as_printed, std_over_mean };

inline std::string to_string(EntropyVariant v) {
    return v == EntropyVariant::as_printed ? "as-printed" : "binary";
}
inline std::string to_string(CvVariant v) {
    return v == CvVariant::as_printed ? "as-printed" : "std-over-mean";
}

inline EntropyVariant entropy_variant_from_string(const std::string& s) {
    if (s == "as-printed") return EntropyVariant::as_printed;
    if (s == "binary") return EntropyVariant::binary;
    throw std::invalid_argument("unknown entropy variant '" + s + "' (as-printed|binary)");
}
inline CvVariant cv_variant_from_string(const std::string& s) {
    if (s == "as-printed") return CvVariant::as_printed;
    if (s == "std-over-mean") return CvVariant::std_over_mean;
    throw std::invalid_argument("unknown cv variant '" + s + "' (as-printed|std-over-mean)");
}

/// Per-voxel uncertainty values (nats), all finite and >= 0. Derived maps
/// keep double precision; only disk I/O narrows to float32.
struct UncertaintyMap {
    BasicVoxelGrid<double> grid;
    int n_samples;
};

/// Per-case scalar results. u_labelled is empty when the consensus mask has
/// no foreground (the measure is undefined there, not zero).
struct CaseReport {
    std::string case_id;
    int n_samples = 0;
    double cv = 0.0;
    double d_pw = 0.0;
    std::optional<double> u_labelled;
    std::size_t consensus_voxels = 0;
    std::optional<double> dice_vs_gt;
    double threshold = 0.5;
};

namespace detail {

constexpr std::size_t kMaxStackSamples = 64;

// Gathers the N values of one voxel, ascending. Falls back to a heap copy
// for pathological N.
template <typename Fn>
void for_each_voxel_sorted(const SampleSet& samples, int jobs, Fn&& fn) {
    const std::size_t n = samples.count();
    const std::size_t voxels = samples.dims().voxel_count();
    std::vector<const float*> ptrs(n);
    for (std::size_t i = 0; i < n; ++i) ptrs[i] = samples.sample(i).data().data();

    parallel_chunks(voxels, jobs, [&](std::size_t begin, std::size_t end) {
        std::array<double, kMaxStackSamples> stack_buf;
        std::vector<double> heap_buf;
        double* buf = stack_buf.data();
        if (n > kMaxStackSamples) {
            heap_buf.resize(n);
            buf = heap_buf.data();
        }
        for (std::size_t v = begin; v < end; ++v) {
            for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<double>(ptrs[i][v]);
            std::sort(buf, buf + n);
            fn(v, buf, n);
        }
    });
}

}  // namespace detail

/// Voxelwise arithmetic mean of the N probability volumes.
inline BasicVoxelGrid<double> mean_probability(const SampleSet& samples, int jobs = 1) {
    std::vector<double> out(samples.dims().voxel_count());
    const double inv_n = 1.0 / static_cast<double>(samples.count());
    detail::for_each_voxel_sorted(samples, jobs, [&](std::size_t v, const double* p, std::size_t n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += p[i];
        out[v] = sum * inv_n;
    });
    return BasicVoxelGrid<double>(samples.dims(), samples.spacing(), std::move(out));
}

/// Binarization of the voxelwise mean: the final segmentation.
inline BinaryMask consensus_mask(const SampleSet& samples, double threshold = 0.5, int jobs = 1) {
    return binarize(mean_probability(samples, jobs), threshold);
}

/// U(x) = -(1/N) * sum_i p_i(x) ln p_i(x) with 0 ln 0 = 0 (natural log).
inline UncertaintyMap uncertainty_map(const SampleSet& samples,
                                      EntropyVariant variant = EntropyVariant::as_printed,
                                      int jobs = 1) {
    std::vector<double> out(samples.dims().voxel_count());
    const double inv_n = 1.0 / static_cast<double>(samples.count());
    const bool binary = variant == EntropyVariant::binary;
    detail::for_each_voxel_sorted(samples, jobs, [&](std::size_t v, const double* p, std::size_t n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = p[i];
            if (pi > 0.0) acc -= pi * std::log(pi);
            if (binary) {
                const double qi = 1.0 - pi;
                if (qi > 0.0) acc -= qi * std::log(qi);
            }
        }
        out[v] = acc == 0.0 ? 0.0 : acc * inv_n;
    });
    return UncertaintyMap{BasicVoxelGrid<double>(samples.dims(), samples.spacing(), std::move(out)),
                          static_cast<int>(samples.count())};
}

namespace detail {

inline std::vector<std::size_t> per_sample_foreground(const SampleSet& samples, double threshold,
                                                      int jobs) {
    const std::size_t n = samples.count();
    std::vector<std::size_t> counts(n);
    // counts are independent; parallelize across samples
    parallel_chunks(n, jobs <= 1 ? 1 : jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            counts[i] = binarize(samples.sample(i), threshold).foreground_count();
    });
    return counts;
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // population variance
};

// Mean and population variance with the inputs sorted first, so the result
// does not depend on sample order.
inline MeanVar sorted_mean_var(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    return {mean, ss / static_cast<double>(values.size())};
}

}  // namespace detail

/// CV = Var_i(sum_x b(p_i(x))) / (E_i[sum_x b(p_i(x))] + 1), population
/// variance, exactly as printed. All-empty samples give 0.
inline double coefficient_of_variation(const SampleSet& samples, double threshold = 0.5,
                                       CvVariant variant = CvVariant::as_printed, int jobs = 1) {
    const auto counts = detail::per_sample_foreground(samples, threshold, jobs);
    std::vector<double> volumes(counts.begin(), counts.end());
    const auto mv = detail::sorted_mean_var(std::move(volumes));
    const double numerator =
        variant == CvVariant::as_printed ? mv.var : std::sqrt(mv.var);
    return numerator / (mv.mean + 1.0);
}

/// Average Dice over all N(N-1)/2 unordered pairs of binarized samples.
inline double mean_pairwise_dice(const SampleSet& samples, double threshold = 0.5, int jobs = 1) {
    const std::size_t n = samples.count();
    std::vector<BinaryMask> masks;
    masks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) masks.push_back(binarize(samples.sample(i), threshold));

    const std::size_t n_pairs = n * (n - 1) / 2;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n_pairs);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    std::vector<double> values(n_pairs);
    detail::parallel_chunks(n_pairs, jobs <= 1 ? 1 : jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            values[k] = dice(masks[pairs[k].first], masks[pairs[k].second]);
    });
    // canonical summation order, invariant under sample permutation
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(n_pairs);
}

/// Mean of U(x) over the voxels of the consensus mask (p(x) >= threshold,
/// p = mean probability). Empty consensus -> nullopt ("undefined").
inline std::optional<double> mean_labelled_uncertainty(
    const SampleSet& samples, double threshold = 0.5,
    EntropyVariant variant = EntropyVariant::as_printed, int jobs = 1) {
    const BinaryMask consensus = consensus_mask(samples, threshold, jobs);
    if (consensus.foreground_count() == 0) return std::nullopt;
    const UncertaintyMap umap = uncertainty_map(samples, variant, jobs);
    std::span<const std::uint8_t> inside = consensus.data();
    std::span<const double> u = umap.grid.data();
    double sum = 0.0;  // serial, fixed index order
    for (std::size_t i = 0; i < u.size(); ++i)
        if (inside[i]) sum += u[i];
    return sum / static_cast<double>(consensus.foreground_count());
}

struct AnalysisOptions {
    double threshold = 0.5;
    EntropyVariant entropy = EntropyVariant::as_printed;
    CvVariant cv = CvVariant::as_printed;
    int jobs = 1;
};

/// Consensus mask, uncertainty map and scalar measures from one pass over
/// the samples. Results are bit-identical to the standalone functions.
struct CaseAnalysis {
    CaseReport report;
    BinaryMask consensus;
    UncertaintyMap uncertainty;
};

inline CaseAnalysis analyze_case_full(const SampleSet& samples,
                                      const BinaryMask* ground_truth = nullptr,
                                      const AnalysisOptions& opt = {}) {
    if (ground_truth && !(ground_truth->dims() == samples.dims()))
        throw std::invalid_argument("ground truth dims do not match samples for case '" +
                                    samples.case_id() + "'");
    const std::size_t n = samples.count();
    const std::size_t voxels = samples.dims().voxel_count();

    // mean probability and entropy share the sorted per-voxel buffer
    std::vector<double> mean_data(voxels);
    std::vector<double> u_data(voxels);
    const double inv_n = 1.0 / static_cast<double>(n);
    const bool binary = opt.entropy == EntropyVariant::binary;
    detail::for_each_voxel_sorted(samples, opt.jobs,
                                  [&](std::size_t v, const double* p, std::size_t cnt) {
        double sum = 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < cnt; ++i) {
            const double pi = p[i];
            sum += pi;
            if (pi > 0.0) acc -= pi * std::log(pi);
            if (binary) {
                const double qi = 1.0 - pi;
                if (qi > 0.0) acc -= qi * std::log(qi);
            }
        }
        mean_data[v] = sum * inv_n;
        u_data[v] = acc == 0.0 ? 0.0 : acc * inv_n;
    });
    BinaryMask consensus = binarize(
        BasicVoxelGrid<double>(samples.dims(), samples.spacing(), std::move(mean_data)),
        opt.threshold);
    UncertaintyMap umap{
        BasicVoxelGrid<double>(samples.dims(), samples.spacing(), std::move(u_data)),
        static_cast<int>(n)};

    // binarize each sample once; serves both CV and pairwise Dice
    std::vector<BinaryMask> masks;
    masks.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        masks.push_back(binarize(samples.sample(i), opt.threshold));

    std::vector<double> volumes(n);
    for (std::size_t i = 0; i < n; ++i)
        volumes[i] = static_cast<double>(masks[i].foreground_count());
    const auto mv = detail::sorted_mean_var(std::move(volumes));
    const double cv_num = opt.cv == CvVariant::as_printed ? mv.var : std::sqrt(mv.var);

    const std::size_t n_pairs = n * (n - 1) / 2;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n_pairs);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> dices(n_pairs);
    detail::parallel_chunks(n_pairs, opt.jobs <= 1 ? 1 : opt.jobs,
                            [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            dices[k] = dice(masks[pairs[k].first], masks[pairs[k].second]);
    });
    std::sort(dices.begin(), dices.end());
    double dice_sum = 0.0;
    for (double v : dices) dice_sum += v;

    CaseReport report;
    report.case_id = samples.case_id();
    report.n_samples = static_cast<int>(n);
    report.threshold = opt.threshold;
    report.consensus_voxels = consensus.foreground_count();
    report.cv = cv_num / (mv.mean + 1.0);
    report.d_pw = dice_sum / static_cast<double>(n_pairs);
    if (report.consensus_voxels > 0) {
        std::span<const std::uint8_t> inside = consensus.data();
        std::span<const double> u = umap.grid.data();
        double sum = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (inside[i]) sum += u[i];
        report.u_labelled = sum / static_cast<double>(report.consensus_voxels);
    }
    if (ground_truth) report.dice_vs_gt = dice(consensus, *ground_truth);
    return CaseAnalysis{std::move(report), std::move(consensus), std::move(umap)};
}

inline CaseReport analyze_case(const SampleSet& samples, const BinaryMask* ground_truth = nullptr,
                               const AnalysisOptions& opt = {}) {
    return analyze_case_full(samples, ground_truth, opt).report;
}

}  // namespace mcseg
