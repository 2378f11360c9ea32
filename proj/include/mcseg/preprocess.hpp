#pragma once

// CT preprocessing: Hounsfield windowing, z-score normalization, and 3D
// resampling (trilinear for intensities, nearest-neighbor for labels), plus
// the two full recipes built from them (liver and tumor).
//
// Resampling uses corner-center alignment: output voxel center i maps to the
// input coordinate i*(n_in-1)/(n_out-1) per axis, so corner voxel centers
// coincide and a degenerate n_out=1 axis samples the input center. Spacing
// is rescaled by the dims ratio n_in/n_out.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mcseg/volume.hpp"

namespace mcseg {

/// Hounsfield clamp range.
struct WindowSpec {
    double lo;
    double hi;

    WindowSpec(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo < hi)) throw std::invalid_argument("window requires lo < hi");
    }
};

/// Cohort intensity statistics for z-scoring. `note` records which cohort
/// they summarize.
struct NormalizationStats {
    double mean;
    double std;
    std::string note;

    NormalizationStats(double mean_, double std_, std::string note_ = {})
        : mean(mean_), std(std_), note(std::move(note_)) {
        if (!(std > 0.0)) throw std::invalid_argument("normalization std must be > 0");
    }
};

/// Clamp every voxel into [lo, hi]. Idempotent.
inline VoxelGrid window(const VoxelGrid& grid, const WindowSpec& spec) {
    std::vector<float> out(grid.size());
    std::span<const float> src = grid.data();
    const float lo = static_cast<float>(spec.lo), hi = static_cast<float>(spec.hi);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(src[i], lo, hi);
    return VoxelGrid(grid.dims(), grid.spacing(), std::move(out));
}

/// Map every voxel to (v - mean) / std.
inline VoxelGrid zscore(const VoxelGrid& grid, const NormalizationStats& stats) {
    std::vector<float> out(grid.size());
    std::span<const float> src = grid.data();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>((static_cast<double>(src[i]) - stats.mean) / stats.std);
    return VoxelGrid(grid.dims(), grid.spacing(), std::move(out));
}

/// Pooled mean and population (divide-by-count) standard deviation over all
/// voxels of all grids. Constant cohorts (std = 0) are an error.
inline NormalizationStats compute_stats(std::span<const VoxelGrid> grids,
                                        std::string note = "pooled cohort voxels") {
    if (grids.empty()) throw std::invalid_argument("compute_stats needs at least one grid");
    std::size_t count = 0;
    double sum = 0.0;
    for (const VoxelGrid& g : grids) {
        for (float v : g.data()) sum += static_cast<double>(v);
        count += g.size();
    }
    if (count < 2) throw std::invalid_argument("compute_stats needs at least 2 voxels in total");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const VoxelGrid& g : grids)
        for (float v : g.data()) {
            const double d = static_cast<double>(v) - mean;
            ss += d * d;
        }
    const double std_dev = std::sqrt(ss / static_cast<double>(count));
    if (!(std_dev > 0.0))
        throw std::invalid_argument("compute_stats: zero variance, z-scoring undefined");
    return NormalizationStats(mean, std_dev, std::move(note));
}

namespace detail {

struct AxisMap {
    double scale = 0.0;   // input coordinate step per output voxel
    double center = 0.0;  // fixed coordinate for degenerate axes
    bool degenerate = false;
};

inline AxisMap axis_map(index_t n_in, index_t n_out) {
    AxisMap m;
    if (n_out <= 1) {
        m.degenerate = true;
        m.center = static_cast<double>(n_in - 1) / 2.0;
    } else {
        m.scale = static_cast<double>(n_in - 1) / static_cast<double>(n_out - 1);
    }
    return m;
}

inline double axis_coord(const AxisMap& m, index_t i) {
    return m.degenerate ? m.center : static_cast<double>(i) * m.scale;
}

inline Spacing3 rescaled_spacing(const Dims3& in, const Spacing3& s, const Dims3& out) {
    return {s.sx * static_cast<double>(in.nx) / static_cast<double>(out.nx),
            s.sy * static_cast<double>(in.ny) / static_cast<double>(out.ny),
            s.sz * static_cast<double>(in.nz) / static_cast<double>(out.nz)};
}

}  // namespace detail

/// Trilinear resampling of an intensity grid to `target` dims.
inline VoxelGrid resample(const VoxelGrid& grid, const Dims3& target) {
    detail::check_dims(target);
    const Dims3& in = grid.dims();
    const auto mx = detail::axis_map(in.nx, target.nx);
    const auto my = detail::axis_map(in.ny, target.ny);
    const auto mz = detail::axis_map(in.nz, target.nz);
    std::span<const float> src = grid.data();
    std::vector<float> out(target.voxel_count());

    std::size_t o = 0;
    for (index_t z = 0; z < target.nz; ++z) {
        const double w = detail::axis_coord(mz, z);
        const index_t z0 = std::min<index_t>(static_cast<index_t>(w), in.nz - 1);
        const index_t z1 = std::min<index_t>(z0 + 1, in.nz - 1);
        const double fz = w - static_cast<double>(z0);
        for (index_t y = 0; y < target.ny; ++y) {
            const double v = detail::axis_coord(my, y);
            const index_t y0 = std::min<index_t>(static_cast<index_t>(v), in.ny - 1);
            const index_t y1 = std::min<index_t>(y0 + 1, in.ny - 1);
            const double fy = v - static_cast<double>(y0);
            for (index_t x = 0; x < target.nx; ++x, ++o) {
                const double u = detail::axis_coord(mx, x);
                const index_t x0 = std::min<index_t>(static_cast<index_t>(u), in.nx - 1);
                const index_t x1 = std::min<index_t>(x0 + 1, in.nx - 1);
                const double fx = u - static_cast<double>(x0);

                const double c000 = src[detail::linear_index(in, x0, y0, z0)];
                const double c100 = src[detail::linear_index(in, x1, y0, z0)];
                const double c010 = src[detail::linear_index(in, x0, y1, z0)];
                const double c110 = src[detail::linear_index(in, x1, y1, z0)];
                const double c001 = src[detail::linear_index(in, x0, y0, z1)];
                const double c101 = src[detail::linear_index(in, x1, y0, z1)];
                const double c011 = src[detail::linear_index(in, x0, y1, z1)];
                const double c111 = src[detail::linear_index(in, x1, y1, z1)];

                const double c00 = c000 + fx * (c100 - c000);
                const double c10 = c010 + fx * (c110 - c010);
                const double c01 = c001 + fx * (c101 - c001);
                const double c11 = c011 + fx * (c111 - c011);
                const double c0 = c00 + fy * (c10 - c00);
                const double c1 = c01 + fy * (c11 - c01);
                double val = c0 + fz * (c1 - c0);

                // keep the convex-combination bound despite rounding
                const double lo = std::min({c000, c100, c010, c110, c001, c101, c011, c111});
                const double hi = std::max({c000, c100, c010, c110, c001, c101, c011, c111});
                val = std::clamp(val, lo, hi);
                out[o] = static_cast<float>(val);
            }
        }
    }
    return VoxelGrid(target, detail::rescaled_spacing(in, grid.spacing(), target), std::move(out));
}

/// Nearest-neighbor resampling of a label mask to `target` dims. Emits only
/// values present in the input.
inline BinaryMask resample(const BinaryMask& mask, const Dims3& target) {
    detail::check_dims(target);
    const Dims3& in = mask.dims();
    const auto mx = detail::axis_map(in.nx, target.nx);
    const auto my = detail::axis_map(in.ny, target.ny);
    const auto mz = detail::axis_map(in.nz, target.nz);
    std::span<const std::uint8_t> src = mask.data();
    std::vector<std::uint8_t> out(target.voxel_count());

    auto nearest = [](double c, index_t n) {
        return std::clamp<index_t>(static_cast<index_t>(std::llround(c)), 0, n - 1);
    };
    std::size_t o = 0;
    for (index_t z = 0; z < target.nz; ++z) {
        const index_t zi = nearest(detail::axis_coord(mz, z), in.nz);
        for (index_t y = 0; y < target.ny; ++y) {
            const index_t yi = nearest(detail::axis_coord(my, y), in.ny);
            for (index_t x = 0; x < target.nx; ++x, ++o)
                out[o] = src[detail::linear_index(in, nearest(detail::axis_coord(mx, x), in.nx), yi, zi)];
        }
    }
    return BinaryMask(target, detail::rescaled_spacing(in, mask.spacing(), target), std::move(out));
}

// ---------------------------------------------------------------- recipes --

struct LiverRecipeConfig {
    Dims3 target_dims{256, 256, 256};
    WindowSpec window_spec{-120.0, 240.0};  // soft tissue window
    NormalizationStats stats{0.0, 1.0, "identity (supply cohort stats)"};
};

struct TumorRecipeConfig {
    Dims3 target_dims{284, 256, 133};
    WindowSpec window_spec{-30.0, 200.0};
    double outside_fill = -50.0;
    NormalizationStats stats{0.0, 1.0, "identity (supply cohort stats)"};
};

/// Liver recipe: resample to 256^3, clamp to the soft tissue window, z-score.
inline VoxelGrid preprocess_liver(const VoxelGrid& ct, const LiverRecipeConfig& cfg = {}) {
    return zscore(window(resample(ct, cfg.target_dims), cfg.window_spec), cfg.stats);
}

/// Tumor recipe stage 1: crop CT to the liver bounding box, set voxels
/// outside the (cropped) liver mask to the fill value, and clamp in-liver
/// voxels to the tumor window. Kept separate so the pre-resample contract
/// is testable.
inline VoxelGrid tumor_prepare(const VoxelGrid& ct, const BinaryMask& liver_mask,
                               const TumorRecipeConfig& cfg = {}) {
    if (!(ct.dims() == liver_mask.dims()))
        throw std::invalid_argument("tumor recipe: CT and liver mask dims differ");
    if (liver_mask.foreground_count() == 0)
        throw std::invalid_argument("tumor recipe: liver mask is empty");
    const IndexBox box = bounding_box(liver_mask);
    const VoxelGrid ct_crop = crop(ct, box);
    const BinaryMask mask_crop = crop(liver_mask, box);

    std::vector<float> out(ct_crop.size());
    std::span<const float> src = ct_crop.data();
    std::span<const std::uint8_t> inside = mask_crop.data();
    const float lo = static_cast<float>(cfg.window_spec.lo);
    const float hi = static_cast<float>(cfg.window_spec.hi);
    const float fill = static_cast<float>(cfg.outside_fill);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = inside[i] ? std::clamp(src[i], lo, hi) : fill;
    return VoxelGrid(ct_crop.dims(), ct_crop.spacing(), std::move(out));
}

/// Tumor recipe: crop to liver bbox, fill/window, resample to the target
/// dims, z-score.
inline VoxelGrid preprocess_tumor(const VoxelGrid& ct, const BinaryMask& liver_mask,
                                  const TumorRecipeConfig& cfg = {}) {
    return zscore(resample(tumor_prepare(ct, liver_mask, cfg), cfg.target_dims), cfg.stats);
}

}  // namespace mcseg
