#pragma once

// Dense 3D grid types and the elementary mask operations everything else
// builds on. Voxel data is stored x-fastest: index = x + nx*(y + ny*z).
// Voxel indices are zero-based. All types are immutable after construction.
//
// BasicVoxelGrid is templated on its scalar type: volumes read from disk and
// MC samples are float (half the memory of double at 256^3), while derived
// analysis grids (mean probability, uncertainty) keep full double precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace mcseg {

using index_t = std::int64_t;

struct Dims3 {
    index_t nx = 0;
    index_t ny = 0;
    index_t nz = 0;

    [[nodiscard]] std::size_t voxel_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    bool operator==(const Dims3&) const = default;
};

struct Spacing3 {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;
    bool operator==(const Spacing3&) const = default;
};

struct Index3 {
    index_t x = 0;
    index_t y = 0;
    index_t z = 0;
    bool operator==(const Index3&) const = default;
};

/// Inclusive axis-aligned voxel index box.
struct IndexBox {
    Index3 lo;
    Index3 hi;

    [[nodiscard]] Dims3 extents() const {
        return {hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1};
    }
    bool operator==(const IndexBox&) const = default;
};

namespace detail {

inline void check_dims(const Dims3& d) {
    if (d.nx < 1 || d.ny < 1 || d.nz < 1)
        throw std::invalid_argument("grid dims must be positive, got " +
                                    std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" +
                                    std::to_string(d.nz));
}

inline void check_spacing(const Spacing3& s) {
    if (!(s.sx > 0.0) || !(s.sy > 0.0) || !(s.sz > 0.0) || !std::isfinite(s.sx) ||
        !std::isfinite(s.sy) || !std::isfinite(s.sz))
        throw std::invalid_argument("voxel spacing must be strictly positive and finite");
}

inline std::size_t linear_index(const Dims3& d, index_t x, index_t y, index_t z) {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(d.nx) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(z));
}

}  // namespace detail

/// Dense 3D scalar field (probability, intensity, or uncertainty) with
/// geometry. Values are guaranteed finite; constructors reject NaN/Inf.
template <typename T>
class BasicVoxelGrid {
    static_assert(std::is_floating_point_v<T>, "voxel grids hold floating-point scalars");

public:
    using value_type = T;

    BasicVoxelGrid(Dims3 dims, Spacing3 spacing, std::vector<T> data)
        : dims_(dims), spacing_(spacing), data_(std::move(data)) {
        detail::check_dims(dims_);
        detail::check_spacing(spacing_);
        if (data_.size() != dims_.voxel_count())
            throw std::invalid_argument("voxel data length " + std::to_string(data_.size()) +
                                        " does not match dims product " +
                                        std::to_string(dims_.voxel_count()));
        for (T v : data_)
            if (!std::isfinite(v)) throw std::invalid_argument("voxel data contains non-finite values");
    }

    static BasicVoxelGrid filled(Dims3 dims, Spacing3 spacing, T value) {
        detail::check_dims(dims);
        return BasicVoxelGrid(dims, spacing, std::vector<T>(dims.voxel_count(), value));
    }

    [[nodiscard]] const Dims3& dims() const { return dims_; }
    [[nodiscard]] const Spacing3& spacing() const { return spacing_; }
    [[nodiscard]] std::span<const T> data() const { return data_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] T at(index_t x, index_t y, index_t z) const {
        return data_[detail::linear_index(dims_, x, y, z)];
    }

    template <typename U>
    [[nodiscard]] BasicVoxelGrid<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return BasicVoxelGrid<U>(dims_, spacing_, std::move(out));
    }

private:
    Dims3 dims_;
    Spacing3 spacing_;
    std::vector<T> data_;
};

/// Storage type for volumes on disk and MC samples.
using VoxelGrid = BasicVoxelGrid<float>;

/// Dense 3D boolean field. The foreground count is computed once at
/// construction and always matches a recount (data is immutable).
class BinaryMask {
public:
    BinaryMask(Dims3 dims, Spacing3 spacing, std::vector<std::uint8_t> data)
        : dims_(dims), spacing_(spacing), data_(std::move(data)) {
        detail::check_dims(dims_);
        detail::check_spacing(spacing_);
        if (data_.size() != dims_.voxel_count())
            throw std::invalid_argument("mask data length " + std::to_string(data_.size()) +
                                        " does not match dims product " +
                                        std::to_string(dims_.voxel_count()));
        foreground_ = 0;
        for (std::uint8_t v : data_) {
            if (v > 1) throw std::invalid_argument("mask entries must be 0 or 1");
            foreground_ += v;
        }
    }

    static BinaryMask filled(Dims3 dims, Spacing3 spacing, bool value) {
        detail::check_dims(dims);
        return BinaryMask(dims, spacing,
                          std::vector<std::uint8_t>(dims.voxel_count(), value ? 1 : 0));
    }

    [[nodiscard]] const Dims3& dims() const { return dims_; }
    [[nodiscard]] const Spacing3& spacing() const { return spacing_; }
    [[nodiscard]] std::span<const std::uint8_t> data() const { return data_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] std::size_t foreground_count() const { return foreground_; }

    [[nodiscard]] bool at(index_t x, index_t y, index_t z) const {
        return data_[detail::linear_index(dims_, x, y, z)] != 0;
    }

    /// Recount of true entries, for consistency checks against the cache.
    [[nodiscard]] std::size_t recount_foreground() const {
        std::size_t n = 0;
        for (std::uint8_t v : data_) n += v;
        return n;
    }

    /// The mask as a {0,1}-valued probability grid.
    [[nodiscard]] VoxelGrid as_grid() const {
        std::vector<float> vals(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) vals[i] = data_[i] ? 1.0f : 0.0f;
        return VoxelGrid(dims_, spacing_, std::move(vals));
    }

private:
    Dims3 dims_;
    Spacing3 spacing_;
    std::vector<std::uint8_t> data_;
    std::size_t foreground_ = 0;
};

/// The N probability volumes of one case, sharing geometry. N >= 2 and
/// every voxel value lies in [0,1].
class SampleSet {
public:
    SampleSet(std::string case_id, std::vector<VoxelGrid> samples)
        : case_id_(std::move(case_id)), samples_(std::move(samples)) {
        if (samples_.size() < 2)
            throw std::invalid_argument("a sample set needs at least 2 samples, got " +
                                        std::to_string(samples_.size()));
        const Dims3& d = samples_.front().dims();
        const Spacing3& s = samples_.front().spacing();
        for (const VoxelGrid& g : samples_) {
            if (!(g.dims() == d) || !(g.spacing() == s))
                throw std::invalid_argument("samples of case '" + case_id_ +
                                            "' do not share dims/spacing");
            for (float v : g.data())
                if (v < 0.0f || v > 1.0f)
                    throw std::invalid_argument("sample values of case '" + case_id_ +
                                                "' fall outside [0,1]");
        }
    }

    [[nodiscard]] const std::string& case_id() const { return case_id_; }
    [[nodiscard]] std::size_t count() const { return samples_.size(); }
    [[nodiscard]] const VoxelGrid& sample(std::size_t i) const { return samples_.at(i); }
    [[nodiscard]] const std::vector<VoxelGrid>& samples() const { return samples_; }
    [[nodiscard]] const Dims3& dims() const { return samples_.front().dims(); }
    [[nodiscard]] const Spacing3& spacing() const { return samples_.front().spacing(); }

private:
    std::string case_id_;
    std::vector<VoxelGrid> samples_;
};

/// Threshold a probability grid: true iff p(x) >= threshold (closed lower
/// bound). Accepts thresholds in (0,1]; values must lie in [0,1].
template <typename T>
BinaryMask binarize(const BasicVoxelGrid<T>& grid, double threshold) {
    if (!(threshold > 0.0) || !(threshold <= 1.0))
        throw std::invalid_argument("binarize threshold must lie in (0,1], got " +
                                    std::to_string(threshold));
    std::span<const T> src = grid.data();
    std::vector<std::uint8_t> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        const T v = src[i];
        if (v < T(0) || v > T(1))
            throw std::invalid_argument("binarize input must be a probability grid in [0,1]");
        out[i] = static_cast<double>(v) >= threshold ? 1 : 0;
    }
    return BinaryMask(grid.dims(), grid.spacing(), std::move(out));
}

inline std::size_t foreground_count(const BinaryMask& mask) { return mask.foreground_count(); }

/// Dice overlap 2|a&b| / (|a|+|b|). Both masks empty -> 1.0 by convention
/// (agreement on absence); exactly one empty -> 0.0.
inline double dice(const BinaryMask& a, const BinaryMask& b) {
    if (!(a.dims() == b.dims()))
        throw std::invalid_argument("dice requires masks with identical dims");
    const std::size_t total = a.foreground_count() + b.foreground_count();
    if (total == 0) return 1.0;
    std::span<const std::uint8_t> pa = a.data(), pb = b.data();
    std::size_t inter = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) inter += static_cast<std::size_t>(pa[i] & pb[i]);
    return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

/// Tightest axis-aligned box containing all true voxels. Empty masks are an
/// error (no label present).
inline IndexBox bounding_box(const BinaryMask& mask) {
    if (mask.foreground_count() == 0)
        throw std::invalid_argument("bounding_box of an empty mask is undefined");
    const Dims3& d = mask.dims();
    Index3 lo{d.nx, d.ny, d.nz};
    Index3 hi{-1, -1, -1};
    std::span<const std::uint8_t> data = mask.data();
    std::size_t i = 0;
    for (index_t z = 0; z < d.nz; ++z)
        for (index_t y = 0; y < d.ny; ++y)
            for (index_t x = 0; x < d.nx; ++x, ++i) {
                if (!data[i]) continue;
                lo.x = std::min(lo.x, x);
                lo.y = std::min(lo.y, y);
                lo.z = std::min(lo.z, z);
                hi.x = std::max(hi.x, x);
                hi.y = std::max(hi.y, y);
                hi.z = std::max(hi.z, z);
            }
    return {lo, hi};
}

namespace detail {

inline void check_box(const Dims3& d, const IndexBox& box) {
    if (box.lo.x < 0 || box.lo.y < 0 || box.lo.z < 0 || box.hi.x >= d.nx || box.hi.y >= d.ny ||
        box.hi.z >= d.nz || box.lo.x > box.hi.x || box.lo.y > box.hi.y || box.lo.z > box.hi.z)
        throw std::out_of_range("crop box does not lie within the volume dims");
}

template <typename T>
std::vector<T> crop_data(const Dims3& d, std::span<const T> src, const IndexBox& box) {
    const Dims3 e = box.extents();
    std::vector<T> out;
    out.reserve(e.voxel_count());
    for (index_t z = box.lo.z; z <= box.hi.z; ++z)
        for (index_t y = box.lo.y; y <= box.hi.y; ++y) {
            const std::size_t row = linear_index(d, box.lo.x, y, z);
            out.insert(out.end(), src.begin() + row, src.begin() + row + e.nx);
        }
    return out;
}

}  // namespace detail

/// Extract an inclusive index box; spacing is unchanged.
template <typename T>
BasicVoxelGrid<T> crop(const BasicVoxelGrid<T>& grid, const IndexBox& box) {
    detail::check_box(grid.dims(), box);
    return BasicVoxelGrid<T>(box.extents(), grid.spacing(),
                             detail::crop_data<T>(grid.dims(), grid.data(), box));
}

inline BinaryMask crop(const BinaryMask& mask, const IndexBox& box) {
    detail::check_box(mask.dims(), box);
    return BinaryMask(box.extents(), mask.spacing(),
                      detail::crop_data<std::uint8_t>(mask.dims(), mask.data(), box));
}

}  // namespace mcseg
