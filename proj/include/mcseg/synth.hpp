#pragma once

// Synthetic phantoms and simulated MC dropout sample sets with controllable
// disagreement. Everything is a pure function of its spec and seed.
//
// Random numbers come from SplitMix64 with an explicit Box-Muller transform,
// so cohorts are bit-reproducible across platforms and standard library
// versions (std distributions are not portable).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcseg/parallel.hpp"
#include "mcseg/volume.hpp"

namespace mcseg {

namespace rng {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller (one value per draw).
    double next_normal() {
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t state_;
};

/// Independent stream seed from a base seed and up to two stream indices.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    SplitMix64 g(base ^ (a * 0xD6E8FEB86659FD93ULL) ^ (b * 0xA3B195354A39B70DULL));
    g.next_u64();
    return g.next_u64();
}

}  // namespace rng

enum class PhantomKind { sphere, ellipsoid, two_blob };

inline std::string to_string(PhantomKind k) {
    switch (k) {
        case PhantomKind::sphere: return "sphere";
        case PhantomKind::ellipsoid: return "ellipsoid";
        case PhantomKind::two_blob: return "two-blob";
    }
    return "sphere";
}

inline PhantomKind phantom_kind_from_string(const std::string& s) {
    if (s == "sphere") return PhantomKind::sphere;
    if (s == "ellipsoid") return PhantomKind::ellipsoid;
    if (s == "two-blob") return PhantomKind::two_blob;
    throw std::invalid_argument("unknown phantom kind '" + s + "' (sphere|ellipsoid|two-blob)");
}

/// Analytic shape description in voxel coordinates.
struct PhantomSpec {
    Dims3 dims{};
    Spacing3 spacing{1.0, 1.0, 1.0};
    PhantomKind kind = PhantomKind::sphere;
    std::array<double, 3> center{};
    std::array<double, 3> radii{};  // sphere/two-blob use radii[0]
    std::array<double, 3> center2{};
    double radius2 = 0.0;
    std::uint64_t seed = 0;
};

struct NoiseSpec {
    double boundary_sigma = 0.0;
    double flip_rate = 0.0;
    double prob_softness = 0.0;
};

namespace detail {

inline void check_sphere_bounds(const Dims3& dims, const std::array<double, 3>& c, double r,
                                const char* what) {
    const double n[3] = {static_cast<double>(dims.nx), static_cast<double>(dims.ny),
                         static_cast<double>(dims.nz)};
    for (int d = 0; d < 3; ++d) {
        if (!(c[d] - r >= 1.0) || !(c[d] + r <= n[d] - 2.0))
            throw std::invalid_argument(std::string(what) +
                                        " does not fit inside dims with a 1 voxel margin");
    }
}

}  // namespace detail

inline void validate(const PhantomSpec& spec) {
    detail::check_dims(spec.dims);
    detail::check_spacing(spec.spacing);
    switch (spec.kind) {
        case PhantomKind::sphere:
            if (!(spec.radii[0] > 0.0)) throw std::invalid_argument("sphere radius must be > 0");
            detail::check_sphere_bounds(spec.dims, spec.center, spec.radii[0], "sphere");
            break;
        case PhantomKind::ellipsoid:
            for (double r : spec.radii)
                if (!(r > 0.0)) throw std::invalid_argument("ellipsoid radii must be > 0");
            for (int d = 0; d < 3; ++d) {
                const double n = static_cast<double>(d == 0   ? spec.dims.nx
                                                     : d == 1 ? spec.dims.ny
                                                              : spec.dims.nz);
                if (!(spec.center[d] - spec.radii[d] >= 1.0) ||
                    !(spec.center[d] + spec.radii[d] <= n - 2.0))
                    throw std::invalid_argument(
                        "ellipsoid does not fit inside dims with a 1 voxel margin");
            }
            break;
        case PhantomKind::two_blob:
            if (!(spec.radii[0] > 0.0) || !(spec.radius2 > 0.0))
                throw std::invalid_argument("two-blob radii must be > 0");
            detail::check_sphere_bounds(spec.dims, spec.center, spec.radii[0], "first blob");
            detail::check_sphere_bounds(spec.dims, spec.center2, spec.radius2, "second blob");
            break;
    }
}

inline void validate(const NoiseSpec& noise) {
    if (!(noise.boundary_sigma >= 0.0) || !std::isfinite(noise.boundary_sigma))
        throw std::invalid_argument("boundary_sigma must be >= 0");
    if (!(noise.flip_rate >= 0.0) || !(noise.flip_rate < 0.5))
        throw std::invalid_argument("flip_rate must be in [0, 0.5)");
    if (!(noise.prob_softness >= 0.0) || !std::isfinite(noise.prob_softness))
        throw std::invalid_argument("prob_softness must be >= 0");
}

namespace detail {

/// Signed distance in voxel units, positive inside. The ellipsoid value is
/// the scaled pseudo-distance (exact sign, approximate magnitude near the
/// boundary), which is all the noise model needs.
inline double signed_distance(const PhantomSpec& spec, double x, double y, double z) {
    const double dx = x - spec.center[0];
    const double dy = y - spec.center[1];
    const double dz = z - spec.center[2];
    switch (spec.kind) {
        case PhantomKind::sphere:
            return spec.radii[0] - std::sqrt(dx * dx + dy * dy + dz * dz);
        case PhantomKind::ellipsoid: {
            const double qx = dx / spec.radii[0];
            const double qy = dy / spec.radii[1];
            const double qz = dz / spec.radii[2];
            const double q = std::sqrt(qx * qx + qy * qy + qz * qz);
            const double rmin = std::min({spec.radii[0], spec.radii[1], spec.radii[2]});
            return (1.0 - q) * rmin;
        }
        case PhantomKind::two_blob: {
            const double d1 = spec.radii[0] - std::sqrt(dx * dx + dy * dy + dz * dz);
            const double ex = x - spec.center2[0];
            const double ey = y - spec.center2[1];
            const double ez = z - spec.center2[2];
            const double d2 = spec.radius2 - std::sqrt(ex * ex + ey * ey + ez * ez);
            return std::max(d1, d2);
        }
    }
    return -1.0;
}

constexpr index_t kLatticeSpacing = 8;

/// Smooth N(0,1)-amplitude field: Gaussian lattice every 8 voxels, trilinear
/// in between. Spatially correlated, so it shifts the boundary coherently.
struct NoiseField {
    index_t nx = 0, ny = 0, nz = 0;  // lattice dims
    std::vector<float> values;

    static NoiseField make(const Dims3& dims, std::uint64_t seed) {
        NoiseField f;
        f.nx = (dims.nx - 1) / kLatticeSpacing + 2;
        f.ny = (dims.ny - 1) / kLatticeSpacing + 2;
        f.nz = (dims.nz - 1) / kLatticeSpacing + 2;
        f.values.resize(static_cast<std::size_t>(f.nx) * f.ny * f.nz);
        rng::SplitMix64 g(seed);
        for (float& v : f.values) v = static_cast<float>(g.next_normal());
        return f;
    }

    double at(double x, double y, double z) const {
        const double u = x / kLatticeSpacing;
        const double v = y / kLatticeSpacing;
        const double w = z / kLatticeSpacing;
        const index_t i0 = static_cast<index_t>(u);
        const index_t j0 = static_cast<index_t>(v);
        const index_t k0 = static_cast<index_t>(w);
        const double fu = u - static_cast<double>(i0);
        const double fv = v - static_cast<double>(j0);
        const double fw = w - static_cast<double>(k0);
        auto val = [&](index_t i, index_t j, index_t k) {
            return static_cast<double>(
                values[static_cast<std::size_t>(i + nx * (j + ny * k))]);
        };
        const double c00 = val(i0, j0, k0) + fu * (val(i0 + 1, j0, k0) - val(i0, j0, k0));
        const double c10 = val(i0, j0 + 1, k0) + fu * (val(i0 + 1, j0 + 1, k0) - val(i0, j0 + 1, k0));
        const double c01 = val(i0, j0, k0 + 1) + fu * (val(i0 + 1, j0, k0 + 1) - val(i0, j0, k0 + 1));
        const double c11 =
            val(i0, j0 + 1, k0 + 1) + fu * (val(i0 + 1, j0 + 1, k0 + 1) - val(i0, j0 + 1, k0 + 1));
        const double c0 = c00 + fv * (c10 - c00);
        const double c1 = c01 + fv * (c11 - c01);
        return c0 + fw * (c1 - c0);
    }
};

inline float probability_from_distance(double d, double softness) {
    if (softness <= 0.0) return d > 0.0 ? 1.0f : 0.0f;
    return static_cast<float>(1.0 / (1.0 + std::exp(-d / softness)));
}

}  // namespace detail

/// Voxel centers strictly inside the analytic shape.
inline BinaryMask make_phantom(const PhantomSpec& spec) {
    validate(spec);
    std::vector<std::uint8_t> data(spec.dims.voxel_count());
    std::size_t idx = 0;
    for (index_t z = 0; z < spec.dims.nz; ++z)
        for (index_t y = 0; y < spec.dims.ny; ++y)
            for (index_t x = 0; x < spec.dims.nx; ++x, ++idx)
                data[idx] = detail::signed_distance(spec, static_cast<double>(x),
                                                    static_cast<double>(y),
                                                    static_cast<double>(z)) > 0.0
                                ? 1
                                : 0;
    return BinaryMask(spec.dims, spec.spacing, std::move(data));
}

/// One probability volume: boundary perturbed by a smooth random field of
/// amplitude boundary_sigma, signed distance mapped through a logistic of
/// width prob_softness, then symmetric flips p -> 1-p at flip_rate.
inline VoxelGrid simulate_sample(const PhantomSpec& spec, const NoiseSpec& noise,
                                 std::size_t sample_index) {
    validate(spec);
    validate(noise);
    const Dims3 dims = spec.dims;
    std::vector<float> data(dims.voxel_count());

    const bool perturb = noise.boundary_sigma > 0.0;
    detail::NoiseField field;
    if (perturb)
        field = detail::NoiseField::make(dims, rng::derive_seed(spec.seed, 0xB0B0, sample_index));

    std::size_t idx = 0;
    for (index_t z = 0; z < dims.nz; ++z)
        for (index_t y = 0; y < dims.ny; ++y)
            for (index_t x = 0; x < dims.nx; ++x, ++idx) {
                const double xd = static_cast<double>(x);
                const double yd = static_cast<double>(y);
                const double zd = static_cast<double>(z);
                double d = detail::signed_distance(spec, xd, yd, zd);
                if (perturb) d += noise.boundary_sigma * field.at(xd, yd, zd);
                data[idx] = detail::probability_from_distance(d, noise.prob_softness);
            }

    if (noise.flip_rate > 0.0) {
        rng::SplitMix64 g(rng::derive_seed(spec.seed, 0xF11B, sample_index));
        for (float& p : data)
            if (g.next_double() < noise.flip_rate) p = 1.0f - p;
    }
    return VoxelGrid(dims, spec.spacing, std::move(data));
}

/// N independent draws; deterministic given (spec.seed, noise, sample index),
/// so sample i does not depend on n.
inline SampleSet simulate_samples(const PhantomSpec& spec, const NoiseSpec& noise, std::size_t n,
                                  std::string case_id = "synthetic", int jobs = 1) {
    if (n < 2) throw std::invalid_argument("simulate_samples needs n >= 2");
    validate(spec);
    validate(noise);
    std::vector<VoxelGrid> grids(n, VoxelGrid::filled(Dims3{1, 1, 1}, Spacing3{}, 0.0f));
    detail::parallel_chunks(n, jobs <= 1 ? 1 : jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) grids[i] = simulate_sample(spec, noise, i);
    });
    return SampleSet(std::move(case_id), std::move(grids));
}

/// One synthetic case: samples are simulated from a systematically perturbed
/// copy of the ground-truth phantom, emulating a model whose prediction is
/// biased as well as noisy. Without the bias, averaging N samples would wash
/// out the per-sample noise and every consensus would score a near-perfect
/// dice regardless of noise level.
struct CohortCaseSpec {
    std::string case_id;
    PhantomSpec ground_truth;
    PhantomSpec prediction;
    NoiseSpec noise;
    std::size_t n_samples = 10;
};

struct SynthCase {
    CohortCaseSpec spec;
    SampleSet samples;
    BinaryMask ground_truth;
};

/// Five noise levels of increasing severity; softness and flip rate grow
/// with boundary_sigma so every measure (not just D_pw) tracks the level.
inline std::vector<NoiseSpec> default_noise_grid(double scale = 1.0) {
    if (!(scale > 0.0)) throw std::invalid_argument("noise scale must be > 0");
    const double sigmas[5] = {0.0, 0.5, 1.0, 2.0, 4.0};
    std::vector<NoiseSpec> grid;
    grid.reserve(5);
    for (double s : sigmas) {
        NoiseSpec n;
        n.boundary_sigma = s * scale;
        n.prob_softness = 0.5 + 0.5 * n.boundary_sigma;
        n.flip_rate = std::min(0.02 * n.boundary_sigma, 0.4);
        grid.push_back(n);
    }
    return grid;
}

/// Case specs spanning the noise grid. Case k uses grid[k mod levels] with a
/// per-case severity multiplier in [0.6, 1.4], which both spreads dice within
/// a level and couples the case's D_pw to its dice.
inline std::vector<CohortCaseSpec> make_cohort_specs(std::size_t n_cases,
                                                     const std::vector<NoiseSpec>& noise_grid,
                                                     const Dims3& dims, std::uint64_t base_seed,
                                                     std::size_t n_samples = 10) {
    if (n_cases < 3) throw std::invalid_argument("make_cohort needs n_cases >= 3");
    if (noise_grid.empty()) throw std::invalid_argument("noise grid must not be empty");
    for (const NoiseSpec& n : noise_grid) validate(n);
    detail::check_dims(dims);

    const double nx = static_cast<double>(dims.nx);
    const double ny = static_cast<double>(dims.ny);
    const double nz = static_cast<double>(dims.nz);
    const double min_half = 0.5 * std::min({nx, ny, nz});
    if (min_half < 5.0)
        throw std::invalid_argument("cohort dims too small, need at least 10 voxels per axis");
    const double jitter = std::min(2.0, 0.05 * min_half);
    // headroom: worst case is jitter + 1.15x radius grown by the prediction
    // bias (radius factor <= 1.25, shift <= 0.5 radius)
    const double base_radius = 0.44 * (min_half - 2.0 - jitter);

    std::vector<CohortCaseSpec> specs;
    specs.reserve(n_cases);
    for (std::size_t k = 0; k < n_cases; ++k) {
        rng::SplitMix64 g(rng::derive_seed(base_seed, 0xCA5E, k));
        const NoiseSpec& level = noise_grid[k % noise_grid.size()];
        const double severity = g.next_uniform(0.6, 1.4);

        CohortCaseSpec c;
        std::string num = std::to_string(k);
        c.case_id = "case_" + std::string(num.size() < 3 ? 3 - num.size() : 0, '0') + num;
        c.n_samples = n_samples;
        c.noise = level;
        c.noise.boundary_sigma *= severity;
        c.noise.prob_softness = 0.5 + 0.5 * c.noise.boundary_sigma;
        c.noise.flip_rate = std::min(level.flip_rate * severity, 0.45);

        PhantomSpec gt;
        gt.dims = dims;
        gt.kind = PhantomKind::sphere;
        gt.seed = rng::derive_seed(base_seed, 0x6071, k);
        gt.center = {nx / 2.0 + g.next_uniform(-jitter, jitter),
                     ny / 2.0 + g.next_uniform(-jitter, jitter),
                     nz / 2.0 + g.next_uniform(-jitter, jitter)};
        gt.radii = {base_radius * g.next_uniform(0.85, 1.15), 0.0, 0.0};
        c.ground_truth = gt;

        // systematic prediction bias proportional to the case's severity,
        // capped relative to the radius so small phantoms stay in bounds
        const double sigma_eff = c.noise.boundary_sigma;
        const double shift = std::min(0.9 * sigma_eff, 0.5 * gt.radii[0]);
        const double theta = g.next_uniform(0.0, 2.0 * 3.14159265358979323846);
        const double cosphi = g.next_uniform(-1.0, 1.0);
        const double sinphi = std::sqrt(std::max(0.0, 1.0 - cosphi * cosphi));
        PhantomSpec pred = gt;
        pred.seed = rng::derive_seed(base_seed, 0x9ED0, k);
        pred.center[0] += shift * sinphi * std::cos(theta);
        pred.center[1] += shift * sinphi * std::sin(theta);
        pred.center[2] += shift * cosphi;
        const double radius_factor = std::clamp(
            std::exp(0.06 * sigma_eff * g.next_uniform(-1.0, 1.0) - 0.03 * sigma_eff), 0.8, 1.25);
        pred.radii[0] *= radius_factor;
        c.prediction = pred;
        specs.push_back(std::move(c));
    }
    return specs;
}

inline SynthCase realize_case(const CohortCaseSpec& spec, int jobs = 1) {
    SampleSet samples = simulate_samples(spec.prediction, spec.noise, spec.n_samples,
                                         spec.case_id, jobs);
    BinaryMask gt = make_phantom(spec.ground_truth);
    return SynthCase{spec, std::move(samples), std::move(gt)};
}

/// Materialized cohort. For big cohorts prefer make_cohort_specs plus
/// realize_case one case at a time.
inline std::vector<SynthCase> make_cohort(std::size_t n_cases,
                                          const std::vector<NoiseSpec>& noise_grid,
                                          const Dims3& dims, std::uint64_t base_seed,
                                          std::size_t n_samples = 10, int jobs = 1) {
    const auto specs = make_cohort_specs(n_cases, noise_grid, dims, base_seed, n_samples);
    std::vector<SynthCase> cases;
    cases.reserve(specs.size());
    for (const auto& s : specs) cases.push_back(realize_case(s, jobs));
    return cases;
}

}  // namespace mcseg
