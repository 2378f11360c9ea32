#pragma once

// Spearman rank correlation with two-sided p-values.
//
// Ranks use average-rank tie handling. Doubled ranks are exact integers, so
// rho is accumulated in integer arithmetic and rounded once at the final
// division. The p-value uses the t-statistic with n-2 degrees of freedom,
// evaluated through the regularized incomplete beta function. An exact
// permutation p-value is available for n <= 10 as a verification mode.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcseg/uncertainty.hpp"

namespace mcseg {

class UndefinedCorrelationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CorrelationResult {
    std::string measure;
    std::string quality;
    double rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::size_t dropped = 0;
};

namespace detail {

// Average ranks scaled by 2 so ties like 2.5 stay exact integers.
inline std::vector<std::int64_t> doubled_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::int64_t> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share the doubled average rank i+j+2
        const std::int64_t r2 = static_cast<std::int64_t>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r2;
        i = j + 1;
    }
    return ranks;
}

// Continued fraction for the incomplete beta function, modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps) break;
    }
    return h;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

struct RhoTerms {
    __int128 num = 0;  // sum of centered doubled-rank products
    __int128 dx = 0;   // sum of squared centered doubled x ranks
    __int128 dy = 0;
};

inline RhoTerms rho_terms(const std::vector<std::int64_t>& rx,
                          const std::vector<std::int64_t>& ry) {
    const std::int64_t n = static_cast<std::int64_t>(rx.size());
    const std::int64_t mean2 = n + 1;  // doubled ranks always average to n+1
    RhoTerms t;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t a = rx[i] - mean2;
        const std::int64_t b = ry[i] - mean2;
        t.num += static_cast<__int128>(a) * b;
        t.dx += static_cast<__int128>(a) * a;
        t.dy += static_cast<__int128>(b) * b;
    }
    return t;
}

inline double rho_from_terms(const RhoTerms& t) {
    if (t.dx == 0 || t.dy == 0)
        throw UndefinedCorrelationError("undefined correlation: zero rank variance (all values tied)");
    if (t.dx == t.dy)
        return static_cast<double>(t.num) / static_cast<double>(t.dx);
    const double den = std::sqrt(static_cast<double>(t.dx) * static_cast<double>(t.dy));
    double rho = static_cast<double>(t.num) / den;
    return std::clamp(rho, -1.0, 1.0);
}

}  // namespace detail

/// Two-sided p-value of a Spearman rho under the t-approximation with n-2
/// degrees of freedom. Saturated rho (|rho| = 1) reports 0.
inline double spearman_p_value(double rho, std::size_t n) {
    if (n < 3) throw UndefinedCorrelationError("p-value needs n >= 3");
    if (std::fabs(rho) >= 1.0) return 0.0;
    const double nu = static_cast<double>(n - 2);
    const double t2 = rho * rho * nu / (1.0 - rho * rho);
    // 2 * (1 - F_t(|t|)) = I_x(nu/2, 1/2) with x = nu / (nu + t^2)
    const double x = nu / (nu + t2);
    const double p = detail::regularized_incomplete_beta(nu / 2.0, 0.5, x);
    return std::clamp(p, 0.0, 1.0);
}

/// Spearman rank correlation of two equal-length vectors (no missing-value
/// handling here; see correlate_pairs for that).
inline CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y,
                                  std::string measure = "x", std::string quality = "y") {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 3) throw UndefinedCorrelationError("spearman needs n >= 3 pairs");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("spearman: non-finite x value");
    for (double v : y)
        if (!std::isfinite(v)) throw std::invalid_argument("spearman: non-finite y value");

    const auto rx = detail::doubled_ranks(x);
    const auto ry = detail::doubled_ranks(y);
    const auto terms = detail::rho_terms(rx, ry);
    CorrelationResult r;
    r.measure = std::move(measure);
    r.quality = std::move(quality);
    r.n = x.size();
    r.rho = detail::rho_from_terms(terms);
    r.p_value = spearman_p_value(r.rho, r.n);
    return r;
}

/// Exact two-sided permutation p-value: the fraction of the n! orderings of
/// y whose |rho| is at least the observed |rho|. Verification mode, n <= 10.
inline double spearman_exact_permutation_p(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("permutation test: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw UndefinedCorrelationError("permutation test needs n >= 3 pairs");
    if (n > 10) throw std::invalid_argument("permutation test supports n <= 10 only");

    const auto rx = detail::doubled_ranks(x);
    const auto ry = detail::doubled_ranks(y);
    {
        const auto t = detail::rho_terms(rx, ry);
        if (t.dx == 0 || t.dy == 0)
            throw UndefinedCorrelationError(
                "undefined correlation: zero rank variance (all values tied)");
    }
    // Denominator is permutation-invariant (the rank multiset is fixed), so
    // |rho_perm| >= |rho_obs| reduces to an exact integer comparison of the
    // centered products.
    const std::int64_t mean2 = static_cast<std::int64_t>(n) + 1;
    std::vector<std::int64_t> ax(n), by(n);
    for (std::size_t i = 0; i < n; ++i) {
        ax[i] = rx[i] - mean2;
        by[i] = ry[i] - mean2;
    }
    __int128 observed = 0;
    for (std::size_t i = 0; i < n; ++i) observed += static_cast<__int128>(ax[i]) * by[i];
    const __int128 observed_abs = observed < 0 ? -observed : observed;

    std::vector<std::int64_t> perm = by;
    std::sort(perm.begin(), perm.end());
    std::uint64_t total = 0;
    std::uint64_t hits = 0;
    do {
        __int128 num = 0;
        for (std::size_t i = 0; i < n; ++i) num += static_cast<__int128>(ax[i]) * perm[i];
        if (num < 0) num = -num;
        if (num >= observed_abs) ++hits;
        ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    // duplicate rank values collapse permutations; the ratio is unaffected
    return static_cast<double>(hits) / static_cast<double>(total);
}

/// Spearman over paired optionals: pairs with any missing member are dropped
/// first and the dropped count is reported.
inline CorrelationResult correlate_pairs(const std::vector<std::optional<double>>& x,
                                         const std::vector<std::optional<double>>& y,
                                         std::string measure, std::string quality) {
    if (x.size() != y.size()) throw std::invalid_argument("correlate_pairs: length mismatch");
    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(x.size());
    ys.reserve(y.size());
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].has_value() && y[i].has_value()) {
            xs.push_back(*x[i]);
            ys.push_back(*y[i]);
        } else {
            ++dropped;
        }
    }
    if (xs.size() < 3)
        throw UndefinedCorrelationError("fewer than 3 usable pairs for '" + measure +
                                        "' after dropping " + std::to_string(dropped));
    CorrelationResult r = spearman(xs, ys, std::move(measure), std::move(quality));
    r.dropped = dropped;
    return r;
}

/// One row per uncertainty measure against dice_vs_gt. Reports without dice
/// are dropped for every row; undefined u_labelled drops pairwise.
inline std::vector<CorrelationResult> correlation_table(const std::vector<CaseReport>& reports) {
    std::vector<std::optional<double>> cv, d_pw, u_lab, dice;
    cv.reserve(reports.size());
    d_pw.reserve(reports.size());
    u_lab.reserve(reports.size());
    dice.reserve(reports.size());
    for (const CaseReport& r : reports) {
        cv.push_back(r.cv);
        d_pw.push_back(r.d_pw);
        u_lab.push_back(r.u_labelled);
        dice.push_back(r.dice_vs_gt);
    }
    std::vector<CorrelationResult> table;
    table.push_back(correlate_pairs(cv, dice, "cv", "dice"));
    table.push_back(correlate_pairs(d_pw, dice, "d_pw", "dice"));
    table.push_back(correlate_pairs(u_lab, dice, "u_labelled", "dice"));
    return table;
}

}  // namespace mcseg
