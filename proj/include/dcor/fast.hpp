#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dcor/common.hpp"
#include "dcor/estimators.hpp"
#include "dcor/sample.hpp"

namespace dcor {

// Samples at or above this length (univariate only) are routed through
// the sorting-based path by default.
inline constexpr std::size_t kFastPathThreshold = 256;

// Scratch state for the n log n statistics. Buffers are sized for one n
// and reused across calls of the same n; a workspace must not be shared
// by concurrent calls.
struct SortedWorkspace {
    std::size_t n = 0;
    std::vector<std::uint32_t> order;    // permutation of 0..n-1, by x
    std::vector<std::uint32_t> yrank;    // y tie-aware ranks, aligned to `order`
    std::vector<double> xs, ys;          // values in x-sorted order
    std::vector<double> sorted;          // generic sort buffer
    std::vector<double> prefix;          // cumulative sums, length n + 1
    std::vector<double> row_a, row_b;    // distance-row sums, original index order
    // Fenwick trees over y ranks: count, sum x, sum y, sum xy.
    std::vector<double> fen_cnt, fen_x, fen_y, fen_xy;

    void prepare(std::size_t size) {
        if (n == size) return;
        n = size;
        order.resize(n);
        yrank.resize(n);
        xs.resize(n);
        ys.resize(n);
        sorted.resize(n);
        prefix.resize(n + 1);
        row_a.resize(n);
        row_b.resize(n);
        fen_cnt.resize(n + 1);
        fen_x.resize(n + 1);
        fen_y.resize(n + 1);
        fen_xy.resize(n + 1);
    }
};

namespace detail {

// Row sums of the 1-D distance matrix, sum_j |v_i - v_j|, in O(n log n)
// via one sort and prefix sums.
inline void distance_row_sums(const std::vector<double>& v, SortedWorkspace& ws,
                              std::vector<double>& out) {
    const std::size_t n = v.size();
    ws.sorted.assign(v.begin(), v.end());
    std::sort(ws.sorted.begin(), ws.sorted.end());
    ws.prefix[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) ws.prefix[i + 1] = ws.prefix[i] + ws.sorted[i];
    const double total = ws.prefix[n];
    for (std::size_t i = 0; i < n; ++i) {
        // lo counts values strictly below v[i], hi counts values <= v[i];
        // the tied run in between contributes zero distance
        const auto lo = static_cast<std::size_t>(
            std::lower_bound(ws.sorted.begin(), ws.sorted.end(), v[i]) -
            ws.sorted.begin());
        const auto hi = static_cast<std::size_t>(
            std::upper_bound(ws.sorted.begin(), ws.sorted.end(), v[i]) -
            ws.sorted.begin());
        const double below_sum = ws.prefix[lo];
        const double above_sum = total - ws.prefix[hi];
        out[i] = (static_cast<double>(lo) * v[i] - below_sum) +
                 (above_sum - static_cast<double>(n - hi) * v[i]);
    }
}

inline int fen_lsb(int i) { return i & (-i); }

// sum_{i<j} |x_i - x_j||y_i - y_j| via a Fenwick-tree dominance pass over
// the x-sorted sequence.
inline long double abs_product_sum(SortedWorkspace& ws) {
    const std::size_t n = ws.n;
    const int m = static_cast<int>(n);
    std::fill(ws.fen_cnt.begin(), ws.fen_cnt.end(), 0.0);
    std::fill(ws.fen_x.begin(), ws.fen_x.end(), 0.0);
    std::fill(ws.fen_y.begin(), ws.fen_y.end(), 0.0);
    std::fill(ws.fen_xy.begin(), ws.fen_xy.end(), 0.0);

    auto update = [&](int pos, double xv, double yv) {
        for (int i = pos; i <= m; i += fen_lsb(i)) {
            ws.fen_cnt[i] += 1.0;
            ws.fen_x[i] += xv;
            ws.fen_y[i] += yv;
            ws.fen_xy[i] += xv * yv;
        }
    };
    struct Sums {
        double cnt = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
    };
    auto query = [&](int pos) {
        Sums s;
        for (int i = pos; i > 0; i -= fen_lsb(i)) {
            s.cnt += ws.fen_cnt[i];
            s.sx += ws.fen_x[i];
            s.sy += ws.fen_y[i];
            s.sxy += ws.fen_xy[i];
        }
        return s;
    };

    long double acc = 0.0L;
    double tot_cnt = 0.0, tot_x = 0.0, tot_y = 0.0, tot_xy = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const double xl = ws.xs[l], yl = ws.ys[l];
        const Sums le = query(static_cast<int>(ws.yrank[l]));
        const double gt_cnt = tot_cnt - le.cnt;
        const double gt_x = tot_x - le.sx;
        const double gt_y = tot_y - le.sy;
        const double gt_xy = tot_xy - le.sxy;
        // previous points with y_k <= y_l contribute (x_l-x_k)(y_l-y_k),
        // the rest contribute the negated product
        const double below = xl * yl * le.cnt - xl * le.sy - yl * le.sx + le.sxy;
        const double above = xl * yl * gt_cnt - xl * gt_y - yl * gt_x + gt_xy;
        acc += static_cast<long double>(below) - static_cast<long double>(above);
        update(static_cast<int>(ws.yrank[l]), xl, yl);
        tot_cnt += 1.0;
        tot_x += xl;
        tot_y += yl;
        tot_xy += xl * yl;
    }
    return acc;
}

// Sort by (a, b) and run the dominance pass; returns sum_{i<j} |da||db|.
// All three power sums of a sample pair go through this same routine so
// that perfectly dependent data yields bit-identical sums.
inline long double pair_abs_sum(const std::vector<double>& a,
                                const std::vector<double>& b,
                                SortedWorkspace& ws) {
    const std::size_t n = a.size();
    std::iota(ws.order.begin(), ws.order.end(), 0u);
    std::sort(ws.order.begin(), ws.order.end(), [&](std::uint32_t i, std::uint32_t j) {
        if (a[i] != a[j]) return a[i] < a[j];
        if (b[i] != b[j]) return b[i] < b[j];
        return i < j;
    });
    for (std::size_t i = 0; i < n; ++i) {
        ws.xs[i] = a[ws.order[i]];
        ws.ys[i] = b[ws.order[i]];
    }
    // tie-aware b ranks in 1..n over the a-sorted values
    ws.sorted.assign(ws.ys.begin(), ws.ys.end());
    std::sort(ws.sorted.begin(), ws.sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
        ws.yrank[i] = static_cast<std::uint32_t>(
            std::lower_bound(ws.sorted.begin(), ws.sorted.end(), ws.ys[i]) -
            ws.sorted.begin() + 1);
    }
    return abs_product_sum(ws);
}

// Full bundle for univariate data in O(n log n) time and O(n) memory.
inline StatBundle fast_stats_1d(const std::vector<double>& x,
                                const std::vector<double>& y,
                                SortedWorkspace& ws) {
    const std::size_t n = x.size();
    require(n >= 2 && y.size() == n, "need matching vectors with n >= 2");
    require_finite(x, "x");
    require_finite(y, "y");
    ws.prepare(n);

    PowerSums ps;
    ps.p1 = 2.0L * pair_abs_sum(x, y, ws);
    ps.p1_xx = 2.0L * pair_abs_sum(x, x, ws);
    ps.p1_yy = 2.0L * pair_abs_sum(y, y, ws);

    distance_row_sums(x, ws, ws.row_a);
    distance_row_sums(y, ws, ws.row_b);
    for (std::size_t i = 0; i < n; ++i) {
        ps.p2 += static_cast<long double>(ws.row_a[i]) * ws.row_b[i];
        ps.p2_xx += static_cast<long double>(ws.row_a[i]) * ws.row_a[i];
        ps.p2_yy += static_cast<long double>(ws.row_b[i]) * ws.row_b[i];
        ps.total_a += ws.row_a[i];
        ps.total_b += ws.row_b[i];
    }
    add_diagonal_products(ps, ws.row_a, ws.row_b, n);
    return bundle_from_power_sums(ps, n);
}

}  // namespace detail

// Squared-distance-covariance U-statistic of two univariate samples,
// equal to ucov2 over the U-centered matrices but computed without any
// n x n matrix.
inline double fast_ucov2_1d(const std::vector<double>& x, const std::vector<double>& y,
                            SortedWorkspace& ws) {
    if (x.size() < 4) throw sample_too_small("fast_ucov2_1d requires n >= 4");
    return detail::fast_stats_1d(x, y, ws).uxy;
}

// V-statistic counterpart (classic centering, the form with a fast
// algorithm).
inline double fast_dcov2_v_1d(const std::vector<double>& x,
                              const std::vector<double>& y, SortedWorkspace& ws) {
    return detail::fast_stats_1d(x, y, ws).vxy_classic;
}

enum class ComputePath { Naive, Fast };
enum class PathChoice { Auto, ForceNaive, ForceFast };

inline ComputePath choose_path(const PairedSample& s, std::size_t threshold,
                               PathChoice choice = PathChoice::Auto) {
    if (choice == PathChoice::ForceNaive) return ComputePath::Naive;
    if (choice == PathChoice::ForceFast) {
        require(s.univariate(), "fast path requires univariate data");
        return ComputePath::Fast;
    }
    return (s.univariate() && s.n >= threshold) ? ComputePath::Fast
                                                : ComputePath::Naive;
}

namespace detail {

inline StatBundle compute_stats(const PairedSample& s, ComputePath path,
                                StatWorkspace& mw, SortedWorkspace& sw) {
    if (path == ComputePath::Fast) return fast_stats_1d(s.xs, s.ys, sw);
    if (s.univariate()) return quadratic_stats_1d(s.xs, s.ys);
    return matrix_stats(s, mw);
}

inline StatBundle compute_stats_auto(const PairedSample& s, StatWorkspace& mw,
                                     SortedWorkspace& sw,
                                     std::size_t threshold = kFastPathThreshold,
                                     PathChoice choice = PathChoice::Auto) {
    return compute_stats(s, choose_path(s, threshold, choice), mw, sw);
}

}  // namespace detail

// Dispatching front end: univariate samples of at least `threshold`
// points go through the sorting-based path, everything else through the
// quadratic reference path. Results agree to well below 1e-9.
inline DcorEstimate dcor_auto(const PairedSample& s, Variant variant,
                              Centering v_mode = Centering::VClassic,
                              std::size_t threshold = kFastPathThreshold,
                              PathChoice choice = PathChoice::Auto) {
    detail::StatWorkspace mw;
    SortedWorkspace sw;
    if (variant == Variant::V) {
        if (s.n < 2) throw sample_too_small("dCorV requires n >= 2");
        const auto b = detail::compute_stats_auto(s, mw, sw, threshold, choice);
        return detail::estimate_v(b, v_mode);
    }
    require(variant != Variant::Combo, "dcor_auto handles point estimators only");
    if (s.n < 4) throw sample_too_small("U-statistic estimators require n >= 4");
    const auto b = detail::compute_stats_auto(s, mw, sw, threshold, choice);
    const UPolicy policy = variant == Variant::USigned ? UPolicy::Signed
                           : variant == Variant::UAbs ? UPolicy::Abs
                                                      : UPolicy::Trunc;
    return detail::estimate_u(b, policy);
}

}  // namespace dcor
