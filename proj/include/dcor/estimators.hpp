#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dcor/centering.hpp"
#include "dcor/common.hpp"
#include "dcor/distance.hpp"
#include "dcor/sample.hpp"

namespace dcor {

// How negative values of the squared U-statistic are mapped into a
// correlation estimate.
enum class UPolicy { Signed, Abs, Trunc };

enum class Variant { V, USigned, UAbs, UTrunc, Combo };

struct DcorEstimate {
    double value = 0.0;
    Variant variant = Variant::V;
    double cov2_xy = 0.0;  // signed squared distance covariance
    double var2_x = 0.0;
    double var2_y = 0.0;
    bool was_negative = false;  // cov2_xy < 0
    bool degenerate = false;    // zero-variance branch was taken
};

// (1/n^2) sum_{k,l} A_kl B_kl, Eq.-(4)-style inner product of two
// V-centered matrices.
inline double dcov2_v(const CenteredMatrix& A, const CenteredMatrix& B) {
    require(A.kind != Centering::U && B.kind != Centering::U,
            "dcov2_v expects V-centered matrices");
    require(A.kind == B.kind, "dcov2_v requires matching centering modes");
    require(A.n == B.n, "dcov2_v requires matrices of equal size");
    const std::size_t n = A.n;
    long double s = 0.0L;
    for (std::size_t i = 0; i < n * n; ++i)
        s += static_cast<long double>(A.m.data[i]) * B.m.data[i];
    return static_cast<double>(s / (static_cast<long double>(n) * n));
}

// Unbiased squared-distance-covariance inner product of two U-centered
// matrices, normalized by n(n-3). May be negative.
inline double ucov2(const CenteredMatrix& A, const CenteredMatrix& B) {
    require(A.kind == Centering::U && B.kind == Centering::U,
            "ucov2 expects U-centered matrices");
    require(A.n == B.n, "ucov2 requires matrices of equal size");
    const std::size_t n = A.n;
    if (n < 4)
        throw sample_too_small("ucov2 requires n >= 4");
    long double s = 0.0L;
    for (std::size_t i = 0; i < n * n; ++i)
        s += static_cast<long double>(A.m.data[i]) * B.m.data[i];
    return static_cast<double>(
        s / (static_cast<long double>(n) * static_cast<long double>(n - 3)));
}

namespace detail {

// All six inner products one sample gives rise to, for both centerings.
// Everything downstream (the four point estimators, the combination
// estimator, the simulation harness) is a function of these.
struct StatBundle {
    std::size_t n = 0;
    bool u_valid = false;  // n >= 4
    double uxy = 0.0, uxx = 0.0, uyy = 0.0;
    double vxy_classic = 0.0, vxx_classic = 0.0, vyy_classic = 0.0;
    double vxy_paper = 0.0, vxx_paper = 0.0, vyy_paper = 0.0;

    double vxy(Centering mode) const {
        return mode == Centering::VPaper ? vxy_paper : vxy_classic;
    }
    double vxx(Centering mode) const {
        return mode == Centering::VPaper ? vxx_paper : vxx_classic;
    }
    double vyy(Centering mode) const {
        return mode == Centering::VPaper ? vyy_paper : vyy_classic;
    }
};

// Reusable buffers so hot loops (bootstrap, Monte Carlo) avoid
// reallocating n x n matrices on every evaluation.
struct StatWorkspace {
    SquareMatrix da, db;
    std::vector<double> row_a, row_b;

    void prepare(std::size_t n) {
        if (da.n != n) {
            da.resize(n);
            db.resize(n);
            row_a.assign(n, 0.0);
            row_b.assign(n, 0.0);
        }
    }
};

inline void fill_distances(SquareMatrix& d, const std::vector<double>& pts,
                           std::size_t n, std::size_t dims) {
    for (std::size_t i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        std::span<const double> ri{pts.data() + i * dims, dims};
        for (std::size_t j = i + 1; j < n; ++j) {
            std::span<const double> rj{pts.data() + j * dims, dims};
            const double val = euclidean(ri, rj);
            d(i, j) = val;
            d(j, i) = val;
        }
    }
}

// Reference implementation: materialize both distance matrices, then
// accumulate the centered inner products in one fused pass.
inline StatBundle matrix_stats(const PairedSample& s, StatWorkspace& ws) {
    const std::size_t n = s.n;
    require(n >= 2, "need at least two observations");
    ws.prepare(n);
    fill_distances(ws.da, s.xs, n, s.p);
    fill_distances(ws.db, s.ys, n, s.q);

    double total_a = 0.0, total_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sa = 0.0, sb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sa += ws.da(i, j);
            sb += ws.db(i, j);
        }
        ws.row_a[i] = sa;
        ws.row_b[i] = sb;
        total_a += sa;
        total_b += sb;
    }

    const double nn = static_cast<double>(n);
    const double cu1 = 1.0 / (nn - 2.0);
    const double cu2 = 1.0 / ((nn - 1.0) * (nn - 2.0));
    const double cv1 = 1.0 / nn;
    const double cv2 = 1.0 / (nn * nn);
    const bool u_valid = n >= 4;

    long double suxy = 0.0L, suxx = 0.0L, suyy = 0.0L;
    long double svxy = 0.0L, svxx = 0.0L, svyy = 0.0L;
    long double dvxy = 0.0L, dvxx = 0.0L, dvyy = 0.0L;

    for (std::size_t i = 0; i < n; ++i) {
        const double rai = ws.row_a[i], rbi = ws.row_b[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = ws.da(i, j), b = ws.db(i, j);
            const double av = a - cv1 * (rai + ws.row_a[j]) + cv2 * total_a;
            const double bv = b - cv1 * (rbi + ws.row_b[j]) + cv2 * total_b;
            svxy += 2.0L * av * bv;
            svxx += 2.0L * av * av;
            svyy += 2.0L * bv * bv;
            if (u_valid) {
                const double au = a - cu1 * (rai + ws.row_a[j]) + cu2 * total_a;
                const double bu = b - cu1 * (rbi + ws.row_b[j]) + cu2 * total_b;
                suxy += 2.0L * au * bu;
                suxx += 2.0L * au * au;
                suyy += 2.0L * bu * bu;
            }
        }
        // a_ii = 0, so the classic-centered diagonal is grand - 2 * rowmean.
        const double avd = cv2 * total_a - 2.0 * cv1 * rai;
        const double bvd = cv2 * total_b - 2.0 * cv1 * rbi;
        svxy += static_cast<long double>(avd) * bvd;
        svxx += static_cast<long double>(avd) * avd;
        svyy += static_cast<long double>(bvd) * bvd;
        dvxy += static_cast<long double>(avd) * bvd;
        dvxx += static_cast<long double>(avd) * avd;
        dvyy += static_cast<long double>(bvd) * bvd;
    }

    StatBundle out;
    out.n = n;
    out.u_valid = u_valid;
    const long double n2 = static_cast<long double>(n) * n;
    out.vxy_classic = static_cast<double>(svxy / n2);
    out.vxx_classic = static_cast<double>(svxx / n2);
    out.vyy_classic = static_cast<double>(svyy / n2);
    out.vxy_paper = static_cast<double>((svxy - dvxy) / n2);
    out.vxx_paper = static_cast<double>((svxx - dvxx) / n2);
    out.vyy_paper = static_cast<double>((svyy - dvyy) / n2);
    if (u_valid) {
        const long double un = static_cast<long double>(n) * (n - 3.0L);
        out.uxy = static_cast<double>(suxy / un);
        out.uxx = static_cast<double>(suxx / un);
        out.uyy = static_cast<double>(suyy / un);
    }
    return out;
}

// Assemble the bundle from the three pairwise power sums
//   P1 = sum |dx||dy|,  P2 = sum_k rowsum_a(k) rowsum_b(k),  P3 = tot_a tot_b.
// Shared by the streaming quadratic evaluator and the n log n path.
struct PowerSums {
    long double p1 = 0.0L, p2 = 0.0L;
    double total_a = 0.0, total_b = 0.0;
    long double p1_xx = 0.0L, p2_xx = 0.0L;
    long double p1_yy = 0.0L, p2_yy = 0.0L;
    // sum over k of the classic-centered diagonal products, for the
    // V-paper reconciliation
    long double diag_xy = 0.0L, diag_xx = 0.0L, diag_yy = 0.0L;
};

inline StatBundle bundle_from_power_sums(const PowerSums& ps, std::size_t n) {
    const long double nn = static_cast<long double>(n);
    const long double n2 = nn * nn;
    StatBundle out;
    out.n = n;
    out.u_valid = n >= 4;
    const long double p3 = static_cast<long double>(ps.total_a) * ps.total_b;
    const long double p3_xx = static_cast<long double>(ps.total_a) * ps.total_a;
    const long double p3_yy = static_cast<long double>(ps.total_b) * ps.total_b;

    auto vstat = [&](long double p1, long double p2, long double p3v) {
        return static_cast<double>(p1 / n2 - 2.0L * p2 / (n2 * nn) + p3v / (n2 * n2));
    };
    out.vxy_classic = vstat(ps.p1, ps.p2, p3);
    out.vxx_classic = vstat(ps.p1_xx, ps.p2_xx, p3_xx);
    out.vyy_classic = vstat(ps.p1_yy, ps.p2_yy, p3_yy);
    out.vxy_paper = static_cast<double>(out.vxy_classic - ps.diag_xy / n2);
    out.vxx_paper = static_cast<double>(out.vxx_classic - ps.diag_xx / n2);
    out.vyy_paper = static_cast<double>(out.vyy_classic - ps.diag_yy / n2);

    if (out.u_valid) {
        const long double un = nn * (nn - 3.0L);
        auto ustat = [&](long double p1, long double p2, long double p3v) {
            return static_cast<double>(
                (p1 - 2.0L * p2 / (nn - 2.0L) + p3v / ((nn - 1.0L) * (nn - 2.0L))) / un);
        };
        out.uxy = ustat(ps.p1, ps.p2, p3);
        out.uxx = ustat(ps.p1_xx, ps.p2_xx, p3_xx);
        out.uyy = ustat(ps.p1_yy, ps.p2_yy, p3_yy);
    }
    return out;
}

inline void add_diagonal_products(PowerSums& ps, const std::vector<double>& ra,
                                  const std::vector<double>& rb, std::size_t n) {
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ad = ps.total_a / (nn * nn) - 2.0 * ra[k] / nn;
        const double bd = ps.total_b / (nn * nn) - 2.0 * rb[k] / nn;
        ps.diag_xy += static_cast<long double>(ad) * bd;
        ps.diag_xx += static_cast<long double>(ad) * ad;
        ps.diag_yy += static_cast<long double>(bd) * bd;
    }
}

// Quadratic-time, linear-memory evaluator for univariate samples. Serves
// as the naive baseline at sizes where an n x n matrix would not fit.
inline StatBundle quadratic_stats_1d(const std::vector<double>& x,
                                     const std::vector<double>& y) {
    const std::size_t n = x.size();
    require(n >= 2 && y.size() == n, "need matching vectors with n >= 2");

    std::vector<double> ra(n, 0.0), rb(n, 0.0);
    PowerSums ps;
    long double p1 = 0.0L, p1xx = 0.0L, p1yy = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = std::abs(x[i] - x[j]);
            const double b = std::abs(y[i] - y[j]);
            ra[i] += a;
            ra[j] += a;
            rb[i] += b;
            rb[j] += b;
            p1 += 2.0L * a * b;
            p1xx += 2.0L * a * a;
            p1yy += 2.0L * b * b;
        }
    }
    ps.p1 = p1;
    ps.p1_xx = p1xx;
    ps.p1_yy = p1yy;
    for (std::size_t k = 0; k < n; ++k) {
        ps.p2 += static_cast<long double>(ra[k]) * rb[k];
        ps.p2_xx += static_cast<long double>(ra[k]) * ra[k];
        ps.p2_yy += static_cast<long double>(rb[k]) * rb[k];
        ps.total_a += ra[k];
        ps.total_b += rb[k];
    }
    add_diagonal_products(ps, ra, rb, n);
    return bundle_from_power_sums(ps, n);
}

inline double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

inline DcorEstimate estimate_v(const StatBundle& b, Centering mode) {
    DcorEstimate est;
    est.variant = Variant::V;
    est.cov2_xy = b.vxy(mode);
    est.var2_x = b.vxx(mode);
    est.var2_y = b.vyy(mode);
    est.was_negative = est.cov2_xy < 0.0;
    const double vp = est.var2_x * est.var2_y;
    if (vp <= 0.0) {
        est.degenerate = true;
        est.value = 0.0;
        return est;
    }
    if (mode == Centering::VClassic) {
        const double scale = std::max(1.0, std::sqrt(vp));
        if (est.cov2_xy < -1e-12 * scale)
            throw internal_error("classic V-statistic dcov^2 is negative: " +
                                 std::to_string(est.cov2_xy));
    }
    // Cauchy-Schwarz equality (perfect dependence) taken exactly, so the
    // estimate is exactly 1 rather than 1 +/- one rounding step.
    const double r2 = est.cov2_xy * est.cov2_xy == vp
                          ? sign_of(est.cov2_xy)
                          : est.cov2_xy / std::sqrt(vp);
    // With the zeroed-diagonal centering the numerator can come out
    // negative near independence; the estimate falls back to 0 there.
    est.value = clamp_correlation(std::sqrt(std::max(r2, 0.0)), 0.0, "dCorV");
    return est;
}

inline DcorEstimate estimate_u(const StatBundle& b, UPolicy policy) {
    if (!b.u_valid)
        throw sample_too_small("U-statistic estimators require n >= 4, got n = " +
                               std::to_string(b.n));
    DcorEstimate est;
    est.variant = policy == UPolicy::Signed  ? Variant::USigned
                  : policy == UPolicy::Abs   ? Variant::UAbs
                                             : Variant::UTrunc;
    est.cov2_xy = b.uxy;
    est.var2_x = b.uxx;
    est.var2_y = b.uyy;
    est.was_negative = est.cov2_xy < 0.0;
    const double vp = est.var2_x * est.var2_y;
    if (vp <= 0.0) {
        est.degenerate = true;
        est.value = 0.0;
        return est;
    }
    const double r2 = est.cov2_xy * est.cov2_xy == vp
                          ? sign_of(est.cov2_xy)
                          : est.cov2_xy / std::sqrt(vp);
    switch (policy) {
        case UPolicy::Signed:
            est.value = sign_of(r2) *
                        clamp_correlation(std::sqrt(std::abs(r2)), 0.0, "dCorU");
            break;
        case UPolicy::Abs:
            est.value = clamp_correlation(std::sqrt(std::abs(r2)), 0.0, "dCorU(A)");
            break;
        case UPolicy::Trunc:
            est.value = clamp_correlation(std::sqrt(std::max(r2, 0.0)), 0.0, "dCorU(T)");
            break;
    }
    return est;
}

}  // namespace detail

// Empirical distance correlation from double-centered matrices (the
// V-statistic). Classical centering is the default: it is the variant
// whose squared covariance is provably nonnegative and the one the
// published reference tables correspond to.
inline DcorEstimate dcor_v(const PairedSample& s,
                           Centering mode = Centering::VClassic) {
    require(mode != Centering::U, "dcor_v expects a V centering mode");
    if (s.n < 2) throw sample_too_small("dcor_v requires n >= 2");
    detail::StatWorkspace ws;
    return detail::estimate_v(detail::matrix_stats(s, ws), mode);
}

// Distance correlation from U-centered matrices. The squared statistic
// is unbiased and may be negative; `policy` decides how the root is
// taken in that case.
inline DcorEstimate dcor_u(const PairedSample& s, UPolicy policy = UPolicy::Signed) {
    if (s.n < 4)
        throw sample_too_small("dcor_u requires n >= 4, got n = " +
                               std::to_string(s.n));
    detail::StatWorkspace ws;
    return detail::estimate_u(detail::matrix_stats(s, ws), policy);
}

}  // namespace dcor
