#pragma once

// Independent reference implementations of the estimator definitions,
// written directly from the formulas and kept free of any library code
// paths. Tests compare the library against these.

#include <cmath>
#include <cstddef>
#include <vector>

#include "dcor/rng.hpp"
#include "dcor/sample.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix distance_matrix(const std::vector<double>& pts, std::size_t n,
                              std::size_t dims) {
    Matrix d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < dims; ++c) {
                const double diff = pts[i * dims + c] - pts[j * dims + c];
                s += diff * diff;
            }
            d[i][j] = std::sqrt(s);
        }
    }
    return d;
}

// Double centering exactly as written: a_kl - rowmean - colmean + grand,
// with the diagonal either zeroed (paper form) or centered (classic).
inline Matrix v_center(const Matrix& a, bool zero_diagonal) {
    const std::size_t n = a.size();
    std::vector<double> rm(n, 0.0), cm(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            rm[i] += a[i][j] / static_cast<double>(n);
            cm[j] += a[i][j] / static_cast<double>(n);
            grand += a[i][j];
        }
    grand /= static_cast<double>(n) * static_cast<double>(n);
    Matrix out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out[i][j] = a[i][j] - rm[i] - cm[j] + grand;
    if (zero_diagonal)
        for (std::size_t i = 0; i < n; ++i) out[i][i] = 0.0;
    return out;
}

inline Matrix u_center(const Matrix& a) {
    const std::size_t n = a.size();
    std::vector<double> rs(n, 0.0), cs(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            rs[i] += a[i][j];
            cs[j] += a[i][j];
            grand += a[i][j];
        }
    Matrix out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            out[i][j] = a[i][j] - rs[i] / static_cast<double>(n - 2) -
                        cs[j] / static_cast<double>(n - 2) +
                        grand / (static_cast<double>(n - 1) *
                                 static_cast<double>(n - 2));
        }
    return out;
}

inline double dcov2_v_sum(const Matrix& A, const Matrix& B) {
    const std::size_t n = A.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s += A[i][j] * B[i][j];
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

inline double ucov2_sum(const Matrix& A, const Matrix& B) {
    const std::size_t n = A.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) s += A[i][j] * B[i][j];
    return s / (static_cast<double>(n) * static_cast<double>(n - 3));
}

struct Stats {
    double uxy, uxx, uyy;
    double vxy_classic, vxx_classic, vyy_classic;
    double vxy_paper, vxx_paper, vyy_paper;
};

inline Stats full_stats(const dcor::PairedSample& s) {
    const Matrix da = distance_matrix(s.xs, s.n, s.p);
    const Matrix db = distance_matrix(s.ys, s.n, s.q);
    const Matrix ac = v_center(da, false);
    const Matrix bc = v_center(db, false);
    const Matrix ap = v_center(da, true);
    const Matrix bp = v_center(db, true);
    Stats out{};
    out.vxy_classic = dcov2_v_sum(ac, bc);
    out.vxx_classic = dcov2_v_sum(ac, ac);
    out.vyy_classic = dcov2_v_sum(bc, bc);
    out.vxy_paper = dcov2_v_sum(ap, bp);
    out.vxx_paper = dcov2_v_sum(ap, ap);
    out.vyy_paper = dcov2_v_sum(bp, bp);
    if (s.n >= 4) {
        const Matrix au = u_center(da);
        const Matrix bu = u_center(db);
        out.uxy = ucov2_sum(au, bu);
        out.uxx = ucov2_sum(au, au);
        out.uyy = ucov2_sum(bu, bu);
    }
    return out;
}

// --- random test-data generators -----------------------------------------

inline std::vector<double> gaussian_vector(std::size_t n, dcor::Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

inline std::vector<double> uniform_vector(std::size_t n, dcor::Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform01();
    return v;
}

inline std::vector<double> heavy_tailed_vector(std::size_t n, dcor::Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) {
        const double u = rng.uniform01();
        x = 1.0 / (1.0 - u * 0.999) - 1.0;  // Pareto-flavored tail
    }
    return v;
}

inline std::vector<double> discretized_vector(std::size_t n, dcor::Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = std::floor(rng.uniform01() * 6.0);  // heavy ties
    return v;
}

inline std::vector<double> mixed_vector(std::size_t n, int flavor, dcor::Rng& rng) {
    switch (flavor % 4) {
        case 0: return uniform_vector(n, rng);
        case 1: return gaussian_vector(n, rng);
        case 2: return heavy_tailed_vector(n, rng);
        default: return discretized_vector(n, rng);
    }
}

}  // namespace oracle
