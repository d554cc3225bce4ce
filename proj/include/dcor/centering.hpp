#pragma once

#include <cstddef>
#include <vector>

#include "dcor/common.hpp"
#include "dcor/distance.hpp"

namespace dcor {

// VPaper zeroes the diagonal of the double-centered matrix; VClassic
// applies the centering formula on the diagonal as well. The classical
// form is the one whose inner product is guaranteed nonnegative.
enum class Centering { VPaper, VClassic, U };

struct CenteredMatrix {
    SquareMatrix m;
    Centering kind = Centering::VClassic;
    std::size_t n = 0;
};

inline CenteredMatrix v_center(const DistanceMatrix& dm, Centering mode) {
    require(mode == Centering::VPaper || mode == Centering::VClassic,
            "v_center expects a V centering mode");
    const std::size_t n = dm.n;
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += dm.d(i, j);
        row_mean[i] = s / static_cast<double>(n);
        grand += s;
    }
    grand /= static_cast<double>(n) * static_cast<double>(n);

    CenteredMatrix out;
    out.kind = mode;
    out.n = n;
    out.m.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.m(i, j) = dm.d(i, j) - row_mean[i] - row_mean[j] + grand;
    if (mode == Centering::VPaper)
        for (std::size_t i = 0; i < n; ++i) out.m(i, i) = 0.0;
    return out;
}

inline CenteredMatrix u_center(const DistanceMatrix& dm) {
    const std::size_t n = dm.n;
    if (n < 4)
        throw sample_too_small("U-centering requires n >= 4, got n = " +
                               std::to_string(n));
    std::vector<double> row_sum(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += dm.d(i, j);
        row_sum[i] = s;
        grand += s;
    }
    const double c1 = 1.0 / static_cast<double>(n - 2);
    const double c2 = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));

    CenteredMatrix out;
    out.kind = Centering::U;
    out.n = n;
    out.m.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            out.m(i, j) = dm.d(i, j) - c1 * row_sum[i] - c1 * row_sum[j] + c2 * grand;
        }
    }
    return out;
}

}  // namespace dcor
