#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dcor/common.hpp"
#include "dcor/sample.hpp"

namespace dcor {

struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t size, double fill = 0.0)
        : n(size), data(size * size, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }

    void resize(std::size_t size) {
        n = size;
        data.assign(size * size, 0.0);
    }
};

// Symmetric, zero-diagonal, nonnegative matrix of pairwise Euclidean
// distances a_kl = |X_k - X_l|.
struct DistanceMatrix {
    SquareMatrix d;
    std::size_t n = 0;
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() == 1) return std::abs(a[0] - b[0]);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return std::sqrt(s);
}

inline DistanceMatrix pairwise_distances(const std::vector<double>& points,
                                         std::size_t dims) {
    require(dims >= 1, "dimension must be at least 1");
    require(points.size() % dims == 0, "point data length is not a multiple of dims");
    const std::size_t n = points.size() / dims;
    require(n >= 1, "need at least one point");
    require_finite(points, "points");

    DistanceMatrix out;
    out.n = n;
    out.d.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> ri{points.data() + i * dims, dims};
        for (std::size_t j = i + 1; j < n; ++j) {
            std::span<const double> rj{points.data() + j * dims, dims};
            const double dist = euclidean(ri, rj);
            out.d(i, j) = dist;
            out.d(j, i) = dist;
        }
    }
    return out;
}

inline DistanceMatrix pairwise_distances_x(const PairedSample& s) {
    return pairwise_distances(s.xs, s.p);
}

inline DistanceMatrix pairwise_distances_y(const PairedSample& s) {
    return pairwise_distances(s.ys, s.q);
}

}  // namespace dcor
