#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dcor/common.hpp"

namespace dcor {

// n paired observations, X in R^p and Y in R^q, stored row-major.
// Every estimator in the library consumes one of these.
struct PairedSample {
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t q = 0;
    std::vector<double> xs;  // n * p
    std::vector<double> ys;  // n * q

    std::span<const double> x_row(std::size_t i) const {
        return {xs.data() + i * p, p};
    }
    std::span<const double> y_row(std::size_t i) const {
        return {ys.data() + i * q, q};
    }
    bool univariate() const { return p == 1 && q == 1; }
};

inline PairedSample make_paired_sample(std::vector<double> xs, std::size_t p,
                                       std::vector<double> ys, std::size_t q) {
    require(p >= 1 && q >= 1, "dimensions must be at least 1");
    require(xs.size() % p == 0, "X data length is not a multiple of p");
    require(ys.size() % q == 0, "Y data length is not a multiple of q");
    const std::size_t n = xs.size() / p;
    require(n >= 1, "sample is empty");
    require(ys.size() / q == n, "X and Y must have the same number of rows");
    require_finite(xs, "X");
    require_finite(ys, "Y");
    return PairedSample{n, p, q, std::move(xs), std::move(ys)};
}

inline PairedSample make_paired_sample(std::vector<double> x, std::vector<double> y) {
    return make_paired_sample(std::move(x), 1, std::move(y), 1);
}

}  // namespace dcor
