#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcor {

// Input that violates a documented precondition (non-finite values,
// dimension mismatches, parameters out of range).
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Sample size below the minimum an operation requires (U-statistics
// need n >= 4, V-statistics n >= 2).
struct sample_too_small : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Filesystem / stream failures surfaced by the CLI layer.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computed quantity broke an internal consistency bound (e.g. a
// correlation far above 1); indicates a bug, not bad user input.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw invalid_input(msg);
}

inline void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw invalid_input(std::string(what) + " contains a non-finite value");
}

// Neumaier-compensated accumulator. Used wherever a metric is reduced
// over many replications so that results do not depend on how the work
// was split across threads.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Correlations may drift past 1 by rounding; anything beyond the
// tolerance is a genuine inconsistency.
inline double clamp_correlation(double value, double lo, const char* what) {
    constexpr double kTol = 1e-6;
    if (value > 1.0 + kTol || value < lo - kTol)
        throw internal_error(std::string(what) + " outside [" +
                             std::to_string(lo) + ", 1] beyond tolerance: " +
                             std::to_string(value));
    if (value > 1.0) return 1.0;
    if (value < lo) return lo;
    return value;
}

inline double clamp01(double x) {
    if (x < 0.0) return 0.0;
    if (x > 1.0) return 1.0;
    return x;
}

}  // namespace dcor
