#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "dcor/common.hpp"
#include "dcor/estimators.hpp"
#include "dcor/fast.hpp"
#include "dcor/rng.hpp"
#include "dcor/sample.hpp"

namespace dcor {

enum class MomentSource { Bootstrap, MonteCarloOracle };

// Variance / bias / covariance of the U- and V-estimators plus the
// MSE-optimal convex weight computed from them.
struct MomentSummary {
    double var_u = 0.0;
    double var_v = 0.0;
    double bias_u = 0.0;
    double bias_v = 0.0;
    double cov_uv = 0.0;
    double lambda0 = 0.5;
    MomentSource source = MomentSource::Bootstrap;
    double h1 = 0.0;  // bandwidths actually used (0 for oracle moments)
    double h2 = 0.0;
};

// MSE of the convex combination at weight `lambda`, as a function of the
// moment tuple. This is the objective the optimal weight minimizes.
inline double combination_mse(const MomentSummary& m, double lambda) {
    const double mu = 1.0 - lambda;
    const double bias = lambda * m.bias_u + mu * m.bias_v;
    return lambda * lambda * m.var_u + mu * mu * m.var_v +
           2.0 * lambda * mu * m.cov_uv + bias * bias;
}

// Closed-form MSE-minimizing weight, clamped to [0, 1]. A vanishing
// denominator means the two estimators are statistically
// indistinguishable and any weight is optimal; 0.5 is returned.
inline double lambda_opt(double var_u, double var_v, double bias_u, double bias_v,
                         double cov_uv) {
    require(var_u >= 0.0 && var_v >= 0.0, "variances must be nonnegative");
    const double d = bias_u - bias_v;
    const double den = var_u + var_v - 2.0 * cov_uv + d * d;
    if (den < 1e-12) return 0.5;
    const double num = -cov_uv + var_v + bias_v * (bias_v - bias_u);
    return clamp01(num / den);
}

inline double lambda_opt(const MomentSummary& m) {
    return lambda_opt(m.var_u, m.var_v, m.bias_u, m.bias_v, m.cov_uv);
}

// Gaussian rule-of-thumb bandwidth h = 0.9 min(sd, IQR/1.34) n^(-1/5).
// sd uses the n-1 denominator; quartiles are linearly interpolated
// (type-7). A constant sample gets a small positive floor so smoothing
// always breaks ties.
inline double silverman_bandwidth(const std::vector<double>& v) {
    const std::size_t n = v.size();
    require(n >= 2, "silverman_bandwidth needs at least two values");
    require_finite(v, "bandwidth input");
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) return 1e-6 * (1.0 + std::abs(mean));

    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= n) return sorted[n - 1];
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

enum class BandwidthRule { Silverman, Fixed, Grid };

struct BootstrapConfig {
    std::size_t replications = 1000;  // B
    BandwidthRule rule = BandwidthRule::Silverman;
    double h1 = 0.0;                  // Fixed rule only
    double h2 = 0.0;
    std::vector<double> grid;         // Grid rule only; sorted, positive
    UPolicy u_policy = UPolicy::Signed;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

inline void validate_config(const BootstrapConfig& cfg) {
    require(cfg.replications >= 2, "bootstrap needs B >= 2");
    if (cfg.rule == BandwidthRule::Fixed)
        require(cfg.h1 > 0.0 && cfg.h2 > 0.0, "fixed bandwidths must be positive");
    if (cfg.rule == BandwidthRule::Grid) {
        require(!cfg.grid.empty(), "bandwidth grid is empty");
        require(std::is_sorted(cfg.grid.begin(), cfg.grid.end()),
                "bandwidth grid must be sorted");
        require(cfg.grid.front() > 0.0, "grid bandwidths must be positive");
    }
}

namespace detail {

struct BootstrapDraws {
    std::vector<double> theta_u;
    std::vector<double> theta_v;
};

// One smoothed resample: joint index resampling plus coordinate-wise
// Gaussian noise scaled by the per-margin bandwidths (Algorithm 1,
// step 7). Replication b always consumes the stream derive_stream(seed, b).
inline void smoothed_resample(const PairedSample& s, double h1, double h2, Rng& rng,
                              PairedSample& out) {
    const std::size_t n = s.n;
    out.n = n;
    out.p = s.p;
    out.q = s.q;
    out.xs.resize(n * s.p);
    out.ys.resize(n * s.q);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(rng.bounded(n));
        for (std::size_t c = 0; c < s.p; ++c)
            out.xs[i * s.p + c] = s.xs[j * s.p + c] + h1 * rng.normal();
        for (std::size_t c = 0; c < s.q; ++c)
            out.ys[i * s.q + c] = s.ys[j * s.q + c] + h2 * rng.normal();
    }
}

inline BootstrapDraws bootstrap_draws(const PairedSample& s, double h1, double h2,
                                      std::size_t B, UPolicy policy,
                                      std::uint64_t seed, std::size_t stream_base,
                                      std::size_t workers) {
    BootstrapDraws draws;
    draws.theta_u.assign(B, 0.0);
    draws.theta_v.assign(B, 0.0);
    const std::size_t nworkers = std::max<std::size_t>(1, std::min(workers, B));

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        PairedSample resample;
        StatWorkspace mw;
        SortedWorkspace sw;
        for (std::size_t b = lo; b < hi; ++b) {
            Rng rng(derive_stream(seed, stream_base + b));
            smoothed_resample(s, h1, h2, rng, resample);
            const StatBundle st = compute_stats_auto(resample, mw, sw);
            draws.theta_u[b] = estimate_u(st, policy).value;
            draws.theta_v[b] = estimate_v(st, Centering::VClassic).value;
        }
    };
    if (nworkers == 1) {
        run_range(0, B);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (B + nworkers - 1) / nworkers;
        for (std::size_t w = 0; w < nworkers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(B, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    return draws;
}

// Sample moments of the bootstrap draws relative to the dCorV value on
// the original sample (Algorithm 1, steps 11-12). Variances and the
// covariance use the B-1 denominator.
inline MomentSummary summarize_draws(const BootstrapDraws& d, double theta_hat,
                                     double h1, double h2) {
    const std::size_t B = d.theta_u.size();
    double mu = 0.0, mv = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        mu += d.theta_u[b];
        mv += d.theta_v[b];
    }
    mu /= static_cast<double>(B);
    mv /= static_cast<double>(B);
    double vu = 0.0, vv = 0.0, cuv = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const double du = d.theta_u[b] - mu;
        const double dv = d.theta_v[b] - mv;
        vu += du * du;
        vv += dv * dv;
        cuv += du * dv;
    }
    const double denom = static_cast<double>(B - 1);
    MomentSummary m;
    m.var_u = vu / denom;
    m.var_v = vv / denom;
    m.cov_uv = cuv / denom;
    m.bias_u = mu - theta_hat;
    m.bias_v = mv - theta_hat;
    m.lambda0 = lambda_opt(m);
    m.source = MomentSource::Bootstrap;
    m.h1 = h1;
    m.h2 = h2;
    return m;
}

inline std::pair<double, double> resolve_bandwidths(const PairedSample& s,
                                                    const BootstrapConfig& cfg) {
    if (cfg.rule == BandwidthRule::Fixed) return {cfg.h1, cfg.h2};
    return {silverman_bandwidth(s.xs), silverman_bandwidth(s.ys)};
}

}  // namespace detail

// Algorithm-1 smoothed bootstrap: resample with replacement, add kernel
// noise, evaluate both estimators per resample, and summarize their
// moments. Deterministic for a fixed seed regardless of worker count.
//
// With the Grid rule the bootstrap runs once per grid bandwidth
// (h1 = h2 = h) and keeps the bandwidth whose own moment summary implies
// the smallest combination MSE at its optimal weight. Oracle-MSE grid
// selection, which needs the unknown truth, lives in the simulation
// harness instead.
inline MomentSummary smoothed_bootstrap_moments(const PairedSample& s,
                                                const BootstrapConfig& cfg) {
    if (s.n < 4) throw sample_too_small("smoothed bootstrap requires n >= 4");
    validate_config(cfg);
    const double theta_hat = dcor_v(s).value;
    const std::size_t B = cfg.replications;

    if (cfg.rule != BandwidthRule::Grid) {
        const auto [h1, h2] = detail::resolve_bandwidths(s, cfg);
        const auto draws = detail::bootstrap_draws(s, h1, h2, B, cfg.u_policy,
                                                   cfg.seed, 0, cfg.workers);
        return detail::summarize_draws(draws, theta_hat, h1, h2);
    }

    MomentSummary best;
    double best_mse = 0.0;
    bool have = false;
    for (std::size_t hi = 0; hi < cfg.grid.size(); ++hi) {
        const double h = cfg.grid[hi];
        const auto draws = detail::bootstrap_draws(s, h, h, B, cfg.u_policy, cfg.seed,
                                                   hi * (B + 1), cfg.workers);
        const MomentSummary m = detail::summarize_draws(draws, theta_hat, h, h);
        const double mse = combination_mse(m, m.lambda0);
        if (!have || mse < best_mse) {
            best = m;
            best_mse = mse;
            have = true;
        }
    }
    return best;
}

inline double combine_value(double theta_u, double theta_v, double lambda) {
    return lambda * theta_u + (1.0 - lambda) * theta_v;
}

struct ComboResult {
    DcorEstimate estimate;
    MomentSummary moments;
};

// Convex-combination estimator: bootstrap-estimated optimal weight on
// the U estimate (under the configured negative-value policy) and the V
// estimate, both evaluated on the original sample.
inline ComboResult dcor_combo(const PairedSample& s, const BootstrapConfig& cfg) {
    const MomentSummary moments = smoothed_bootstrap_moments(s, cfg);
    detail::StatWorkspace mw;
    SortedWorkspace sw;
    const auto st = detail::compute_stats_auto(s, mw, sw);
    const DcorEstimate u = detail::estimate_u(st, cfg.u_policy);
    const DcorEstimate v = detail::estimate_v(st, Centering::VClassic);

    ComboResult out;
    out.moments = moments;
    out.estimate = u;
    out.estimate.variant = Variant::Combo;
    out.estimate.value = combine_value(u.value, v.value, moments.lambda0);
    out.estimate.degenerate = u.degenerate || v.degenerate;
    return out;
}

}  // namespace dcor
