#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "dcor/combiner.hpp"
#include "dcor/common.hpp"
#include "dcor/estimators.hpp"
#include "dcor/fast.hpp"
#include "dcor/models.hpp"
#include "dcor/rng.hpp"

namespace dcor {

enum class EstimatorKind {
    V,
    USigned,
    UAbs,
    UTrunc,
    ComboSigned,
    ComboAbs,
    ComboTrunc,
};

inline const char* estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::V: return "v";
        case EstimatorKind::USigned: return "u";
        case EstimatorKind::UAbs: return "u-abs";
        case EstimatorKind::UTrunc: return "u-trunc";
        case EstimatorKind::ComboSigned: return "combo";
        case EstimatorKind::ComboAbs: return "combo-abs";
        case EstimatorKind::ComboTrunc: return "combo-trunc";
    }
    return "?";
}

inline bool is_combo(EstimatorKind k) {
    return k == EstimatorKind::ComboSigned || k == EstimatorKind::ComboAbs ||
           k == EstimatorKind::ComboTrunc;
}

inline bool needs_u_statistic(EstimatorKind k) { return k != EstimatorKind::V; }

inline UPolicy estimator_policy(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::UAbs:
        case EstimatorKind::ComboAbs: return UPolicy::Abs;
        case EstimatorKind::UTrunc:
        case EstimatorKind::ComboTrunc: return UPolicy::Trunc;
        default: return UPolicy::Signed;
    }
}

struct SimConfig {
    ModelSpec model;
    std::size_t n = 100;
    std::size_t reps = 1000;
    std::vector<EstimatorKind> estimators{EstimatorKind::V, EstimatorKind::USigned};
    BootstrapConfig bootstrap;  // used by combo estimators
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool retain_estimates = false;
    std::size_t fast_threshold = kFastPathThreshold;
    PathChoice path = PathChoice::Auto;
};

struct EstimatorMetrics {
    EstimatorKind kind = EstimatorKind::V;
    double mean = 0.0;
    double bias = 0.0;
    double variance = 0.0;  // denominator reps, so mse = variance + bias^2
    double mse = 0.0;
    double mse_std_error = 0.0;  // Monte Carlo standard error of the MSE
    double pct_negative = 0.0;   // share of reps with U_n^2 < 0
    bool has_lambda = false;
    double lambda_mean = 0.0;
    std::vector<double> estimates;  // per-rep values when retained
};

struct SimReport {
    ModelSpec model;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    double dcor_true = 0.0;
    double dcor_true_se = 0.0;
    std::vector<EstimatorMetrics> metrics;
    double elapsed_ms = 0.0;

    const EstimatorMetrics& metric(EstimatorKind k) const {
        for (const auto& m : metrics)
            if (m.kind == k) return m;
        throw invalid_input("estimator not present in report");
    }
};

namespace detail {

struct RepOutcome {
    std::vector<double> values;   // one per requested estimator
    std::vector<double> lambdas;  // combos only, aligned with values
    double ucov2_xy = 0.0;
    bool u_available = false;
};

// Evaluates every requested estimator on one shared sample. Pairing all
// estimators on identical samples is what makes their metric differences
// directly comparable.
inline RepOutcome evaluate_rep(const SimConfig& cfg, std::uint64_t rep_seed,
                               StatWorkspace& mw, SortedWorkspace& sw) {
    const PairedSample sample = sample_model(cfg.model, cfg.n, rep_seed);
    const ComputePath path = choose_path(sample, cfg.fast_threshold, cfg.path);
    const StatBundle st = compute_stats(sample, path, mw, sw);

    RepOutcome out;
    out.values.reserve(cfg.estimators.size());
    out.lambdas.assign(cfg.estimators.size(), 0.0);
    if (st.u_valid) {
        out.ucov2_xy = st.uxy;
        out.u_available = true;
    }
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        const EstimatorKind kind = cfg.estimators[e];
        if (kind == EstimatorKind::V) {
            out.values.push_back(estimate_v(st, Centering::VClassic).value);
            continue;
        }
        if (!is_combo(kind)) {
            out.values.push_back(estimate_u(st, estimator_policy(kind)).value);
            continue;
        }
        BootstrapConfig bcfg = cfg.bootstrap;
        bcfg.u_policy = estimator_policy(kind);
        bcfg.seed = rep_seed;
        bcfg.workers = 1;  // replications are already parallel one level up
        const MomentSummary moments = smoothed_bootstrap_moments(sample, bcfg);
        const double u = estimate_u(st, bcfg.u_policy).value;
        const double v = estimate_v(st, Centering::VClassic).value;
        out.values.push_back(combine_value(u, v, moments.lambda0));
        out.lambdas[e] = moments.lambda0;
    }
    return out;
}

}  // namespace detail

inline void validate_sim_config(const SimConfig& cfg) {
    validate_spec(cfg.model);
    require(cfg.reps >= 2, "need at least two replications");
    require(!cfg.estimators.empty(), "no estimators requested");
    bool any_u = false;
    for (auto k : cfg.estimators) any_u = any_u || needs_u_statistic(k);
    if (any_u && cfg.n < 4)
        throw sample_too_small("U-based estimators require n >= 4");
    require(cfg.n >= 2, "simulation requires n >= 2");
    for (auto k : cfg.estimators)
        if (is_combo(k)) {
            BootstrapConfig b = cfg.bootstrap;
            validate_config(b);
        }
}

// Shared-sample Monte Carlo: replication r draws its sample from the
// stream derive_stream(seed, r), every estimator sees that same sample,
// and aggregation runs in replication order so reports are identical for
// any worker count.
inline SimReport run_simulation(const SimConfig& cfg) {
    validate_sim_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const OracleResult truth = exact_dcor(cfg.model);

    const std::size_t reps = cfg.reps;
    const std::size_t ne = cfg.estimators.size();
    std::vector<std::vector<double>> values(ne, std::vector<double>(reps, 0.0));
    std::vector<std::vector<double>> lambdas(ne);
    for (std::size_t e = 0; e < ne; ++e)
        if (is_combo(cfg.estimators[e])) lambdas[e].assign(reps, 0.0);
    std::vector<double> ucov_values(reps, 0.0);
    bool u_available = cfg.n >= 4;

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        detail::StatWorkspace mw;
        SortedWorkspace sw;
        for (std::size_t r = lo; r < hi; ++r) {
            const auto outcome =
                detail::evaluate_rep(cfg, derive_stream(cfg.seed, r), mw, sw);
            for (std::size_t e = 0; e < ne; ++e) {
                values[e][r] = outcome.values[e];
                if (!lambdas[e].empty()) lambdas[e][r] = outcome.lambdas[e];
            }
            ucov_values[r] = outcome.ucov2_xy;
        }
    };
    const std::size_t nworkers = std::max<std::size_t>(1, std::min(cfg.workers, reps));
    if (nworkers == 1) {
        run_range(0, reps);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (reps + nworkers - 1) / nworkers;
        for (std::size_t w = 0; w < nworkers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(reps, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    SimReport report;
    report.model = cfg.model;
    report.n = cfg.n;
    report.reps = reps;
    report.seed = cfg.seed;
    report.dcor_true = truth.dcor;
    report.dcor_true_se = truth.std_error;

    double pct_negative = 0.0;
    if (u_available) {
        std::size_t neg = 0;
        for (double u : ucov_values) neg += u < 0.0 ? 1 : 0;
        pct_negative = 100.0 * static_cast<double>(neg) / static_cast<double>(reps);
    }

    for (std::size_t e = 0; e < ne; ++e) {
        EstimatorMetrics m;
        m.kind = cfg.estimators[e];
        Accumulator mean_acc;
        for (double v : values[e]) mean_acc.add(v);
        m.mean = mean_acc.value() / static_cast<double>(reps);
        m.bias = m.mean - truth.dcor;

        Accumulator var_acc, mse_acc, mse2_acc;
        for (double v : values[e]) {
            const double dm = v - m.mean;
            const double dt = v - truth.dcor;
            var_acc.add(dm * dm);
            mse_acc.add(dt * dt);
            mse2_acc.add(dt * dt * dt * dt);
        }
        m.variance = var_acc.value() / static_cast<double>(reps);
        m.mse = mse_acc.value() / static_cast<double>(reps);
        const double mse2 = mse2_acc.value() / static_cast<double>(reps);
        const double var_of_sq = std::max(0.0, mse2 - m.mse * m.mse);
        m.mse_std_error = std::sqrt(var_of_sq / static_cast<double>(reps));
        m.pct_negative = pct_negative;
        if (!lambdas[e].empty()) {
            m.has_lambda = true;
            Accumulator lam_acc;
            for (double l : lambdas[e]) lam_acc.add(l);
            m.lambda_mean = lam_acc.value() / static_cast<double>(reps);
        }
        if (cfg.retain_estimates) m.estimates = std::move(values[e]);
        report.metrics.push_back(std::move(m));
    }
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    return report;
}

// Percentage of replications whose squared U-statistic came out
// negative.
inline double negative_share(const SimConfig& cfg) {
    SimConfig c = cfg;
    bool any_u = false;
    for (auto k : c.estimators) any_u = any_u || needs_u_statistic(k);
    require(any_u, "negative_share needs a U-based estimator in the config");
    const SimReport r = run_simulation(c);
    return r.metrics.front().pct_negative;
}

// --- CSV report (the schema the CLI exposes) ---------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline constexpr const char* kSimulationCsvHeader =
    "model,param,dcor_true,n,reps,estimator,mean,bias,variance,mse,"
    "pct_negative,lambda_hat,elapsed_ms";

// One row per estimator. elapsed_ms is wall-clock and therefore varies
// between runs; with include_timing = false it is written as 0 so files
// from identical (seed, config) runs compare byte-for-byte.
inline std::string simulation_csv(const std::vector<SimReport>& reports,
                                  bool include_timing = false) {
    std::string out(kSimulationCsvHeader);
    out += '\n';
    for (const auto& r : reports) {
        for (const auto& m : r.metrics) {
            out += family_name(r.model.family);
            out += ',';
            out += format_double(r.model.param);
            out += ',';
            out += format_double(r.dcor_true);
            out += ',';
            out += std::to_string(r.n);
            out += ',';
            out += std::to_string(r.reps);
            out += ',';
            out += estimator_name(m.kind);
            out += ',';
            out += format_double(m.mean);
            out += ',';
            out += format_double(m.bias);
            out += ',';
            out += format_double(m.variance);
            out += ',';
            out += format_double(m.mse);
            out += ',';
            out += format_double(m.pct_negative);
            out += ',';
            if (m.has_lambda) out += format_double(m.lambda_mean);
            out += ',';
            out += format_double(include_timing ? r.elapsed_ms : 0.0);
            out += '\n';
        }
    }
    return out;
}

// --- timing benchmark ---------------------------------------------------

struct BenchRow {
    std::string estimator;
    std::size_t n = 0;
    std::size_t reps = 0;
    double seconds = 0.0;
};

// Wall-clock totals for `reps` standalone evaluations of each estimator
// on fresh BVN(rho = 0.5) samples. Sampling time is excluded.
inline std::vector<BenchRow> bench_timing(const std::vector<std::size_t>& sizes,
                                          std::size_t reps, bool force_naive,
                                          std::uint64_t seed) {
    require(!sizes.empty(), "need at least one size");
    require(reps >= 1, "need at least one repetition");
    const ModelSpec model{ModelFamily::Bvn, 0.5};
    const PathChoice choice = force_naive ? PathChoice::ForceNaive : PathChoice::Auto;

    std::vector<BenchRow> rows;
    std::uint64_t stream = 0;
    for (std::size_t n : sizes) {
        require(n >= 4, "benchmark sizes must be at least 4");
        double sec_u = 0.0, sec_v = 0.0;
        detail::StatWorkspace mw;
        SortedWorkspace sw;
        for (std::size_t r = 0; r < reps; ++r) {
            const PairedSample s =
                sample_model(model, n, derive_stream(seed, stream++));
            const ComputePath path = choose_path(s, kFastPathThreshold, choice);
            {
                const auto t0 = std::chrono::steady_clock::now();
                const auto st = detail::compute_stats(s, path, mw, sw);
                volatile double sink = detail::estimate_u(st, UPolicy::Signed).value;
                (void)sink;
                sec_u += std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
            }
            {
                const auto t0 = std::chrono::steady_clock::now();
                const auto st = detail::compute_stats(s, path, mw, sw);
                volatile double sink =
                    detail::estimate_v(st, Centering::VClassic).value;
                (void)sink;
                sec_v += std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
            }
        }
        rows.push_back({"u", n, reps, sec_u});
        rows.push_back({"v", n, reps, sec_v});
    }
    return rows;
}

}  // namespace dcor
