#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dcor/estimators.hpp"
#include "dcor/fast.hpp"
#include "dcor/rng.hpp"
#include "dcor/sample.hpp"
#include "oracle_utils.hpp"

using namespace dcor;

namespace {

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

// naive bundle through the matrix route, used as the reference
detail::StatBundle naive_bundle(const std::vector<double>& x,
                                const std::vector<double>& y) {
    detail::StatWorkspace ws;
    return detail::matrix_stats(make_paired_sample(x, y), ws);
}

}  // namespace

TEST_CASE("fast path equals the naive statistics on fixed inputs") {
    SortedWorkspace ws;
    SECTION("x = y = (1,2,3,4)") {
        const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
        const auto ref = naive_bundle(v, v);
        REQUIRE(fast_ucov2_1d(v, v, ws) == Catch::Approx(ref.uxy).epsilon(1e-12));
        REQUIRE(fast_dcov2_v_1d(v, v, ws) ==
                Catch::Approx(ref.vxy_classic).epsilon(1e-12));
    }
    SECTION("constant x gives a zero V statistic") {
        const std::vector<double> x(6, 2.0);
        const std::vector<double> y{1, 5, 2, 4, 3, 0};
        REQUIRE(fast_dcov2_v_1d(x, y, ws) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("two-point classic value") {
        const std::vector<double> v{0.0, 1.0};
        REQUIRE(fast_dcov2_v_1d(v, v, ws) == Catch::Approx(0.25).margin(1e-15));
    }
    SECTION("ties reproduce the naive values") {
        const std::vector<double> x{1, 1, 2, 2, 3};
        const std::vector<double> y{2, 7, 7, 1, 1};
        const auto ref = naive_bundle(x, y);
        REQUIRE(rel_diff(fast_ucov2_1d(x, y, ws), ref.uxy) <= 1e-10);
        REQUIRE(rel_diff(fast_dcov2_v_1d(x, y, ws), ref.vxy_classic) <= 1e-10);
    }
    SECTION("n below 4 rejected for the U statistic") {
        const std::vector<double> v{1.0, 2.0, 3.0};
        REQUIRE_THROWS_AS(fast_ucov2_1d(v, v, ws), sample_too_small);
    }
}

TEST_CASE("fast path equals naive across sizes and distributions") {
    Rng rng(424242);
    SortedWorkspace ws;
    const std::size_t sizes[] = {5, 17, 64, 500};
    int instance = 0;
    for (std::size_t n : sizes) {
        for (int rep = 0; rep < 50; ++rep) {
            auto x = oracle::mixed_vector(n, instance, rng);
            auto y = oracle::mixed_vector(n, instance + 2, rng);
            if (rep % 3 == 0)
                for (std::size_t i = 0; i < n; ++i) y[i] += 0.7 * x[i];
            ++instance;
            const auto ref = naive_bundle(x, y);
            const auto fast = detail::fast_stats_1d(x, y, ws);
            REQUIRE(rel_diff(fast.uxy, ref.uxy) <= 1e-10);
            REQUIRE(rel_diff(fast.uxx, ref.uxx) <= 1e-10);
            REQUIRE(rel_diff(fast.uyy, ref.uyy) <= 1e-10);
            REQUIRE(rel_diff(fast.vxy_classic, ref.vxy_classic) <= 1e-10);
            REQUIRE(rel_diff(fast.vxy_paper, ref.vxy_paper) <= 1e-10);
            REQUIRE(rel_diff(fast.vxx_paper, ref.vxx_paper) <= 1e-10);
        }
    }
}

TEST_CASE("workspace reuse across different lengths") {
    Rng rng(5150);
    SortedWorkspace ws;
    for (std::size_t n : {8, 300, 12, 8, 77}) {
        const auto x = oracle::gaussian_vector(n, rng);
        const auto y = oracle::gaussian_vector(n, rng);
        const auto ref = naive_bundle(x, y);
        REQUIRE(rel_diff(fast_ucov2_1d(x, y, ws), ref.uxy) <= 1e-10);
    }
}

TEST_CASE("dcor_auto dispatch") {
    Rng rng(808);
    SECTION("univariate below threshold routes naive") {
        const auto s = make_paired_sample(oracle::gaussian_vector(100, rng),
                                          oracle::gaussian_vector(100, rng));
        REQUIRE(choose_path(s, kFastPathThreshold) == ComputePath::Naive);
    }
    SECTION("univariate at scale routes fast and matches naive") {
        auto x = oracle::gaussian_vector(1000, rng);
        auto y = oracle::gaussian_vector(1000, rng);
        for (std::size_t i = 0; i < 1000; ++i) y[i] += 0.3 * x[i];
        const auto s = make_paired_sample(x, y);
        REQUIRE(choose_path(s, kFastPathThreshold) == ComputePath::Fast);
        const auto auto_u = dcor_auto(s, Variant::USigned);
        const auto naive_u =
            dcor_auto(s, Variant::USigned, Centering::VClassic, kFastPathThreshold,
                      PathChoice::ForceNaive);
        REQUIRE(auto_u.value == Catch::Approx(naive_u.value).margin(1e-9));
        const auto auto_v = dcor_auto(s, Variant::V);
        const auto naive_v = dcor_v(s);
        REQUIRE(auto_v.value == Catch::Approx(naive_v.value).margin(1e-9));
    }
    SECTION("multivariate never routes fast") {
        std::vector<double> xs(2000), ys(1000);
        for (auto& v : xs) v = rng.normal();
        for (auto& v : ys) v = rng.normal();
        const auto s = make_paired_sample(xs, 2, ys, 1);
        REQUIRE(choose_path(s, kFastPathThreshold) == ComputePath::Naive);
        REQUIRE_THROWS_AS(
            dcor_auto(s, Variant::V, Centering::VClassic, kFastPathThreshold,
                      PathChoice::ForceFast),
            invalid_input);
    }
    SECTION("paper-mode V through the fast path matches the matrix route") {
        const auto x = oracle::uniform_vector(600, rng);
        const auto y = oracle::uniform_vector(600, rng);
        const auto s = make_paired_sample(x, y);
        const auto fast = dcor_auto(s, Variant::V, Centering::VPaper);
        const auto naive = dcor_v(s, Centering::VPaper);
        REQUIRE(fast.value == Catch::Approx(naive.value).margin(1e-9));
        REQUIRE(fast.cov2_xy == Catch::Approx(naive.cov2_xy).margin(1e-12));
    }
}

TEST_CASE("quadratic streaming evaluator equals the matrix route") {
    Rng rng(11);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 4 + static_cast<std::size_t>(rng.bounded(200));
        const auto x = oracle::mixed_vector(n, rep, rng);
        const auto y = oracle::mixed_vector(n, rep + 1, rng);
        const auto a = detail::quadratic_stats_1d(x, y);
        const auto b = naive_bundle(x, y);
        REQUIRE(rel_diff(a.uxy, b.uxy) <= 1e-11);
        REQUIRE(rel_diff(a.vxy_classic, b.vxy_classic) <= 1e-11);
        REQUIRE(rel_diff(a.vyy_paper, b.vyy_paper) <= 1e-11);
    }
}
