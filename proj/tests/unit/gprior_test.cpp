#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "powerpanel/bma.hpp"
#include "powerpanel/error.hpp"
#include "powerpanel/gprior.hpp"

using namespace powerpanel;

TEST_CASE("fixed-g closed form") {
    CHECK(log_ml_fixed_g(0.0, 50, 0, 50.0) == 0.0);
    for (double g : {1.0, 8.0, 400.0}) {
        CHECK(log_ml_fixed_g(1.0, 30, 1, g) == doctest::Approx(0.5 * 28.0 * std::log1p(g)).epsilon(1e-14));
    }
    // More fit, more evidence; more columns at equal fit, less.
    CHECK(log_ml_fixed_g(0.5, 40, 2, 40.0) > log_ml_fixed_g(0.4, 40, 2, 40.0));
    CHECK(log_ml_fixed_g(0.5, 40, 3, 40.0) < log_ml_fixed_g(0.5, 40, 2, 40.0));
}

TEST_CASE("prior calibration") {
    const auto uip = GPriorSpec::make(GPriorKind::uip, 120, 20);
    CHECK(uip.g == 120.0);
    CHECK(uip.is_fixed());
    CHECK(GPriorSpec::make(GPriorKind::bric, 120, 20).g == 400.0);
    CHECK(GPriorSpec::make(GPriorKind::bric, 500, 20).g == 500.0);
    const auto hyper = GPriorSpec::make(GPriorKind::hyper_uip, 120, 20);
    CHECK_FALSE(hyper.is_fixed());
    CHECK(hyper.a == doctest::Approx(2.0 + 2.0 / 120.0));
    // prior mean shrinkage 2/a equals the UIP shrinkage n/(1+n)
    CHECK(2.0 / hyper.a == doctest::Approx(120.0 / 121.0).epsilon(1e-14));
    CHECK_THROWS_AS(GPriorSpec::hyper(2.0), Error);
    CHECK_THROWS_AS(GPriorSpec::fixed(0.0), Error);
    CHECK(parse_gprior("bric") == GPriorKind::bric);
    CHECK_THROWS_AS(parse_gprior("zellner"), Error);
}

TEST_CASE("marginal likelihood matches direct integration at n=8") {
    std::mt19937_64 rng(5);
    for (std::size_t k : {1u, 2u}) {
        for (int rep = 0; rep < 3; ++rep) {
            auto d = oracle::random_design(rng, 8, k, std::vector<double>(k, 0.7), 1.0);
            const double g = 8.0;
            std::uint32_t all = (1u << k) - 1u;
            const double fast = log_marginal_likelihood(d, ModelId(all), GPriorSpec::fixed(g));
            const double slow = oracle::direct_log_evidence(d.X, d.y, g);
            CHECK(std::abs(std::expm1(fast - slow)) <= 1e-8);
        }
    }
}

TEST_CASE("hyper-g evidence and shrinkage moments match tanh-sinh reference") {
    for (double r2 : {0.0, 0.05, 0.3, 0.7, 0.95}) {
        for (std::size_t n : {8u, 40u, 500u}) {
            for (std::size_t k : {1u, 3u}) {
                const double a = 2.0 + 2.0 / static_cast<double>(n);
                const auto fast = hyper_g_integral(r2, n, k, a);
                const auto ref = oracle::hyper_g_reference(r2, n, k, a);
                CAPTURE(r2);
                CAPTURE(n);
                CAPTURE(k);
                CHECK(std::abs(std::expm1(fast.log_ml - ref.log_ml)) <= 1e-8);
                CHECK(fast.shrinkage_mean == doctest::Approx(ref.mean_t).epsilon(1e-8));
                CHECK(fast.shrinkage_sq_mean == doctest::Approx(ref.mean_t2).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("hyper-g edge cases") {
    const auto null = hyper_g_integral(0.3, 50, 0, 3.0);
    CHECK(null.log_ml == 0.0);
    CHECK(null.shrinkage_mean == doctest::Approx(2.0 / 3.0));
    try {
        hyper_g_integral(1.0, 50, 1, 3.0);
        FAIL("expected precision error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::precision);
    }
    const auto fit = evaluate_gprior(GPriorSpec::fixed(9.0), 0.4, 30, 2);
    CHECK(fit.shrinkage_mean == doctest::Approx(0.9));
    CHECK(fit.shrinkage_sq_mean == doctest::Approx(0.81));
    CHECK(fit.log_ml == log_ml_fixed_g(0.4, 30, 2, 9.0));
}
