#pragma once

#include <cstddef>
#include <string_view>

namespace powerpanel {

enum class GPriorKind { uip, bric, hyper_uip };

std::string_view to_string(GPriorKind kind) noexcept;
GPriorKind parse_gprior(std::string_view text);

// Zellner g-prior on the slope coefficients. Fixed-g kinds carry g, the
// hyper-g kind carries the Beta-prime shape a of p(g) = (a-2)/2 (1+g)^(-a/2).
struct GPriorSpec {
    GPriorKind kind = GPriorKind::hyper_uip;
    double g = 0.0;
    double a = 0.0;

    bool is_fixed() const noexcept { return kind != GPriorKind::hyper_uip; }

    // UIP: g = n. BRIC: g = max(n, K^2). Hyper-UIP: a = 2 + 2/n, which makes
    // the prior mean shrinkage 2/a equal the UIP shrinkage n/(1+n).
    static GPriorSpec make(GPriorKind kind, std::size_t n, std::size_t K);
    static GPriorSpec fixed(double g);
    static GPriorSpec hyper(double a);
};

// Log Bayes factor against the null model for fixed g.
double log_ml_fixed_g(double r2, std::size_t n, std::size_t k, double g);

// Hyper-g marginal likelihood together with posterior moments of the
// shrinkage factor t = g/(1+g).
struct HyperGIntegral {
    double log_ml = 0.0;
    double shrinkage_mean = 0.0;
    double shrinkage_sq_mean = 0.0;
    double achieved_tolerance = 0.0;
};

// Integrates the fixed-g evidence against the hyper-g prior. Uses the
// trapezoidal rule in log g, refining the step until the estimate agrees
// with the half-resolution estimate to `tolerance` (relative).
HyperGIntegral hyper_g_integral(double r2, std::size_t n, std::size_t k, double a, double tolerance = 1e-11);

// Log ML with shrinkage moments for either prior family.
struct ShrinkageFit {
    double log_ml = 0.0;
    double shrinkage_mean = 0.0;
    double shrinkage_sq_mean = 0.0;
};

ShrinkageFit evaluate_gprior(const GPriorSpec& prior, double r2, std::size_t n, std::size_t k);

}  // namespace powerpanel
