#include "powerpanel/gprior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "powerpanel/error.hpp"

namespace powerpanel {

std::string_view to_string(GPriorKind kind) noexcept {
    switch (kind) {
        case GPriorKind::uip: return "uip";
        case GPriorKind::bric: return "bric";
        case GPriorKind::hyper_uip: return "hyper_uip";
    }
    return "unknown";
}

GPriorKind parse_gprior(std::string_view text) {
    if (text == "uip") return GPriorKind::uip;
    if (text == "bric") return GPriorKind::bric;
    if (text == "hyper_uip" || text == "hyper-uip" || text == "hyper") return GPriorKind::hyper_uip;
    throw Error(ErrorKind::config, "unknown g-prior '" + std::string(text) + "'");
}

GPriorSpec GPriorSpec::make(GPriorKind kind, std::size_t n, std::size_t K) {
    const auto nd = static_cast<double>(n);
    const auto Kd = static_cast<double>(K);
    switch (kind) {
        case GPriorKind::uip: return {kind, nd, 0.0};
        case GPriorKind::bric: return {kind, std::max(nd, Kd * Kd), 0.0};
        case GPriorKind::hyper_uip: return {kind, 0.0, 2.0 + 2.0 / nd};
    }
    return {};
}

GPriorSpec GPriorSpec::fixed(double g) {
    if (!(g > 0.0)) throw Error(ErrorKind::config, "g must be positive");
    return {GPriorKind::uip, g, 0.0};
}

GPriorSpec GPriorSpec::hyper(double a) {
    if (!(a > 2.0)) throw Error(ErrorKind::config, "hyper-g shape a must exceed 2");
    return {GPriorKind::hyper_uip, 0.0, a};
}

double log_ml_fixed_g(double r2, std::size_t n, std::size_t k, double g) {
    if (k == 0) return 0.0;
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    return 0.5 * (nd - 1.0 - kd) * std::log1p(g) - 0.5 * (nd - 1.0) * std::log1p(g * (1.0 - r2));
}

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

HyperGIntegral hyper_g_integral(double r2, std::size_t n, std::size_t k, double a, double tolerance) {
    if (!(a > 2.0)) throw Error(ErrorKind::config, "hyper-g shape a must exceed 2");
    if (k == 0) {
        // The likelihood does not depend on g, so the posterior of the
        // shrinkage equals its Beta(1, a/2 - 1) prior.
        const double h = a / 2.0;
        return {0.0, 1.0 / h, 2.0 / (h * (h + 1.0)), 0.0};
    }
    if (!(r2 < 1.0)) {
        throw Error(ErrorKind::precision, "hyper-g evidence diverges for a perfect fit (R^2 = 1)");
    }
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    const double log_c = std::log1p(-std::max(r2, 0.0));
    const double log_norm = std::log((a - 2.0) / 2.0);
    const double up = 0.5 * (nd - 1.0 - kd - a);
    const double down = 0.5 * (nd - 1.0);
    // Integrand of the evidence in tau = log g, including the Jacobian g.
    auto phi = [&](double tau) { return log_norm + tau + up * softplus(tau) - down * softplus(tau + log_c); };

    double peak_tau = -40.0;
    double peak = phi(peak_tau);
    for (double tau = -39.0; tau <= 400.0; tau += 1.0) {
        const double v = phi(tau);
        if (v > peak) {
            peak = v;
            peak_tau = tau;
        }
    }

    constexpr double kDrop = 50.0;
    constexpr double kLow = -200.0;
    constexpr double kHigh = 1200.0;
    double achieved = 0.0;
    for (double h = 0.25; h >= 1.0 / 256.0; h /= 2.0) {
        // Sums over the full grid and over its even-indexed subgrid (step 2h).
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, even = 0.0;
        auto accumulate = [&](long long j) {
            const double tau = peak_tau + static_cast<double>(j) * h;
            const double v = phi(tau);
            const double w = std::exp(v - peak);
            const double t = logistic(tau);
            s0 += w;
            s1 += w * t;
            s2 += w * t * t;
            if (j % 2 == 0) even += w;
            return v;
        };
        accumulate(0);
        double running = peak;
        for (long long j = 1;; ++j) {
            const double tau = peak_tau + static_cast<double>(j) * h;
            if (tau > kHigh) throw Error(ErrorKind::precision, "hyper-g integrand does not decay on the right");
            const double v = accumulate(j);
            running = std::max(running, v);
            if (v < running - kDrop) break;
        }
        for (long long j = -1;; --j) {
            const double tau = peak_tau + static_cast<double>(j) * h;
            if (tau < kLow) break;
            const double v = accumulate(j);
            running = std::max(running, v);
            if (v < running - kDrop) break;
        }
        const double fine = s0 * h;
        const double coarse = even * 2.0 * h;
        achieved = std::abs(fine - coarse) / fine;
        if (achieved <= tolerance) {
            return {peak + std::log(fine), s1 / s0, s2 / s0, achieved};
        }
    }
    throw Error(ErrorKind::precision, "hyper-g quadrature did not converge; achieved relative tolerance " +
                                          std::to_string(achieved));
}

ShrinkageFit evaluate_gprior(const GPriorSpec& prior, double r2, std::size_t n, std::size_t k) {
    if (prior.is_fixed()) {
        const double t = prior.g / (1.0 + prior.g);
        return {log_ml_fixed_g(r2, n, k, prior.g), t, t * t};
    }
    const auto h = hyper_g_integral(r2, n, k, prior.a);
    return {h.log_ml, h.shrinkage_mean, h.shrinkage_sq_mean};
}

}  // namespace powerpanel
