#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Each one takes the slow, obvious route so that it shares no code
// path with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "powerpanel/clustering.hpp"
#include "powerpanel/design.hpp"

namespace oracle {

// Minimum over every monotone warping path, enumerated explicitly.
inline double dtw_paths(const std::vector<double>& a, const std::vector<double>& b, std::size_t dim) {
    const std::size_t n = a.size() / dim, m = b.size() / dim;
    auto cost = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = a[i * dim + d] - b[j * dim + d];
            s += diff * diff;
        }
        return std::sqrt(s);
    };
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
        acc += cost(i, j);
        if (i == n - 1 && j == m - 1) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < n) walk(i + 1, j, acc);
        if (j + 1 < m) walk(i, j + 1, acc);
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
    };
    walk(0, 0, 0.0);
    return best;
}

// Average linkage recomputing every cross-cluster mean from leaf distances at
// every step. Node ids: leaves 0..n-1, the merge at step s creates n+s.
inline std::vector<powerpanel::Merge> naive_average_linkage(const Eigen::MatrixXd& M) {
    const std::size_t n = static_cast<std::size_t>(M.rows());
    struct Node {
        std::size_t id;
        std::vector<std::size_t> leaves;
    };
    std::vector<Node> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}});
    std::vector<powerpanel::Merge> merges;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                double s = 0.0;
                for (auto p : active[i].leaves)
                    for (auto q : active[j].leaves) s += M(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                const double d = s / static_cast<double>(active[i].leaves.size() * active[j].leaves.size());
                const auto lo = std::min(active[i].id, active[j].id), hi = std::max(active[i].id, active[j].id);
                const auto blo = std::min(active[bi].id, active[bj].id), bhi = std::max(active[bi].id, active[bj].id);
                if (d < best || (d == best && std::pair(lo, hi) < std::pair(blo, bhi))) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        Node merged{n + step, active[bi].leaves};
        merged.leaves.insert(merged.leaves.end(), active[bj].leaves.begin(), active[bj].leaves.end());
        merges.push_back({std::min(active[bi].id, active[bj].id), std::max(active[bi].id, active[bj].id), best,
                          merged.leaves.size()});
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        active.push_back(std::move(merged));
    }
    return merges;
}

// log of the Gaussian evidence ratio p(y | X, g) / p(y | null), integrating
// the likelihood numerically over the coefficients and log variance with the
// prior beta ~ N(0, g sigma^2 (X'X)^-1) and p(sigma^2) proportional to
// 1/sigma^2. y and the columns of X must already be centred; the centred
// likelihood carries n - 1 degrees of freedom. Composite 20-point Gauss rules
// on panels narrow relative to the integrand's curvature.
inline double direct_log_evidence(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double g) {
    using boost::math::quadrature::gauss;
    const double n1 = static_cast<double>(y.size()) - 1.0;
    const auto k = static_cast<std::size_t>(X.cols());
    const double log2pi = std::log(2.0 * M_PI);
    const double yty = y.squaredNorm();
    const Eigen::MatrixXd xtx = X.transpose() * X;
    const Eigen::VectorXd xty = X.transpose() * y;
    const Eigen::MatrixXd xtx_inv = xtx.inverse();
    const double logdet = std::log(xtx.determinant());
    const Eigen::VectorXd ols = xtx_inv * xty;
    const Eigen::VectorXd centre = ols * (g / (1.0 + g));
    const double rss_min = yty - ols.dot(xty);

    const double u0 = std::log(yty / n1);
    const double L0 = -0.5 * n1 * (log2pi + u0) - yty / (2.0 * std::exp(u0));

    auto integrate_u = [&](double lo, double hi, const std::function<double(double)>& f) {
        double total = 0.0;
        for (double a = lo; a < hi; a += 0.5) total += gauss<double, 20>::integrate(f, a, a + 0.5);
        return total;
    };

    const double null = integrate_u(u0 - 8.0, u0 + 25.0, [&](double u) {
        return std::exp(-0.5 * n1 * (log2pi + u) - yty / (2.0 * std::exp(u)) - L0);
    });

    std::vector<double> beta(k);
    const double model = integrate_u(std::log(rss_min / n1) - 8.0, u0 + 25.0, [&](double u) {
        const double s2 = std::exp(u);
        const double fixed = -0.5 * n1 * (log2pi + u) - 0.5 * static_cast<double>(k) * (log2pi + std::log(g * s2)) +
                             0.5 * logdet - L0;
        auto log_f = [&]() {
            double btxy = 0.0, quad = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                btxy += beta[i] * xty(static_cast<Eigen::Index>(i));
                for (std::size_t j = 0; j < k; ++j) {
                    quad += beta[i] * beta[j] * xtx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                }
            }
            const double rss = yty - 2.0 * btxy + quad;
            return fixed - rss / (2.0 * s2) - quad / (2.0 * g * s2);
        };
        std::function<double(std::size_t)> nest = [&](std::size_t d) -> double {
            if (d == k) return std::exp(log_f());
            const auto i = static_cast<Eigen::Index>(d);
            const double sd = std::sqrt(s2 * xtx_inv(i, i));
            auto f = [&](double b) {
                beta[d] = b;
                return nest(d + 1);
            };
            double s = 0.0;
            for (int piece = -7; piece < 7; ++piece) {
                const double lo = centre(i) + 2.0 * sd * piece;
                s += gauss<double, 20>::integrate(f, lo, lo + 2.0 * sd);
            }
            return s;
        };
        return nest(0);
    });
    return std::log(model / null);
}

struct HyperGReference {
    double log_ml;
    double mean_t;
    double mean_t2;
};

// Hyper-g evidence in the shrinkage variable t = g / (1 + g) on [0, 1):
// (a-2)/2 (1-t)^((k+a)/2-2) (1-t R^2)^(-(n-1)/2), by tanh-sinh quadrature.
inline HyperGReference hyper_g_reference(double r2, std::size_t n, std::size_t k, double a) {
    boost::math::quadrature::tanh_sinh<double> q(15);
    const double n1 = static_cast<double>(n) - 1.0;
    const double e = (static_cast<double>(k) + a) / 2.0 - 2.0;
    // Scaled by (1-R^2)^((n-1)/2) so the integrand stays within [0, 1].
    auto base = [&](double t, double tc) {
        const double one_minus_t = tc > 0.0 ? tc : 1.0 - t;
        return (a - 2.0) / 2.0 * std::pow(one_minus_t, e) *
               std::exp(-0.5 * n1 * (std::log1p(-t * r2) - std::log1p(-r2)));
    };
    const double z0 = q.integrate(base, 0.0, 1.0, 1e-15);
    const double z1 = q.integrate([&](double t, double tc) { return t * base(t, tc); }, 0.0, 1.0, 1e-15);
    const double z2 = q.integrate([&](double t, double tc) { return t * t * base(t, tc); }, 0.0, 1.0, 1e-15);
    return {std::log(z0) - 0.5 * n1 * std::log1p(-r2), z1 / z0, z2 / z0};
}

// Centred random design with a single year so demeaning is plain centring.
// Column j is N(0,1) with pairwise correlation `rho`; y = X beta + noise.
inline powerpanel::PanelDesign random_design(std::mt19937_64& rng, std::size_t n, std::size_t K,
                                             const std::vector<double>& beta, double noise_sd, double rho = 0.3) {
    std::normal_distribution<double> z(0.0, 1.0);
    powerpanel::PanelDesign d;
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
    d.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double common = z(rng);
        for (std::size_t j = 0; j < K; ++j) {
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::sqrt(rho) * common + std::sqrt(1.0 - rho) * z(rng);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = noise_sd * z(rng);
        for (std::size_t j = 0; j < K && j < beta.size(); ++j) {
            v += beta[j] * d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        d.y(static_cast<Eigen::Index>(i)) = v;
    }
    d.X.rowwise() -= d.X.colwise().mean();
    d.y.array() -= d.y.mean();
    for (std::size_t j = 0; j < K; ++j) {
        d.var_meta.push_back({"x" + std::to_string(j + 1), powerpanel::VariableKind::firm_control, std::nullopt});
    }
    d.n_obs = n;
    d.year_index.assign(n, 2020);
    for (std::size_t i = 0; i < n; ++i) d.firm_ids.push_back("F" + std::to_string(i));
    return d;
}

// Exact weighted least squares at x0 with tricube weights over the q nearest
// neighbours; returns the intercept of the local polynomial in (x - x0).
inline double local_wls(const std::vector<double>& x, const std::vector<double>& y, double x0, double span,
                        int degree) {
    const std::size_t n = x.size();
    const std::size_t q = static_cast<std::size_t>(std::ceil(span * static_cast<double>(n)));
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(x[i] - x0);
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    const double h = sorted[q - 1];
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), degree + 1);
    Eigen::VectorXd w(static_cast<Eigen::Index>(n)), b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double u = dist[i] / h;
        const double t = u < 1.0 ? 1.0 - u * u * u : 0.0;
        w(static_cast<Eigen::Index>(i)) = t * t * t;
        for (int p = 0; p <= degree; ++p) A(static_cast<Eigen::Index>(i), p) = std::pow(x[i] - x0, p);
        b(static_cast<Eigen::Index>(i)) = y[i];
    }
    const Eigen::MatrixXd Aw = w.asDiagonal() * A;
    const Eigen::VectorXd coef = (A.transpose() * Aw).colPivHouseholderQr().solve(Aw.transpose() * b);
    return coef(0);
}

}  // namespace oracle
