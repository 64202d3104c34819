#include "powerpanel/bma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <boost/math/distributions/students_t.hpp>

#include "powerpanel/error.hpp"

namespace powerpanel {

std::vector<std::size_t> ModelId::columns() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < kMaxColumns; ++j) {
        if (contains(j)) out.push_back(j);
    }
    return out;
}

std::string_view to_string(ModelPriorKind kind) noexcept {
    return kind == ModelPriorKind::uniform ? "uniform" : "beta_binomial";
}

ModelPriorKind parse_model_prior(std::string_view text) {
    if (text == "uniform") return ModelPriorKind::uniform;
    if (text == "beta_binomial" || text == "beta-binomial") return ModelPriorKind::beta_binomial;
    throw Error(ErrorKind::config, "unknown model prior '" + std::string(text) + "'");
}

double log_model_prior_size(std::size_t size, std::size_t K, ModelPriorKind kind) {
    const auto Kd = static_cast<double>(K);
    if (kind == ModelPriorKind::uniform) return -Kd * std::log(2.0);
    const auto kd = static_cast<double>(size);
    return -std::log(Kd + 1.0) - (std::lgamma(Kd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(Kd - kd + 1.0));
}

double log_model_prior(ModelId model, std::size_t K, ModelPriorKind kind) {
    return log_model_prior_size(model.size(), K, kind);
}

bool heredity_valid(ModelId model, std::span<const VariableMeta> meta) {
    for (std::size_t j = 0; j < meta.size(); ++j) {
        if (!model.contains(j) || !meta[j].heredity_parents) continue;
        const auto [p, q] = *meta[j].heredity_parents;
        if (!model.contains(p) || !model.contains(q)) return false;
    }
    return true;
}

ModelEvaluator::ModelEvaluator(const PanelDesign& design, GPriorSpec prior, ModelPriorKind model_prior)
    : gram_(design.X.transpose() * design.X),
      xty_(design.X.transpose() * design.y),
      yty_(design.y.squaredNorm()),
      n_(static_cast<std::size_t>(design.y.size())),
      K_(static_cast<std::size_t>(design.X.cols())),
      prior_(prior),
      model_prior_(model_prior) {
    if (K_ > kMaxColumns) {
        throw Error(ErrorKind::capacity, std::to_string(K_) + " columns exceed the model bitmask width");
    }
    if (!(yty_ > 0.0)) throw Error(ErrorKind::input, "outcome has zero variation");
}

ModelEvaluator::Ols ModelEvaluator::ols(ModelId model) const {
    const auto cols = model.columns();
    const auto k = static_cast<Eigen::Index>(cols.size());
    Ols out;
    out.beta.resize(k);
    out.inverse_diag.resize(k);
    if (k == 0) return out;

    // Work on the correlation-scaled Gram matrix so the pivot test is
    // independent of column units.
    Eigen::VectorXd scale(k);
    Eigen::MatrixXd c(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto ci = static_cast<Eigen::Index>(cols[static_cast<std::size_t>(i)]);
        scale(i) = 1.0 / std::sqrt(gram_(ci, ci));
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto ci = static_cast<Eigen::Index>(cols[static_cast<std::size_t>(i)]);
        b(i) = xty_(ci) * scale(i);
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto cj = static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]);
            c(i, j) = gram_(ci, cj) * scale(i) * scale(j);
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success || llt.matrixLLT().diagonal().array().square().minCoeff() < 1e-12) {
        std::string names;
        for (auto j : cols) names += (names.empty() ? "" : ",") + std::to_string(j);
        throw Error(ErrorKind::singular_model, "model columns {" + names + "} are linearly dependent");
    }
    const Eigen::VectorXd beta_scaled = llt.solve(b);
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    out.beta = beta_scaled.cwiseProduct(scale);
    out.inverse_diag = inv.diagonal().cwiseProduct(scale.cwiseProduct(scale));
    out.r2 = std::clamp(b.dot(beta_scaled) / yty_, 0.0, 1.0);
    return out;
}

const ModelFit& ModelEvaluator::fit(ModelId model) {
    if (auto it = cache_.find(model.bits()); it != cache_.end()) return it->second;
    const std::size_t k = model.size();
    if (k > 0 && n_ <= k + 1) {
        throw Error(ErrorKind::input, "model with " + std::to_string(k) + " columns needs n > " +
                                          std::to_string(k + 1) + " observations");
    }
    ModelFit fit;
    if (k > 0) fit.r2 = ols(model).r2;
    const auto s = evaluate_gprior(prior_, fit.r2, n_, k);
    fit.log_ml = s.log_ml;
    fit.shrinkage_mean = s.shrinkage_mean;
    fit.shrinkage_sq_mean = s.shrinkage_sq_mean;
    return cache_.emplace(model.bits(), fit).first->second;
}

double ModelEvaluator::log_posterior(ModelId model) {
    return fit(model).log_ml + log_model_prior(model, K_, model_prior_);
}

double log_marginal_likelihood(const PanelDesign& design, ModelId model, const GPriorSpec& prior) {
    ModelEvaluator ev(design, prior, ModelPriorKind::uniform);
    return ev.fit(model).log_ml;
}

namespace {

GPriorSpec resolve_prior(const PanelDesign& design, const BmaOptions& options) {
    if (options.prior_override) return *options.prior_override;
    return GPriorSpec::make(options.prior, static_cast<std::size_t>(design.y.size()),
                            static_cast<std::size_t>(design.X.cols()));
}

BmaResult make_result(const PanelDesign& design, const BmaOptions& options, const GPriorSpec& prior) {
    BmaResult r;
    for (const auto& m : design.var_meta) r.names.push_back(m.name);
    r.prior = prior;
    r.model_prior = options.model_prior;
    r.heredity = options.heredity;
    r.n_obs = static_cast<std::size_t>(design.y.size());
    return r;
}

// Normalizes analytic weights over the ledger, sorts it and fills PIPs and
// coefficient summaries.
void finalize(BmaResult& result, const PanelDesign& design) {
    auto& models = result.models;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& m : models) top = std::max(top, m.log_posterior);
    double total = 0.0;
    for (auto& m : models) {
        m.probability = std::exp(m.log_posterior - top);
        total += m.probability;
    }
    for (auto& m : models) m.probability /= total;
    std::sort(models.begin(), models.end(), [](const VisitedModel& a, const VisitedModel& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.model < b.model;
    });
    const std::size_t K = result.names.size();
    result.pip.assign(K, 0.0);
    for (const auto& m : models) {
        for (std::size_t j = 0; j < K; ++j) {
            if (m.model.contains(j)) result.pip[j] += m.probability;
        }
    }
    result.diagnostics.unique_models = models.size();
    result.coefficients = coefficient_posteriors(result, design);
}

}  // namespace

BmaResult enumerate_bma(const PanelDesign& design, const BmaOptions& options) {
    const std::size_t K = design.columns();
    if (K > kEnumerationCap) {
        throw Error(ErrorKind::capacity, "enumeration supports at most " + std::to_string(kEnumerationCap) +
                                             " columns, design has " + std::to_string(K));
    }
    const auto prior = resolve_prior(design, options);
    auto result = make_result(design, options, prior);
    if (K > 16) result.diagnostics.warnings.push_back("enumerating 2^" + std::to_string(K) + " models");
    result.diagnostics.exhaustive = true;
    result.diagnostics.frequency_correlation = std::numeric_limits<double>::quiet_NaN();

    ModelEvaluator ev(design, prior, options.model_prior);
    const std::uint64_t count = std::uint64_t{1} << K;
    for (std::uint64_t bits = 0; bits < count; ++bits) {
        const ModelId model(static_cast<std::uint32_t>(bits));
        if (options.heredity && !heredity_valid(model, design.var_meta)) continue;
        result.models.push_back({model, ev.log_posterior(model), 0.0, 0});
    }
    finalize(result, design);
    result.diagnostics.pip_frequency = result.pip;
    return result;
}

BmaResult mcmc_bma(const PanelDesign& design, const BmaOptions& options, const McmcOptions& mcmc) {
    if (mcmc.iterations <= mcmc.burnin) {
        throw Error(ErrorKind::config, "iterations must exceed burn-in");
    }
    const std::size_t K = design.columns();
    if (K == 0) throw Error(ErrorKind::input, "design has no candidate columns");
    const auto prior = resolve_prior(design, options);
    auto result = make_result(design, options, prior);
    auto& diag = result.diagnostics;
    diag.iterations = mcmc.iterations;
    diag.burnin = mcmc.burnin;
    diag.seed = mcmc.seed;

    ModelEvaluator ev(design, prior, options.model_prior);
    std::mt19937_64 rng(mcmc.seed);
    std::uniform_int_distribution<std::size_t> pick(0, K - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ModelId current;
    double current_lp = ev.log_posterior(current);
    std::unordered_map<std::uint32_t, std::uint64_t> visits;
    for (std::size_t it = 0; it < mcmc.iterations; ++it) {
        const ModelId proposal = current.toggled(pick(rng));
        bool accepted = false;
        if (!options.heredity || heredity_valid(proposal, design.var_meta)) {
            const double lp = ev.log_posterior(proposal);
            const double u = unif(rng);
            if (std::log(u) < lp - current_lp) {
                current = proposal;
                current_lp = lp;
                accepted = true;
            }
        }
        if (it >= mcmc.burnin) {
            ++visits[current.bits()];
            if (accepted) ++diag.accepted;
        }
    }
    const std::size_t kept = mcmc.iterations - mcmc.burnin;
    if (diag.accepted == 0) {
        throw Error(ErrorKind::mixing_failure, "no proposal accepted after burn-in (" + std::to_string(kept) +
                                                   " iterations, seed " + std::to_string(mcmc.seed) + ")");
    }
    diag.acceptance_rate = static_cast<double>(diag.accepted) / static_cast<double>(kept);

    for (const auto& [bits, count] : visits) {
        const ModelId model(bits);
        result.models.push_back({model, ev.log_posterior(model), 0.0, count});
    }
    finalize(result, design);

    diag.pip_frequency.assign(K, 0.0);
    for (const auto& m : result.models) {
        const double f = static_cast<double>(m.visits) / static_cast<double>(kept);
        for (std::size_t j = 0; j < K; ++j) {
            if (m.model.contains(j)) diag.pip_frequency[j] += f;
        }
    }
    const std::size_t top = std::min<std::size_t>(50, result.models.size());
    double mp = 0.0, mf = 0.0;
    for (std::size_t i = 0; i < top; ++i) {
        mp += result.models[i].probability;
        mf += static_cast<double>(result.models[i].visits) / static_cast<double>(kept);
    }
    mp /= static_cast<double>(top);
    mf /= static_cast<double>(top);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < top; ++i) {
        const double dp = result.models[i].probability - mp;
        const double df = static_cast<double>(result.models[i].visits) / static_cast<double>(kept) - mf;
        sxy += dp * df;
        sxx += dp * dp;
        syy += df * df;
    }
    diag.frequency_correlation =
        (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : std::numeric_limits<double>::quiet_NaN();
    return result;
}

double DensityGrid::total_mass() const {
    double mass = zero_mass;
    for (std::size_t i = 1; i < x.size(); ++i) mass += 0.5 * (x[i] - x[i - 1]) * (density[i] + density[i - 1]);
    return mass;
}

namespace {

struct Component {
    double weight;
    double location;
    double scale;
};

// Mixture of location-scale Student-t components plus a point mass at zero.
class Mixture {
public:
    Mixture(std::vector<Component> components, double zero_mass, double dof)
        : components_(std::move(components)), zero_mass_(zero_mass), dof_(dof), dist_(dof) {
        log_norm_ = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * M_PI);
    }

    double cdf(double x) const {
        double f = x >= 0.0 ? zero_mass_ : 0.0;
        for (const auto& c : components_) f += c.weight * boost::math::cdf(dist_, (x - c.location) / c.scale);
        return f;
    }

    double pdf(double x) const {
        double f = 0.0;
        for (const auto& c : components_) {
            const double z = (x - c.location) / c.scale;
            f += c.weight * std::exp(log_norm_ - 0.5 * (dof_ + 1.0) * std::log1p(z * z / dof_)) / c.scale;
        }
        return f;
    }

    // Smallest x with cdf(x) >= q: Newton steps on the continuous part,
    // falling back to bisection whenever a step leaves the bracket.
    double quantile(double q) const {
        double lo = 0.0, hi = 0.0;
        for (const auto& c : components_) {
            lo = std::min(lo, c.location - 10.0 * c.scale);
            hi = std::max(hi, c.location + 10.0 * c.scale);
        }
        const double width = std::max(hi - lo, 1e-300);
        while (cdf(lo) >= q) lo -= width;
        while (cdf(hi) < q) hi += width;
        // The zero atom absorbs any bracket that straddles it.
        if (lo < 0.0 && hi >= 0.0 && zero_mass_ > 0.0) {
            const double at = cdf(0.0);
            if (at >= q && at - zero_mass_ < q) return 0.0;
            if (at >= q) {
                hi = 0.0;
            } else {
                lo = 0.0;
            }
        }
        double x = 0.5 * (lo + hi);
        for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++i) {
            const double f = cdf(x) - q;
            if (f >= 0.0) {
                hi = x;
            } else {
                lo = x;
            }
            const double d = pdf(x);
            double next = d > 0.0 ? x - f / d : lo - 1.0;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
                // converged on a root of the continuous part
                return cdf(x) >= q ? x : std::nextafter(x, hi);
            }
            x = next;
        }
        return hi;
    }

    std::pair<double, double> support(double tail) const {
        const double qt = boost::math::quantile(dist_, tail);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& c : components_) {
            lo = std::min(lo, c.location + qt * c.scale);
            hi = std::max(hi, c.location - qt * c.scale);
        }
        return {lo, hi};
    }

private:
    std::vector<Component> components_;
    double zero_mass_;
    double dof_;
    double log_norm_ = 0.0;
    boost::math::students_t_distribution<double> dist_;
};

}  // namespace

std::vector<CoefficientPosterior> coefficient_posteriors(const BmaResult& result, const PanelDesign& design) {
    const std::size_t K = design.columns();
    if (result.names.size() != K) throw Error(ErrorKind::catalogue, "result and design disagree on columns");
    ModelEvaluator ev(design, result.prior, result.model_prior);
    const auto n = static_cast<double>(ev.n());
    const double dof = n - 1.0;
    if (n <= 3.0) throw Error(ErrorKind::input, "coefficient moments need more than 3 observations");

    std::vector<std::vector<Component>> comps(K);
    std::vector<double> pip(K, 0.0), m1(K, 0.0), m2(K, 0.0);
    for (const auto& vm : result.models) {
        if (vm.model.size() == 0 || vm.probability <= 0.0) continue;
        const auto& fit = ev.fit(vm.model);
        const auto o = ev.ols(vm.model);
        const auto cols = vm.model.columns();
        const double et = fit.shrinkage_mean;
        const double et2 = fit.shrinkage_sq_mean;
        const double resid = ev.yty() * std::max(et - o.r2 * et2, 0.0) / (n - 3.0);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            const double mean = et * o.beta(idx);
            const double var = resid * o.inverse_diag(idx) + std::max(et2 - et * et, 0.0) * o.beta(idx) * o.beta(idx);
            const std::size_t j = cols[i];
            pip[j] += vm.probability;
            m1[j] += vm.probability * mean;
            m2[j] += vm.probability * (var + mean * mean);
            comps[j].push_back({vm.probability, mean, std::sqrt(var * (dof - 2.0) / dof)});
        }
    }

    std::vector<CoefficientPosterior> out(K);
    for (std::size_t j = 0; j < K; ++j) {
        auto& cp = out[j];
        cp.name = result.names[j];
        cp.pip = std::min(pip[j], 1.0);
        cp.mean_uncond = m1[j];
        cp.sd_uncond = std::sqrt(std::max(m2[j] - m1[j] * m1[j], 0.0));
        if (pip[j] > 0.0) {
            cp.mean_cond = m1[j] / pip[j];
            cp.sd_cond = std::sqrt(std::max(m2[j] / pip[j] - cp.mean_cond * cp.mean_cond, 0.0));
        }
        cp.density.zero_mass = std::max(1.0 - pip[j], 0.0);

        // Components carrying a negligible share of the mass are left out of
        // the interval and grid evaluation.
        auto& cs = comps[j];
        std::sort(cs.begin(), cs.end(), [](const Component& a, const Component& b) { return a.weight > b.weight; });
        double kept = 0.0;
        std::size_t keep = 0;
        while (keep < cs.size() && kept < pip[j] * (1.0 - 1e-12)) kept += cs[keep++].weight;
        cs.resize(keep);

        cp.density.x.resize(kDensityPoints);
        cp.density.density.assign(kDensityPoints, 0.0);
        if (cs.empty()) {
            for (std::size_t i = 0; i < kDensityPoints; ++i) {
                cp.density.x[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(kDensityPoints - 1);
            }
            continue;
        }
        const Mixture mix(cs, cp.density.zero_mass, dof);
        cp.ci90_low = mix.quantile(0.05);
        cp.ci90_high = mix.quantile(0.95);
        const auto [lo, hi] = mix.support(1e-10);
        for (std::size_t i = 0; i < kDensityPoints; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kDensityPoints - 1);
            cp.density.x[i] = x;
            cp.density.density[i] = mix.pdf(x);
        }
    }
    return out;
}

CoefficientPosterior coefficient_posterior(const BmaResult& result, const PanelDesign& design, std::size_t column) {
    if (column >= design.columns()) {
        throw Error(ErrorKind::catalogue, "column " + std::to_string(column) + " is not in the design");
    }
    if (result.coefficients.size() == design.columns()) return result.coefficients[column];
    return coefficient_posteriors(result, design)[column];
}

CoefficientPosterior coefficient_posterior(const BmaResult& result, const PanelDesign& design,
                                           std::string_view name) {
    const auto idx = design.find(name);
    if (!idx) throw Error(ErrorKind::catalogue, "unknown variable '" + std::string(name) + "'");
    return coefficient_posterior(result, design, *idx);
}

}  // namespace powerpanel
