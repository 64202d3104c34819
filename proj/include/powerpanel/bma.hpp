#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "powerpanel/design.hpp"
#include "powerpanel/gprior.hpp"

namespace powerpanel {

inline constexpr std::size_t kMaxColumns = 32;
inline constexpr std::size_t kEnumerationCap = 20;

// Inclusion bitmask over the candidate columns of a design.
class ModelId {
public:
    constexpr ModelId() = default;
    explicit constexpr ModelId(std::uint32_t bits) : bits_(bits) {}

    constexpr std::uint32_t bits() const noexcept { return bits_; }
    constexpr bool contains(std::size_t column) const noexcept { return (bits_ >> column) & 1U; }
    constexpr ModelId toggled(std::size_t column) const noexcept { return ModelId(bits_ ^ (1U << column)); }
    constexpr ModelId with(std::size_t column) const noexcept { return ModelId(bits_ | (1U << column)); }
    constexpr std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
    std::vector<std::size_t> columns() const;

    friend constexpr auto operator<=>(ModelId, ModelId) = default;

private:
    std::uint32_t bits_ = 0;
};

enum class ModelPriorKind { uniform, beta_binomial };

std::string_view to_string(ModelPriorKind kind) noexcept;
ModelPriorKind parse_model_prior(std::string_view text);

// uniform: -K log 2. beta-binomial: -log(K+1) - log C(K, size).
double log_model_prior(ModelId model, std::size_t K, ModelPriorKind kind);
double log_model_prior_size(std::size_t size, std::size_t K, ModelPriorKind kind);

// Strong heredity: every included interaction has both parents included.
bool heredity_valid(ModelId model, std::span<const VariableMeta> meta);

struct ModelFit {
    double r2 = 0.0;
    double log_ml = 0.0;
    double shrinkage_mean = 0.0;
    double shrinkage_sq_mean = 0.0;
};

// Caches per-model fits from the design's Gram matrix.
class ModelEvaluator {
public:
    ModelEvaluator(const PanelDesign& design, GPriorSpec prior, ModelPriorKind model_prior);

    const ModelFit& fit(ModelId model);
    double log_posterior(ModelId model);

    // Least-squares coefficients and diagonal of (X'X)^-1 for the model's
    // columns, in ascending column order.
    struct Ols {
        Eigen::VectorXd beta;
        Eigen::VectorXd inverse_diag;
        double r2 = 0.0;
    };
    Ols ols(ModelId model) const;

    std::size_t columns() const noexcept { return K_; }
    std::size_t n() const noexcept { return n_; }
    double yty() const noexcept { return yty_; }
    const GPriorSpec& prior() const noexcept { return prior_; }
    std::size_t cache_size() const noexcept { return cache_.size(); }

private:
    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
    double yty_ = 0.0;
    std::size_t n_ = 0;
    std::size_t K_ = 0;
    GPriorSpec prior_;
    ModelPriorKind model_prior_;
    std::unordered_map<std::uint32_t, ModelFit> cache_;
};

double log_marginal_likelihood(const PanelDesign& design, ModelId model, const GPriorSpec& prior);

struct BmaOptions {
    GPriorKind prior = GPriorKind::hyper_uip;
    // Overrides the calibrated prior when set (e.g. a custom hyper-g shape).
    std::optional<GPriorSpec> prior_override;
    ModelPriorKind model_prior = ModelPriorKind::beta_binomial;
    bool heredity = true;
};

struct McmcOptions {
    std::size_t iterations = 200000;
    std::size_t burnin = 20000;
    std::uint64_t seed = 1;
};

struct VisitedModel {
    ModelId model;
    double log_posterior = 0.0;
    // Analytic posterior probability renormalized over the visited set.
    double probability = 0.0;
    std::uint64_t visits = 0;
};

inline constexpr std::size_t kDensityPoints = 512;

struct DensityGrid {
    std::vector<double> x;
    std::vector<double> density;
    // Weight of the point mass at zero, 1 - PIP.
    double zero_mass = 1.0;

    // Trapezoid integral of the continuous part plus the zero mass.
    double total_mass() const;
};

struct CoefficientPosterior {
    std::string name;
    double pip = 0.0;
    double mean_uncond = 0.0;
    double sd_uncond = 0.0;
    double mean_cond = 0.0;
    double sd_cond = 0.0;
    double ci90_low = 0.0;
    double ci90_high = 0.0;
    DensityGrid density;
};

struct BmaDiagnostics {
    bool exhaustive = false;
    std::size_t iterations = 0;
    std::size_t burnin = 0;
    std::uint64_t seed = 0;
    std::size_t accepted = 0;
    double acceptance_rate = 0.0;
    std::size_t unique_models = 0;
    // Pearson correlation of analytic probabilities and visit frequencies
    // over the top models; NaN for enumeration.
    double frequency_correlation = 0.0;
    std::vector<double> pip_frequency;
    std::vector<std::string> warnings;
};

struct BmaResult {
    std::vector<std::string> names;
    GPriorSpec prior;
    ModelPriorKind model_prior = ModelPriorKind::beta_binomial;
    bool heredity = true;
    std::size_t n_obs = 0;
    // Sorted by decreasing probability, ties by bitmask.
    std::vector<VisitedModel> models;
    std::vector<double> pip;
    std::vector<CoefficientPosterior> coefficients;
    BmaDiagnostics diagnostics;
};

BmaResult enumerate_bma(const PanelDesign& design, const BmaOptions& options = {});

BmaResult mcmc_bma(const PanelDesign& design, const BmaOptions& options = {}, const McmcOptions& mcmc = {});

// Model-averaged moments, 90% equal-tailed interval and density grid for one
// column, computed from the result's model ledger.
CoefficientPosterior coefficient_posterior(const BmaResult& result, const PanelDesign& design, std::size_t column);
CoefficientPosterior coefficient_posterior(const BmaResult& result, const PanelDesign& design,
                                           std::string_view name);

// All columns at once (one least-squares solve per model).
std::vector<CoefficientPosterior> coefficient_posteriors(const BmaResult& result, const PanelDesign& design);

}  // namespace powerpanel
