#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "powerpanel/clustering.hpp"
#include "powerpanel/panel.hpp"

namespace powerpanel {

struct YearStat {
    int year = 0;
    double mean_roa = 0.0;
    double se_mean = 0.0;
    std::size_t n_firms = 0;
    // True when a single observation leaves the standard error undefined.
    bool single_observation = false;
};

struct ClusterTrajectory {
    std::size_t cluster = 0;
    std::string label;
    std::vector<YearStat> years;
};

// Per (cluster, year) mean ROA, standard error and count over member
// firm-years. Clusters without any ROA observation are omitted and listed in
// `warnings` when given.
std::vector<ClusterTrajectory> cluster_roa_trajectories(const PanelDataset& dataset,
                                                        const ClusterAssignment& assignment,
                                                        std::vector<std::string>* warnings = nullptr);

struct TrendDelta {
    double total = 0.0;
    double yearly = 0.0;
};

TrendDelta trend_delta(const ClusterTrajectory& trajectory, int from_year, int to_year);

struct LoessPoint {
    double x = 0.0;
    double fit = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double se = 0.0;
};

struct LoessOptions {
    double span = 0.75;
    int degree = 1;
};

// Local polynomial regression with tricube weights over the ceil(span * n)
// nearest neighbours, evaluated at `at` (defaults to the data abscissae).
// The band is fit +/- 1.96 standard errors of the local weighted fit.
std::vector<LoessPoint> loess(const std::vector<double>& x, const std::vector<double>& y,
                              const LoessOptions& options = {}, const std::vector<double>& at = {});

enum class PortfolioGroup { renewable, fossil };

std::string_view to_string(PortfolioGroup group) noexcept;

// Renewable: wind or solar dominated clusters. Fossil: coal, gas or oil.
std::optional<PortfolioGroup> portfolio_group(Technology dominant) noexcept;

struct RegionEntry {
    std::string region;
    std::optional<double> latitude;
    std::optional<double> longitude;
};

using RegionMap = std::map<std::string, RegionEntry>;

// UN geoscheme sub-regions for European ISO alpha-2 codes.
RegionMap default_region_map();

// CSV with columns country, region and optional latitude, longitude.
RegionMap read_region_map(const std::filesystem::path& path);

inline constexpr const char* kAllEurope = "All-Europe";

struct RegionalRow {
    std::string region;
    PortfolioGroup group = PortfolioGroup::renewable;
    double mean_roa = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::size_t n_firms = 0;
    std::size_t n_firm_years = 0;
};

// Mean ROA over firm-years per (region, group) with t-based 95% intervals,
// plus All-Europe rows.
std::vector<RegionalRow> regional_means(const PanelDataset& dataset, const ClusterAssignment& assignment,
                                        const RegionMap& regions);

struct CountryRow {
    std::string country;
    std::string region;
    std::optional<double> renewable_mean;
    std::optional<double> fossil_mean;
    std::size_t renewable_firm_years = 0;
    std::size_t fossil_firm_years = 0;
    std::optional<double> latitude;
    std::optional<double> longitude;
};

std::vector<CountryRow> country_means(const PanelDataset& dataset, const ClusterAssignment& assignment,
                                      const RegionMap& regions);

}  // namespace powerpanel
