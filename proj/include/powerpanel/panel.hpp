#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "powerpanel/technology.hpp"

namespace powerpanel {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Ratios and shares computed from one firm-year. Missing values are NaN.
struct DerivedRow {
    double roa = kMissing;
    double roe = kMissing;
    double leverage = kMissing;
    double size = kMissing;
    double sales_growth = kMissing;
    double renewable_share = kMissing;
    double fossil_share = kMissing;
    std::optional<TechVector> tech_shares;
    std::map<std::string, double> macro_controls;
};

struct FirmYearRecord {
    std::string firm_id;
    int year = 0;
    std::string country;
    double net_income = kMissing;
    double total_assets = kMissing;
    double total_equity = kMissing;
    double total_debt = kMissing;
    double sales = kMissing;
    // Absent when the capacities file has no rows for this firm-year.
    std::optional<TechVector> capacity_mw;
    std::map<std::string, double> macro;
    // Set when ratios or shares cannot be formed; the row is kept.
    bool incomplete = false;
    std::size_t source_line = 0;
    std::optional<DerivedRow> derived;
};

struct PanelDataset {
    // Sorted by (firm_id, year).
    std::vector<FirmYearRecord> records;
    std::vector<std::string> macro_names;
    // Row-numbered messages for rejected or suspicious input rows.
    std::vector<std::string> diagnostics;

    std::vector<int> years() const;
};

struct PanelFiles {
    std::filesystem::path financials;
    std::filesystem::path capacities;
    std::filesystem::path macro;
};

PanelDataset ingest_panel(const PanelFiles& files);

// Post-derivation hook applied to every row, e.g. for trimming or
// winsorizing ratios. Empty by default: no trimming is applied.
using RatioHook = std::function<void(FirmYearRecord&)>;

PanelDataset derive_variables(PanelDataset dataset, const RatioHook& hook = {});

// Names accepted by drop_incomplete and the design builder: roa, roe,
// leverage, size, sales_growth, renewable_share, fossil_share, share_<tech>,
// plus every macro column of the dataset.
std::vector<std::string> variable_catalogue(const PanelDataset& dataset);

// Value of a catalogue variable for one row; NaN when missing, nullopt when
// the name is not a known variable.
std::optional<double> variable_value(const FirmYearRecord& record, std::string_view name);

struct FilterReport {
    PanelDataset dataset;
    std::map<std::string, std::size_t> dropped_per_variable;
    std::size_t rows_dropped = 0;
};

FilterReport drop_incomplete(const PanelDataset& dataset, const std::vector<std::string>& required);

// Rows with start_year <= year <= start_year + length_years - 1.
PanelDataset window(const PanelDataset& dataset, int start_year, int length_years);

// Subtracts the within-year mean from every value.
std::vector<double> demean_by_year(std::span<const double> values, std::span<const int> years);

}  // namespace powerpanel
