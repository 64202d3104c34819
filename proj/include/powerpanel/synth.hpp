#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "powerpanel/bma.hpp"
#include "powerpanel/design.hpp"
#include "powerpanel/panel.hpp"
#include "powerpanel/technology.hpp"

namespace powerpanel {

struct ClusterSpec {
    std::size_t count = 0;
    Technology dominant = Technology::gas;
    double lead_lo = 0.79;
    double lead_hi = 0.97;
};

// Seeded synthetic panel. ROA is a year effect plus a linear combination of
// derived variables (keys of `beta`, using design column names) plus noise.
struct SynthConfig {
    std::size_t n_firms = 400;
    int first_year = 2014;
    int last_year = 2023;
    // Empty: one cluster per technology with equal counts.
    std::vector<ClusterSpec> clusters;
    std::map<std::string, double> beta;
    double noise_sd = 0.005;
    FocalSpec focal = FocalSpec::renewable;
    // Per-year coefficient on the focal share; replaces beta[focal] when set.
    std::optional<std::map<int, double>> focal_ramp;
    std::vector<std::string> macro_names = {"gdp_growth", "inflation"};
    std::vector<std::string> countries = {"DE", "FR", "NL", "BE", "AT", "DK", "SE", "FI", "GB",
                                          "ES", "IT", "PT", "GR", "PL", "CZ", "RO", "BG", "HU"};
    // Standard deviation of the yearly step of the leading share.
    double share_step = 0.02;
    std::uint64_t seed = 7;

    // Default coefficient set used by the CLI when none is configured.
    static std::map<std::string, double> default_beta();
};

struct GroundTruth {
    std::uint64_t seed = 0;
    double noise_sd = 0.0;
    FocalSpec focal = FocalSpec::renewable;
    std::map<std::string, double> beta;
    std::optional<std::map<int, double>> focal_ramp;
    std::vector<ClusterSpec> clusters;
    // Planted cluster index per firm.
    std::map<std::string, std::size_t> firm_cluster;
};

struct SynthPanel {
    PanelDataset dataset;
    GroundTruth truth;
};

// Raw records (financials, capacities, macro); call derive_variables next.
SynthPanel generate_panel(SynthConfig config);

// Writes financials.csv, capacities.csv, macro.csv and ground_truth.json.
void write_synth_files(const SynthPanel& panel, const std::filesystem::path& dir);

std::string ground_truth_json(const GroundTruth& truth);
GroundTruth read_ground_truth(const std::filesystem::path& path);

enum class RecoveryExpectation { strong, null_effect, indeterminate };

struct RecoveryRow {
    std::string name;
    double beta_true = 0.0;
    double threshold = 0.0;
    RecoveryExpectation expectation = RecoveryExpectation::indeterminate;
    double pip = 0.0;
    double post_mean = 0.0;
    bool pass = true;
};

// Detectable planted effects (|beta| >= 3 noise_sd / (sqrt(n) column_sd),
// where column_sd is the spread left after regressing the column on the
// other candidates) must reach PIP > 0.9 with the right sign; zero effects
// must stay below PIP 0.5.
std::vector<RecoveryRow> planted_recovery_report(const PanelDesign& design, const GroundTruth& truth,
                                                 const BmaResult& result);

}  // namespace powerpanel
