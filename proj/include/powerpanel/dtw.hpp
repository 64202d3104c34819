#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "powerpanel/panel.hpp"
#include "powerpanel/technology.hpp"

namespace powerpanel {

struct ShareTrajectory {
    std::string firm_id;
    std::vector<int> years;
    std::vector<TechVector> shares;

    std::size_t length() const noexcept { return shares.size(); }
};

// Checks strictly increasing years, row sums within 1e-9 of 1, and length >= 2.
void validate(const ShareTrajectory& trajectory);

// One trajectory per firm built from the rows that carry tech shares. Firms
// with fewer than two such years are left out.
std::vector<ShareTrajectory> build_trajectories(const PanelDataset& dataset);

struct DtwOptions {
    // Sakoe-Chiba band half-width; nullopt leaves alignment unconstrained.
    std::optional<int> window;
    // Divide the cumulative cost by (len(a) + len(b)).
    bool normalize = false;
};

// Classic symmetric DTW over row-major series of `dim`-vectors with Euclidean
// local cost. No minimum length is enforced here.
double dtw_raw(std::span<const double> a, std::span<const double> b, std::size_t dim,
               std::optional<int> window = std::nullopt);

double dtw_distance(const ShareTrajectory& a, const ShareTrajectory& b, const DtwOptions& options = {});

// Symmetric pairwise DTW matrix; each unordered pair is evaluated once.
Eigen::MatrixXd distance_matrix(const std::vector<ShareTrajectory>& trajectories,
                                const DtwOptions& options = {});

}  // namespace powerpanel
