#pragma once

#include <vector>

#include "powerpanel/bma.hpp"
#include "powerpanel/clustering.hpp"
#include "powerpanel/design.hpp"
#include "powerpanel/panel.hpp"

namespace powerpanel {

struct RollingOptions {
    int window_len = 6;
    // Windows start at first_start and must end by last_year.
    int first_start = 2014;
    int last_year = 2023;
};

std::vector<int> rolling_start_years(const RollingOptions& options);

struct RollingWindow {
    int start_year = 0;
    int end_year = 0;
    PanelDesign design;
    BmaResult result;
};

// One MCMC run per window: window -> drop_incomplete -> build_design ->
// mcmc_bma. Each window's chain seed is derived from the base seed and the
// window's start year.
std::vector<RollingWindow> rolling_bma(const PanelDataset& dataset, const ClusterAssignment& clusters,
                                       const DesignOptions& design_options, const BmaOptions& bma_options,
                                       const McmcOptions& mcmc, const RollingOptions& rolling);

}  // namespace powerpanel
