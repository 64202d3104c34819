#include "powerpanel/rolling.hpp"

#include "powerpanel/error.hpp"
#include "powerpanel/seeding.hpp"

namespace powerpanel {

std::vector<int> rolling_start_years(const RollingOptions& options) {
    if (options.window_len < 1) throw Error(ErrorKind::config, "rolling window length must be >= 1");
    std::vector<int> out;
    for (int s = options.first_start; s + options.window_len - 1 <= options.last_year; ++s) out.push_back(s);
    if (out.empty()) {
        throw Error(ErrorKind::config, "no rolling window of length " + std::to_string(options.window_len) +
                                           " fits in [" + std::to_string(options.first_start) + ", " +
                                           std::to_string(options.last_year) + "]");
    }
    return out;
}

std::vector<RollingWindow> rolling_bma(const PanelDataset& dataset, const ClusterAssignment& clusters,
                                       const DesignOptions& design_options, const BmaOptions& bma_options,
                                       const McmcOptions& mcmc, const RollingOptions& rolling) {
    std::vector<RollingWindow> out;
    for (int start : rolling_start_years(rolling)) {
        RollingWindow w;
        w.start_year = start;
        w.end_year = start + rolling.window_len - 1;
        const auto slice = window(dataset, start, rolling.window_len);
        auto filtered = drop_incomplete(slice, required_variables(slice, design_options));
        if (filtered.dataset.records.empty()) {
            throw Error(ErrorKind::empty_window, "window starting " + std::to_string(start) +
                                                     " has no complete rows");
        }
        w.design = build_design(filtered.dataset, clusters, design_options);
        McmcOptions chain = mcmc;
        chain.seed = derive_seed(mcmc.seed, static_cast<std::uint64_t>(start));
        w.result = mcmc_bma(w.design, bma_options, chain);
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace powerpanel
