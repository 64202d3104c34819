#pragma once

// Synthetic panels with their planted cluster labels, for tests that need a
// realistic dataset without running the clustering stage.

#include "powerpanel/clustering.hpp"
#include "powerpanel/panel.hpp"
#include "powerpanel/synth.hpp"

namespace fixture {

struct LabelledPanel {
    powerpanel::PanelDataset dataset;
    powerpanel::ClusterAssignment clusters;
    powerpanel::GroundTruth truth;
};

inline powerpanel::ClusterAssignment planted_assignment(const powerpanel::GroundTruth& truth) {
    powerpanel::ClusterAssignment a;
    a.k = truth.clusters.size();
    a.labels = truth.firm_cluster;
    a.medoids.assign(a.k, "");
    for (const auto& [firm, c] : truth.firm_cluster) {
        if (a.medoids[c].empty()) a.medoids[c] = firm;
    }
    for (const auto& c : truth.clusters) a.dominant.push_back({c.dominant, (c.lead_lo + c.lead_hi) / 2.0, false});
    return a;
}

inline LabelledPanel labelled_panel(const powerpanel::SynthConfig& config) {
    auto panel = powerpanel::generate_panel(config);
    LabelledPanel out;
    out.dataset = powerpanel::derive_variables(std::move(panel.dataset));
    out.clusters = planted_assignment(panel.truth);
    out.truth = std::move(panel.truth);
    return out;
}

}  // namespace fixture
