#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "powerpanel/clustering.hpp"
#include "powerpanel/panel.hpp"

namespace powerpanel {

enum class FocalSpec { renewable, fossil };
enum class Outcome { roa, roe };

std::string_view to_string(FocalSpec spec) noexcept;
std::string_view to_string(Outcome outcome) noexcept;
FocalSpec parse_focal_spec(std::string_view text);
Outcome parse_outcome(std::string_view text);

// Catalogue name of the focal share column for a specification.
std::string_view focal_variable(FocalSpec spec) noexcept;

enum class VariableKind { focal_share, firm_control, macro_control, cluster_indicator, interaction };

std::string_view to_string(VariableKind kind) noexcept;

struct VariableMeta {
    std::string name;
    VariableKind kind = VariableKind::firm_control;
    // Column indices of the two main effects of an interaction.
    std::optional<std::pair<std::size_t, std::size_t>> heredity_parents;
};

// Year-demeaned outcome and candidate regressors.
struct PanelDesign {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<VariableMeta> var_meta;
    std::size_t n_obs = 0;
    std::vector<int> year_index;
    std::vector<std::string> firm_ids;

    std::size_t columns() const noexcept { return var_meta.size(); }
    std::optional<std::size_t> find(std::string_view name) const;
};

struct DesignOptions {
    FocalSpec spec = FocalSpec::renewable;
    Outcome outcome = Outcome::roa;
    std::vector<std::string> firm_controls = {"leverage", "size", "sales_growth"};
    // Empty selects every macro column of the dataset.
    std::optional<std::vector<std::string>> macro_controls;
    bool include_interactions = true;
    Technology reference = Technology::gas;
};

// Variables a row must carry for build_design; feed to drop_incomplete.
std::vector<std::string> required_variables(const PanelDataset& dataset, const DesignOptions& options);

PanelDesign build_design(const PanelDataset& dataset, const ClusterAssignment& clusters,
                         const DesignOptions& options);

}  // namespace powerpanel
