#include "powerpanel/design.hpp"

#include <cmath>
#include <set>

#include "powerpanel/error.hpp"

namespace powerpanel {

std::string_view to_string(FocalSpec spec) noexcept {
    return spec == FocalSpec::renewable ? "renewable" : "fossil";
}

std::string_view to_string(Outcome outcome) noexcept { return outcome == Outcome::roa ? "roa" : "roe"; }

FocalSpec parse_focal_spec(std::string_view text) {
    if (text == "renewable") return FocalSpec::renewable;
    if (text == "fossil") return FocalSpec::fossil;
    throw Error(ErrorKind::config, "unknown specification '" + std::string(text) + "'");
}

Outcome parse_outcome(std::string_view text) {
    if (text == "roa") return Outcome::roa;
    if (text == "roe") return Outcome::roe;
    throw Error(ErrorKind::config, "unknown outcome '" + std::string(text) + "'");
}

std::string_view focal_variable(FocalSpec spec) noexcept {
    return spec == FocalSpec::renewable ? "renewable_share" : "fossil_share";
}

std::string_view to_string(VariableKind kind) noexcept {
    switch (kind) {
        case VariableKind::focal_share: return "focal_share";
        case VariableKind::firm_control: return "firm_control";
        case VariableKind::macro_control: return "macro_control";
        case VariableKind::cluster_indicator: return "cluster_indicator";
        case VariableKind::interaction: return "interaction";
    }
    return "unknown";
}

std::optional<std::size_t> PanelDesign::find(std::string_view name) const {
    for (std::size_t i = 0; i < var_meta.size(); ++i) {
        if (var_meta[i].name == name) return i;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> macro_list(const PanelDataset& dataset, const DesignOptions& options) {
    return options.macro_controls ? *options.macro_controls : dataset.macro_names;
}

}  // namespace

std::vector<std::string> required_variables(const PanelDataset& dataset, const DesignOptions& options) {
    std::vector<std::string> req = {std::string(to_string(options.outcome)), std::string(focal_variable(options.spec))};
    req.insert(req.end(), options.firm_controls.begin(), options.firm_controls.end());
    const auto macros = macro_list(dataset, options);
    req.insert(req.end(), macros.begin(), macros.end());
    return req;
}

PanelDesign build_design(const PanelDataset& dataset, const ClusterAssignment& clusters,
                         const DesignOptions& options) {
    if (clusters.dominant.size() != clusters.k) {
        throw Error(ErrorKind::labeling, "cluster assignment carries no technology labels");
    }
    std::optional<std::size_t> reference;
    for (std::size_t c = 0; c < clusters.k; ++c) {
        if (clusters.dominant[c].technology == options.reference) {
            reference = c;
            break;
        }
    }
    if (!reference) {
        throw Error(ErrorKind::labeling, "no cluster is dominated by the reference technology '" +
                                             std::string(name_of(options.reference)) + "'");
    }

    const auto catalogue = variable_catalogue(dataset);
    const auto required = required_variables(dataset, options);
    for (const auto& name : required) {
        if (std::find(catalogue.begin(), catalogue.end(), name) == catalogue.end()) {
            throw Error(ErrorKind::config, "unknown variable '" + name + "'");
        }
    }

    PanelDesign design;
    const std::string focal(focal_variable(options.spec));
    design.var_meta.push_back({focal, VariableKind::focal_share, std::nullopt});
    for (const auto& c : options.firm_controls) design.var_meta.push_back({c, VariableKind::firm_control, std::nullopt});
    for (const auto& m : macro_list(dataset, options)) design.var_meta.push_back({m, VariableKind::macro_control, std::nullopt});

    std::vector<std::size_t> indicator_clusters;
    std::vector<std::string> indicator_names;
    std::set<std::string> seen;
    for (std::size_t c = 0; c < clusters.k; ++c) {
        if (c == *reference) continue;
        std::string name = "cluster_" + clusters.cluster_name(c);
        if (!seen.insert(name).second) name += "_" + std::to_string(c);
        indicator_clusters.push_back(c);
        indicator_names.push_back(name);
    }
    const std::size_t first_indicator = design.var_meta.size();
    for (const auto& name : indicator_names) design.var_meta.push_back({name, VariableKind::cluster_indicator, std::nullopt});
    if (options.include_interactions) {
        for (std::size_t i = 0; i < indicator_names.size(); ++i) {
            design.var_meta.push_back({focal + ":" + indicator_names[i], VariableKind::interaction,
                                       std::make_pair(std::size_t{0}, first_indicator + i)});
        }
    }

    const std::size_t n = dataset.records.size();
    const std::size_t K = design.var_meta.size();
    const std::size_t n_direct = first_indicator;
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& rec = dataset.records[r];
        const auto label = clusters.label_of(rec.firm_id);
        if (!label) {
            throw Error(ErrorKind::labeling, "firm '" + rec.firm_id + "' has no cluster label");
        }
        auto value = [&](const std::string& name) {
            const double v = variable_value(rec, name).value_or(kMissing);
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::design, "row (" + rec.firm_id + ", " + std::to_string(rec.year) +
                                                   ") lacks '" + name + "'; run drop_incomplete first");
            }
            return v;
        };
        y[r] = value(std::string(to_string(options.outcome)));
        for (std::size_t j = 0; j < n_direct; ++j) raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = value(design.var_meta[j].name);
        const double focal_value = raw(static_cast<Eigen::Index>(r), 0);
        for (std::size_t i = 0; i < indicator_clusters.size(); ++i) {
            const double ind = *label == indicator_clusters[i] ? 1.0 : 0.0;
            raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(first_indicator + i)) = ind;
            if (options.include_interactions) {
                raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(first_indicator + indicator_clusters.size() + i)) =
                    focal_value * ind;
            }
        }
        design.year_index.push_back(rec.year);
        design.firm_ids.push_back(rec.firm_id);
    }
    design.n_obs = n;
    if (n == 0) throw Error(ErrorKind::design, "no rows");

    const auto y_dm = demean_by_year(y, design.year_index);
    design.y = Eigen::Map<const Eigen::VectorXd>(y_dm.data(), static_cast<Eigen::Index>(n));
    if (design.y.squaredNorm() <= 0.0) throw Error(ErrorKind::design, "outcome is constant after demeaning");
    design.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
    std::vector<double> col(n);
    for (std::size_t j = 0; j < K; ++j) {
        for (std::size_t r = 0; r < n; ++r) col[r] = raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        const auto dm = demean_by_year(col, design.year_index);
        for (std::size_t r = 0; r < n; ++r) design.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = dm[r];
    }

    // Sequential Gram-Schmidt: each column must keep a non-negligible part
    // outside the span of the columns before it.
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), 0);
    for (std::size_t j = 0; j < K; ++j) {
        Eigen::VectorXd v = design.X.col(static_cast<Eigen::Index>(j));
        const double norm2 = v.squaredNorm();
        if (norm2 <= 1e-24 * static_cast<double>(n)) {
            throw Error(ErrorKind::design, "column '" + design.var_meta[j].name + "' is constant after demeaning");
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index q = 0; q < basis.cols(); ++q) v -= basis.col(q).dot(v) * basis.col(q);
        }
        if (v.squaredNorm() <= 1e-10 * norm2) {
            throw Error(ErrorKind::design, "column '" + design.var_meta[j].name +
                                               "' is collinear with earlier columns after demeaning");
        }
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = v.normalized();
    }
    return design;
}

}  // namespace powerpanel
