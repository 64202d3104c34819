#include "powerpanel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Dense>
#include <json.hpp>

#include "powerpanel/csv.hpp"
#include "powerpanel/error.hpp"
#include "powerpanel/seeding.hpp"

namespace powerpanel {

namespace {

enum Stream : std::uint64_t { kYearStream = 1u << 20, kMacroStream };

void validate_config(const SynthConfig& cfg) {
    if (cfg.last_year < cfg.first_year) throw Error(ErrorKind::config, "last_year precedes first_year");
    if (!(cfg.noise_sd > 0.0)) throw Error(ErrorKind::config, "noise_sd must be positive");
    if (cfg.countries.empty()) throw Error(ErrorKind::config, "at least one country required");
    std::size_t total = 0;
    for (const auto& c : cfg.clusters) {
        if (!(c.lead_lo > 0.0 && c.lead_lo <= c.lead_hi && c.lead_hi <= 1.0)) {
            throw Error(ErrorKind::config, "infeasible leading-share range [" + std::to_string(c.lead_lo) + ", " +
                                               std::to_string(c.lead_hi) + "] for " +
                                               std::string(name_of(c.dominant)));
        }
        total += c.count;
    }
    if (total != cfg.n_firms) {
        throw Error(ErrorKind::config, "cluster counts sum to " + std::to_string(total) + ", expected n_firms = " +
                                           std::to_string(cfg.n_firms));
    }
}

struct FirmPlan {
    std::size_t cluster;
    Technology dominant;
};

// Value of a beta key for one row; nullopt for unknown keys.
std::optional<double> regressor(const FirmYearRecord& rec, Technology dominant, FocalSpec focal,
                                const std::string& name) {
    if (name.starts_with("cluster_")) {
        auto tech = parse_technology(std::string_view(name).substr(8));
        if (!tech) return std::nullopt;
        return dominant == *tech ? 1.0 : 0.0;
    }
    if (auto colon = name.find(':'); colon != std::string::npos) {
        const auto lhs = name.substr(0, colon);
        const auto rhs = name.substr(colon + 1);
        auto a = regressor(rec, dominant, focal, lhs);
        auto b = regressor(rec, dominant, focal, rhs);
        if (!a || !b) return std::nullopt;
        return *a * *b;
    }
    return variable_value(rec, name);
}

}  // namespace

std::map<std::string, double> SynthConfig::default_beta() {
    return {{"renewable_share", 0.02}, {"leverage", -0.03}, {"size", 0.004},     {"sales_growth", 0.02},
            {"gdp_growth", 0.1},       {"inflation", 0.0},  {"cluster_wind", 0.01}, {"cluster_coal", -0.01}};
}

SynthPanel generate_panel(SynthConfig cfg) {
    if (cfg.clusters.empty()) {
        for (std::size_t t = 0; t < kTechCount; ++t) {
            const std::size_t count = cfg.n_firms / kTechCount + (t < cfg.n_firms % kTechCount ? 1 : 0);
            cfg.clusters.push_back({count, kTechnologies[t], 0.79, 0.97});
        }
    }
    validate_config(cfg);

    SynthPanel out;
    auto& truth = out.truth;
    truth.seed = cfg.seed;
    truth.noise_sd = cfg.noise_sd;
    truth.focal = cfg.focal;
    truth.beta = cfg.beta;
    truth.focal_ramp = cfg.focal_ramp;
    truth.clusters = cfg.clusters;

    const int n_years = cfg.last_year - cfg.first_year + 1;
    std::vector<double> year_effect(static_cast<std::size_t>(n_years));
    {
        std::mt19937_64 rng(derive_seed(cfg.seed, kYearStream));
        std::normal_distribution<double> ye(0.03, 0.01);
        for (auto& v : year_effect) v = ye(rng);
    }
    std::map<std::pair<std::string, int>, std::vector<double>> macro;
    {
        std::mt19937_64 rng(derive_seed(cfg.seed, kMacroStream));
        std::normal_distribution<double> z(0.0, 1.0);
        for (const auto& country : cfg.countries) {
            for (int y = cfg.first_year; y <= cfg.last_year; ++y) {
                auto& row = macro[{country, y}];
                for (std::size_t m = 0; m < cfg.macro_names.size(); ++m) row.push_back(0.015 + 0.02 * z(rng));
            }
        }
    }

    std::vector<FirmPlan> plans;
    for (std::size_t c = 0; c < cfg.clusters.size(); ++c) {
        for (std::size_t i = 0; i < cfg.clusters[c].count; ++i) plans.push_back({c, cfg.clusters[c].dominant});
    }

    const int width = static_cast<int>(std::to_string(cfg.n_firms).size());
    for (std::size_t f = 0; f < cfg.n_firms; ++f) {
        std::mt19937_64 rng(derive_seed(cfg.seed, f));
        std::normal_distribution<double> z(0.0, 1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const auto& plan = plans[f];
        const auto& spec = cfg.clusters[plan.cluster];
        std::string id = std::to_string(f + 1);
        id = "F" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(id.size(), width), '0') + id;
        truth.firm_cluster[id] = plan.cluster;
        const std::string country = cfg.countries[static_cast<std::size_t>(u(rng) * static_cast<double>(cfg.countries.size())) % cfg.countries.size()];

        const double level = spec.lead_lo + (spec.lead_hi - spec.lead_lo) * u(rng);
        TechVector others{};
        for (auto& w : others) w = 0.2 + 0.8 * u(rng);
        double walk = 0.0;
        double assets = std::exp(std::log(5000.0) + z(rng));
        double capacity = std::exp(std::log(500.0) + z(rng));
        const double lev_base = 0.2 + 0.4 * u(rng);
        double sales = assets * (0.2 + 0.3 * u(rng));

        for (int y = cfg.first_year; y <= cfg.last_year; ++y) {
            if (y > cfg.first_year) {
                walk += cfg.share_step * z(rng);
                for (auto& w : others) w *= std::exp(0.1 * z(rng));
                assets *= std::exp(0.03 + 0.05 * z(rng));
                capacity *= std::exp(0.02 + 0.05 * z(rng));
                sales *= 1.0 + 0.03 + 0.08 * z(rng);
            }
            const double lead = std::clamp(level + walk, spec.lead_lo, spec.lead_hi);
            double other_total = 0.0;
            for (std::size_t t = 0; t < kTechCount; ++t) {
                if (t != index_of(plan.dominant)) other_total += others[t];
            }
            TechVector mw{};
            for (std::size_t t = 0; t < kTechCount; ++t) {
                const double share = t == index_of(plan.dominant) ? lead : (1.0 - lead) * others[t] / other_total;
                mw[t] = capacity * share;
            }
            const double leverage = std::clamp(lev_base + 0.03 * z(rng), 0.05, 0.9);

            FirmYearRecord rec;
            rec.firm_id = id;
            rec.year = y;
            rec.country = country;
            rec.total_assets = assets;
            rec.total_debt = leverage * assets;
            rec.total_equity = assets - rec.total_debt;
            rec.sales = sales;
            rec.capacity_mw = mw;
            const auto& mrow = macro[{country, y}];
            for (std::size_t m = 0; m < cfg.macro_names.size(); ++m) rec.macro[cfg.macro_names[m]] = mrow[m];
            rec.net_income = z(rng);  // standard normal noise draw, scaled below
            out.dataset.records.push_back(std::move(rec));
        }
    }
    out.dataset.macro_names = cfg.macro_names;

    // ROA is formed from the derived variables exactly as the panel module
    // computes them, so the planted coefficients are exact.
    auto derived = derive_variables(out.dataset);
    const std::string focal(focal_variable(cfg.focal));
    for (std::size_t i = 0; i < derived.records.size(); ++i) {
        auto& rec = derived.records[i];
        const double noise = cfg.noise_sd * rec.net_income;
        const auto dominant = cfg.clusters[truth.firm_cluster.at(rec.firm_id)].dominant;
        double roa = year_effect[static_cast<std::size_t>(rec.year - cfg.first_year)] + noise;
        for (const auto& [name, b] : cfg.beta) {
            if (name == focal && cfg.focal_ramp) continue;
            auto v = regressor(rec, dominant, cfg.focal, name);
            if (!v) throw Error(ErrorKind::config, "unknown coefficient name '" + name + "'");
            if (std::isfinite(*v)) roa += b * *v;
        }
        if (cfg.focal_ramp) {
            auto it = cfg.focal_ramp->find(rec.year);
            if (it == cfg.focal_ramp->end()) {
                throw Error(ErrorKind::config, "focal ramp lacks year " + std::to_string(rec.year));
            }
            roa += it->second * variable_value(rec, focal).value_or(0.0);
        }
        rec.net_income = roa * rec.total_assets;
        rec.derived.reset();
        rec.incomplete = false;
    }
    out.dataset = std::move(derived);
    return out;
}

std::string ground_truth_json(const GroundTruth& truth) {
    nlohmann::ordered_json j;
    j["seed"] = truth.seed;
    j["noise_sd"] = truth.noise_sd;
    j["focal"] = std::string(to_string(truth.focal));
    j["beta"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : truth.beta) j["beta"][k] = v;
    if (truth.focal_ramp) {
        j["focal_ramp"] = nlohmann::ordered_json::object();
        for (const auto& [y, v] : *truth.focal_ramp) j["focal_ramp"][std::to_string(y)] = v;
    }
    j["clusters"] = nlohmann::ordered_json::array();
    for (const auto& c : truth.clusters) {
        j["clusters"].push_back({{"count", c.count},
                                 {"dominant", std::string(name_of(c.dominant))},
                                 {"lead_lo", c.lead_lo},
                                 {"lead_hi", c.lead_hi}});
    }
    j["firms"] = nlohmann::ordered_json::object();
    for (const auto& [firm, c] : truth.firm_cluster) j["firms"][firm] = c;
    return j.dump(2) + "\n";
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    GroundTruth t;
    try {
        const auto j = nlohmann::json::parse(in);
        t.seed = j.at("seed").get<std::uint64_t>();
        t.noise_sd = j.at("noise_sd").get<double>();
        t.focal = parse_focal_spec(j.at("focal").get<std::string>());
        for (const auto& [k, v] : j.at("beta").items()) t.beta[k] = v.get<double>();
        if (j.contains("focal_ramp")) {
            t.focal_ramp.emplace();
            for (const auto& [k, v] : j.at("focal_ramp").items()) (*t.focal_ramp)[std::stoi(k)] = v.get<double>();
        }
        for (const auto& c : j.at("clusters")) {
            auto tech = parse_technology(c.at("dominant").get<std::string>());
            if (!tech) throw Error(ErrorKind::schema, "unknown technology in ground truth");
            t.clusters.push_back({c.at("count").get<std::size_t>(), *tech, c.at("lead_lo").get<double>(),
                                  c.at("lead_hi").get<double>()});
        }
        for (const auto& [k, v] : j.at("firms").items()) t.firm_cluster[k] = v.get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema, path.string() + ": " + e.what());
    }
    return t;
}

void write_synth_files(const SynthPanel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error(ErrorKind::io, "cannot write '" + (dir / name).string() + "'");
        return f;
    };
    using csv::format_double;
    {
        auto f = open("financials.csv");
        csv::write_row(f, {"firm_id", "year", "country", "net_income", "total_assets", "total_equity", "total_debt", "sales"});
        for (const auto& r : panel.dataset.records) {
            csv::write_row(f, {r.firm_id, std::to_string(r.year), r.country, format_double(r.net_income),
                               format_double(r.total_assets), format_double(r.total_equity),
                               format_double(r.total_debt), format_double(r.sales)});
        }
    }
    {
        auto f = open("capacities.csv");
        csv::write_row(f, {"firm_id", "year", "technology", "capacity_mw"});
        for (const auto& r : panel.dataset.records) {
            if (!r.capacity_mw) continue;
            for (auto t : kTechnologies) {
                csv::write_row(f, {r.firm_id, std::to_string(r.year), std::string(name_of(t)),
                                   format_double((*r.capacity_mw)[index_of(t)])});
            }
        }
    }
    {
        auto f = open("macro.csv");
        std::vector<std::string> header = {"country", "year"};
        header.insert(header.end(), panel.dataset.macro_names.begin(), panel.dataset.macro_names.end());
        csv::write_row(f, header);
        std::map<std::pair<std::string, int>, std::vector<std::string>> rows;
        for (const auto& r : panel.dataset.records) {
            auto key = std::make_pair(r.country, r.year);
            if (rows.contains(key)) continue;
            std::vector<std::string> row = {r.country, std::to_string(r.year)};
            for (const auto& m : panel.dataset.macro_names) row.push_back(format_double(r.macro.at(m)));
            rows.emplace(key, std::move(row));
        }
        for (const auto& [key, row] : rows) csv::write_row(f, row);
    }
    {
        auto f = open("ground_truth.json");
        f << ground_truth_json(panel.truth);
    }
}

std::vector<RecoveryRow> planted_recovery_report(const PanelDesign& design, const GroundTruth& truth,
                                                 const BmaResult& result) {
    const auto n = static_cast<double>(design.n_obs);
    const std::string focal(focal_variable(truth.focal));
    std::vector<RecoveryRow> rows;
    for (std::size_t j = 0; j < design.columns(); ++j) {
        RecoveryRow r;
        r.name = design.var_meta[j].name;
        if (r.name == focal && truth.focal_ramp) {
            double s = 0.0;
            for (int y : design.year_index) s += truth.focal_ramp->count(y) ? truth.focal_ramp->at(y) : 0.0;
            r.beta_true = s / n;
        } else if (auto it = truth.beta.find(r.name); it != truth.beta.end()) {
            r.beta_true = it->second;
        }
        // Spread of the column once the other candidates are partialled out;
        // a share explained by cluster indicators carries little signal.
        const auto jj = static_cast<Eigen::Index>(j);
        Eigen::MatrixXd others(design.X.rows(), design.X.cols() - 1);
        others << design.X.leftCols(jj), design.X.rightCols(design.X.cols() - jj - 1);
        Eigen::VectorXd col = design.X.col(jj);
        if (others.cols() > 0) col -= others * others.colPivHouseholderQr().solve(col);
        const double col_sd = std::sqrt(col.squaredNorm() / std::max(n - 1.0, 1.0));
        r.threshold = 3.0 * truth.noise_sd / (std::sqrt(n) * col_sd);
        const auto& cp = result.coefficients.at(j);
        r.pip = cp.pip;
        r.post_mean = cp.mean_uncond;
        if (r.beta_true == 0.0) {
            r.expectation = RecoveryExpectation::null_effect;
            r.pass = r.pip < 0.5;
        } else if (std::abs(r.beta_true) >= r.threshold) {
            r.expectation = RecoveryExpectation::strong;
            r.pass = r.pip > 0.9 && (r.post_mean > 0.0) == (r.beta_true > 0.0);
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace powerpanel
