#include "powerpanel/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "powerpanel/csv.hpp"
#include "powerpanel/error.hpp"

namespace powerpanel {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"run", {"seed"}},
        {"input", {"financials", "capacities", "macro"}},
        {"synth",
         {"enabled", "n_firms", "first_year", "last_year", "clusters", "beta", "noise_sd", "focal", "focal_ramp",
          "macro", "countries", "share_step", "seed"}},
        {"model", {"outcome", "spec", "macro_controls", "interactions", "prior", "model_prior", "heredity"}},
        {"cluster", {"k", "validity_k_min", "validity_k_max", "dtw_window", "dtw_normalize"}},
        {"mcmc", {"iterations", "burnin"}},
        {"rolling", {"enabled", "window_len", "first_start", "last_year"}},
        {"describe", {"region_map", "loess_span", "loess_degree"}},
    };
    return keys;
}

std::string where(const std::string& key) { return "config key '" + key + "'"; }

double to_double(const std::string& key, const std::string& text) {
    auto v = csv::parse_double(text);
    if (!v) throw Error(ErrorKind::config, where(key) + ": '" + text + "' is not a number");
    return *v;
}

long long to_int(const std::string& key, const std::string& text) {
    auto v = csv::parse_int(text);
    if (!v) throw Error(ErrorKind::config, where(key) + ": '" + text + "' is not an integer");
    return *v;
}

std::size_t to_count(const std::string& key, const std::string& text) {
    const auto v = to_int(key, text);
    if (v < 0) throw Error(ErrorKind::config, where(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
    const auto t = boost::algorithm::to_lower_copy(text);
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    throw Error(ErrorKind::config, where(key) + ": '" + text + "' is not a boolean");
}

std::vector<std::string> to_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::is_any_of(","));
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

template <typename F>
auto wrap(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        throw Error(ErrorKind::config, where(key) + ": " + e.what());
    }
}

std::vector<ClusterSpec> parse_clusters(const std::string& key, const std::string& text) {
    // tech:count[:lo:hi], comma separated
    std::vector<ClusterSpec> out;
    for (const auto& item : to_list(text)) {
        std::vector<std::string> f;
        boost::algorithm::split(f, item, boost::is_any_of(":"));
        for (auto& s : f) boost::algorithm::trim(s);
        if (f.size() != 2 && f.size() != 4) {
            throw Error(ErrorKind::config, where(key) + ": expected tech:count[:lo:hi], got '" + item + "'");
        }
        auto tech = parse_technology(f[0]);
        if (!tech) throw Error(ErrorKind::config, where(key) + ": unknown technology '" + f[0] + "'");
        ClusterSpec c;
        c.dominant = *tech;
        c.count = to_count(key, f[1]);
        if (f.size() == 4) {
            c.lead_lo = to_double(key, f[2]);
            c.lead_hi = to_double(key, f[3]);
        }
        out.push_back(c);
    }
    return out;
}

std::map<std::string, double> parse_assignments(const std::string& key, const std::string& text) {
    std::map<std::string, double> out;
    for (const auto& item : to_list(text)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::config, where(key) + ": expected name=value, got '" + item + "'");
        auto name = boost::algorithm::trim_copy(item.substr(0, eq));
        if (out.contains(name)) throw Error(ErrorKind::config, where(key) + ": '" + name + "' given twice");
        out[name] = to_double(key, boost::algorithm::trim_copy(item.substr(eq + 1)));
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& text) {
    std::filesystem::path p(text);
    return p.is_absolute() ? p : base / p;
}

std::string join(const std::vector<std::string>& items) { return boost::algorithm::join(items, ","); }

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::config, std::string("malformed configuration: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        auto it = known_keys().find(section);
        if (it == known_keys().end()) {
            if (!body.empty() || body.data().empty()) {
                throw Error(ErrorKind::config, "unknown config section [" + section + "]");
            }
            throw Error(ErrorKind::config, "config key '" + section + "' must sit inside a section");
        }
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) {
                throw Error(ErrorKind::config, "unknown config key '" + section + "." + key + "'");
            }
        }
    }

    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
        if (!v) return std::nullopt;
        return boost::algorithm::trim_copy(*v);
    };

    RunConfig cfg;
    if (auto v = get("run", "seed")) cfg.seed = static_cast<std::uint64_t>(to_count("run.seed", *v));

    if (auto v = get("input", "financials")) cfg.inputs.financials = resolve(base_dir, *v);
    if (auto v = get("input", "capacities")) cfg.inputs.capacities = resolve(base_dir, *v);
    if (auto v = get("input", "macro")) cfg.inputs.macro = resolve(base_dir, *v);

    if (tree.get_child_optional("synth") && to_bool("synth.enabled", get("synth", "enabled").value_or("true"))) {
        SynthConfig s;
        s.seed = cfg.seed;
        s.beta = SynthConfig::default_beta();
        if (auto v = get("synth", "n_firms")) s.n_firms = to_count("synth.n_firms", *v);
        if (auto v = get("synth", "first_year")) s.first_year = static_cast<int>(to_int("synth.first_year", *v));
        if (auto v = get("synth", "last_year")) s.last_year = static_cast<int>(to_int("synth.last_year", *v));
        if (auto v = get("synth", "clusters")) s.clusters = parse_clusters("synth.clusters", *v);
        if (auto v = get("synth", "beta")) s.beta = parse_assignments("synth.beta", *v);
        if (auto v = get("synth", "noise_sd")) s.noise_sd = to_double("synth.noise_sd", *v);
        if (auto v = get("synth", "focal")) s.focal = wrap("synth.focal", [&] { return parse_focal_spec(*v); });
        if (auto v = get("synth", "focal_ramp")) {
            std::map<int, double> ramp;
            for (const auto& [year, b] : parse_assignments("synth.focal_ramp", *v)) {
                ramp[static_cast<int>(to_int("synth.focal_ramp", year))] = b;
            }
            s.focal_ramp = ramp;
        }
        if (auto v = get("synth", "macro")) s.macro_names = to_list(*v);
        if (auto v = get("synth", "countries")) s.countries = to_list(*v);
        if (auto v = get("synth", "share_step")) s.share_step = to_double("synth.share_step", *v);
        if (auto v = get("synth", "seed")) s.seed = static_cast<std::uint64_t>(to_count("synth.seed", *v));
        cfg.synth = std::move(s);
    } else if (cfg.inputs.financials.empty() || cfg.inputs.capacities.empty()) {
        throw Error(ErrorKind::config, "either [input] financials and capacities or a [synth] block is required");
    }

    if (auto v = get("model", "outcome")) cfg.outcome = wrap("model.outcome", [&] { return parse_outcome(*v); });
    if (auto v = get("model", "spec")) {
        if (boost::algorithm::to_lower_copy(*v) == "both") {
            cfg.specs = {FocalSpec::renewable, FocalSpec::fossil};
        } else {
            cfg.specs = {wrap("model.spec", [&] { return parse_focal_spec(*v); })};
        }
    }
    if (auto v = get("model", "macro_controls")) {
        if (boost::algorithm::to_lower_copy(*v) != "all") cfg.macro_controls = to_list(*v);
    }
    if (auto v = get("model", "interactions")) cfg.interactions = to_bool("model.interactions", *v);
    if (auto v = get("model", "prior")) cfg.prior = wrap("model.prior", [&] { return parse_gprior(*v); });
    if (auto v = get("model", "model_prior")) {
        cfg.model_prior = wrap("model.model_prior", [&] { return parse_model_prior(*v); });
    }
    if (auto v = get("model", "heredity")) cfg.heredity = to_bool("model.heredity", *v);

    if (auto v = get("cluster", "k")) cfg.k = to_count("cluster.k", *v);
    if (auto v = get("cluster", "validity_k_min")) cfg.validity_k_min = to_count("cluster.validity_k_min", *v);
    if (auto v = get("cluster", "validity_k_max")) cfg.validity_k_max = to_count("cluster.validity_k_max", *v);
    if (auto v = get("cluster", "dtw_window")) {
        if (boost::algorithm::to_lower_copy(*v) != "none") {
            cfg.dtw.window = static_cast<int>(to_int("cluster.dtw_window", *v));
            if (*cfg.dtw.window < 0) throw Error(ErrorKind::config, "config key 'cluster.dtw_window' must be >= 0");
        }
    }
    if (auto v = get("cluster", "dtw_normalize")) cfg.dtw.normalize = to_bool("cluster.dtw_normalize", *v);
    if (cfg.k < 2) throw Error(ErrorKind::config, "config key 'cluster.k' must be >= 2");
    if (cfg.validity_k_min < 2 || cfg.validity_k_max < cfg.validity_k_min) {
        throw Error(ErrorKind::config, "validity k range must satisfy 2 <= min <= max");
    }

    if (auto v = get("mcmc", "iterations")) cfg.iterations = to_count("mcmc.iterations", *v);
    if (auto v = get("mcmc", "burnin")) cfg.burnin = to_count("mcmc.burnin", *v);
    if (cfg.burnin >= cfg.iterations) throw Error(ErrorKind::config, "mcmc burnin must be below iterations");

    if (auto v = get("rolling", "enabled")) cfg.rolling_enabled = to_bool("rolling.enabled", *v);
    if (auto v = get("rolling", "window_len")) cfg.rolling.window_len = static_cast<int>(to_int("rolling.window_len", *v));
    if (auto v = get("rolling", "first_start")) cfg.rolling.first_start = static_cast<int>(to_int("rolling.first_start", *v));
    if (auto v = get("rolling", "last_year")) cfg.rolling.last_year = static_cast<int>(to_int("rolling.last_year", *v));
    if (cfg.rolling_enabled) rolling_start_years(cfg.rolling);

    if (auto v = get("describe", "region_map")) cfg.region_map = resolve(base_dir, *v);
    if (auto v = get("describe", "loess_span")) cfg.loess.span = to_double("describe.loess_span", *v);
    if (auto v = get("describe", "loess_degree")) cfg.loess.degree = static_cast<int>(to_int("describe.loess_degree", *v));
    if (!(cfg.loess.span > 0.0 && cfg.loess.span <= 1.0)) {
        throw Error(ErrorKind::config, "config key 'describe.loess_span' must lie in (0, 1]");
    }
    if (cfg.loess.degree < 1 || cfg.loess.degree > 2) {
        throw Error(ErrorKind::config, "config key 'describe.loess_degree' must be 1 or 2");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config '" + path.string() + "'");
    return parse_config(in, path.parent_path());
}

void override_seed(RunConfig& config, std::uint64_t seed) {
    config.seed = seed;
    if (config.synth) config.synth->seed = seed;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    using csv::format_double;
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("run.seed", std::to_string(seed));
    if (synth) {
        const auto& s = *synth;
        e.emplace_back("synth.n_firms", std::to_string(s.n_firms));
        e.emplace_back("synth.first_year", std::to_string(s.first_year));
        e.emplace_back("synth.last_year", std::to_string(s.last_year));
        std::vector<std::string> cl;
        for (const auto& c : s.clusters) {
            cl.push_back(std::string(name_of(c.dominant)) + ":" + std::to_string(c.count) + ":" +
                         format_double(c.lead_lo) + ":" + format_double(c.lead_hi));
        }
        e.emplace_back("synth.clusters", cl.empty() ? "default" : join(cl));
        std::vector<std::string> b;
        for (const auto& [k, v] : s.beta) b.push_back(k + "=" + format_double(v));
        e.emplace_back("synth.beta", join(b));
        e.emplace_back("synth.noise_sd", format_double(s.noise_sd));
        e.emplace_back("synth.focal", std::string(to_string(s.focal)));
        if (s.focal_ramp) {
            std::vector<std::string> r;
            for (const auto& [y, v] : *s.focal_ramp) r.push_back(std::to_string(y) + "=" + format_double(v));
            e.emplace_back("synth.focal_ramp", join(r));
        }
        e.emplace_back("synth.macro", join(s.macro_names));
        e.emplace_back("synth.countries", join(s.countries));
        e.emplace_back("synth.share_step", format_double(s.share_step));
        e.emplace_back("synth.seed", std::to_string(s.seed));
    } else {
        e.emplace_back("input.financials", inputs.financials.string());
        e.emplace_back("input.capacities", inputs.capacities.string());
        e.emplace_back("input.macro", inputs.macro.string());
    }
    e.emplace_back("model.outcome", std::string(to_string(outcome)));
    std::vector<std::string> sp;
    for (auto s : specs) sp.emplace_back(to_string(s));
    e.emplace_back("model.spec", join(sp));
    e.emplace_back("model.macro_controls", macro_controls ? join(*macro_controls) : "all");
    e.emplace_back("model.interactions", interactions ? "true" : "false");
    e.emplace_back("model.prior", std::string(to_string(prior)));
    e.emplace_back("model.model_prior", std::string(to_string(model_prior)));
    e.emplace_back("model.heredity", heredity ? "true" : "false");
    e.emplace_back("cluster.k", std::to_string(k));
    e.emplace_back("cluster.validity_k_min", std::to_string(validity_k_min));
    e.emplace_back("cluster.validity_k_max", std::to_string(validity_k_max));
    e.emplace_back("cluster.dtw_window", dtw.window ? std::to_string(*dtw.window) : "none");
    e.emplace_back("cluster.dtw_normalize", dtw.normalize ? "true" : "false");
    e.emplace_back("mcmc.iterations", std::to_string(iterations));
    e.emplace_back("mcmc.burnin", std::to_string(burnin));
    e.emplace_back("rolling.enabled", rolling_enabled ? "true" : "false");
    e.emplace_back("rolling.window_len", std::to_string(rolling.window_len));
    e.emplace_back("rolling.first_start", std::to_string(rolling.first_start));
    e.emplace_back("rolling.last_year", std::to_string(rolling.last_year));
    e.emplace_back("describe.region_map", region_map ? region_map->string() : "builtin");
    e.emplace_back("describe.loess_span", format_double(loess.span));
    e.emplace_back("describe.loess_degree", std::to_string(loess.degree));
    return e;
}

}  // namespace powerpanel
