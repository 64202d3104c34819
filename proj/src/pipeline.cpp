#include "powerpanel/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "powerpanel/clustering.hpp"
#include "powerpanel/csv.hpp"
#include "powerpanel/error.hpp"
#include "powerpanel/seeding.hpp"
#include "powerpanel/validity.hpp"

#ifndef POWERPANEL_VERSION
#define POWERPANEL_VERSION "unknown"
#endif

namespace powerpanel {

using json = nlohmann::ordered_json;
using csv::format_double;

namespace artifacts {

namespace {
std::string suffix(FocalSpec spec, GPriorKind prior) {
    std::string s(to_string(spec));
    if (prior != GPriorKind::hyper_uip) s += "_" + std::string(to_string(prior));
    return s;
}
}  // namespace

std::string bma_result(FocalSpec spec, GPriorKind prior) { return "bma_result_" + suffix(spec, prior) + ".json"; }
std::string density(FocalSpec spec, GPriorKind prior) { return "density_" + suffix(spec, prior) + ".csv"; }
std::string rolling(FocalSpec spec, GPriorKind prior) { return "rolling_" + suffix(spec, prior) + ".csv"; }

}  // namespace artifacts

std::string sha256_hex(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read '" + file.string() + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

namespace {

constexpr std::uint64_t kRollingStream = 16;

json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    return out;
}

std::filesystem::path require(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::dependency, "missing upstream artifact '" + path.string() + "'");
    }
    return path;
}

ClusterAssignment read_clusters(const std::filesystem::path& path) {
    const auto table = csv::read(require(path));
    const auto c_firm = table.column("firm_id", path.string());
    const auto c_index = table.column("cluster_index", path.string());
    const auto c_label = table.column("cluster_label", path.string());
    ClusterAssignment a;
    std::map<std::size_t, Technology> tech;
    for (const auto& row : table.rows) {
        const auto at = path.string() + ":" + std::to_string(row.line);
        auto idx = csv::parse_int(row.fields[c_index]);
        auto t = parse_technology(row.fields[c_label]);
        if (!idx || *idx < 0 || !t) throw Error(ErrorKind::schema, at + ": malformed cluster row");
        const auto c = static_cast<std::size_t>(*idx);
        if (auto it = tech.find(c); it != tech.end() && it->second != *t) {
            throw Error(ErrorKind::schema, at + ": cluster " + std::to_string(c) + " carries two labels");
        }
        tech[c] = *t;
        if (!a.labels.emplace(row.fields[c_firm], c).second) {
            throw Error(ErrorKind::uniqueness, at + ": firm '" + row.fields[c_firm] + "' listed twice");
        }
    }
    a.k = tech.empty() ? 0 : tech.rbegin()->first + 1;
    for (std::size_t c = 0; c < a.k; ++c) {
        auto it = tech.find(c);
        if (it == tech.end()) throw Error(ErrorKind::schema, path.string() + ": cluster " + std::to_string(c) + " has no members");
        a.dominant.push_back({it->second, 0.0, false});
    }
    return a;
}

PanelDataset labeled_only(const PanelDataset& dataset, const ClusterAssignment& a, std::size_t* dropped) {
    PanelDataset out = dataset;
    out.records.clear();
    for (const auto& r : dataset.records) {
        if (a.label_of(r.firm_id)) out.records.push_back(r);
    }
    *dropped = dataset.records.size() - out.records.size();
    return out;
}

DesignOptions design_options(const RunConfig& cfg, FocalSpec spec) {
    DesignOptions o;
    o.spec = spec;
    o.outcome = cfg.outcome;
    o.macro_controls = cfg.macro_controls;
    o.include_interactions = cfg.interactions;
    return o;
}

BmaOptions bma_options(const RunConfig& cfg) {
    BmaOptions o;
    o.prior = cfg.prior;
    o.model_prior = cfg.model_prior;
    o.heredity = cfg.heredity;
    return o;
}

std::uint64_t spec_stream(FocalSpec spec) { return static_cast<std::uint64_t>(spec); }

json result_json(const BmaResult& r, const PanelDesign& design, const RunConfig& cfg, FocalSpec spec) {
    json j;
    j["spec"] = std::string(to_string(spec));
    j["outcome"] = std::string(to_string(cfg.outcome));
    j["n_obs"] = r.n_obs;
    j["prior"] = {{"kind", std::string(to_string(r.prior.kind))}};
    if (r.prior.is_fixed()) {
        j["prior"]["g"] = r.prior.g;
    } else {
        j["prior"]["a"] = r.prior.a;
    }
    j["model_prior"] = std::string(to_string(r.model_prior));
    j["heredity"] = r.heredity;
    j["variables"] = json::array();
    for (std::size_t i = 0; i < r.coefficients.size(); ++i) {
        const auto& c = r.coefficients[i];
        j["variables"].push_back({{"name", c.name},
                                  {"kind", std::string(to_string(design.var_meta[i].kind))},
                                  {"pip", number(c.pip)},
                                  {"post_mean", number(c.mean_uncond)},
                                  {"post_sd", number(c.sd_uncond)},
                                  {"cond_mean", number(c.mean_cond)},
                                  {"cond_sd", number(c.sd_cond)},
                                  {"ci90_low", number(c.ci90_low)},
                                  {"ci90_high", number(c.ci90_high)}});
    }
    j["top_models"] = json::array();
    for (std::size_t m = 0; m < std::min<std::size_t>(50, r.models.size()); ++m) {
        const auto& vm = r.models[m];
        json vars = json::array();
        for (auto c : vm.model.columns()) vars.push_back(r.names[c]);
        j["top_models"].push_back({{"variables", vars},
                                   {"probability", number(vm.probability)},
                                   {"log_posterior", number(vm.log_posterior)},
                                   {"visits", vm.visits}});
    }
    const auto& d = r.diagnostics;
    j["diagnostics"] = {{"exhaustive", d.exhaustive},
                        {"iterations", d.iterations},
                        {"burnin", d.burnin},
                        {"seed", d.seed},
                        {"accepted", d.accepted},
                        {"acceptance_rate", number(d.acceptance_rate)},
                        {"unique_models", d.unique_models},
                        {"frequency_correlation", number(d.frequency_correlation)},
                        {"warnings", d.warnings}};
    json freq = json::object();
    for (std::size_t i = 0; i < d.pip_frequency.size() && i < r.names.size(); ++i) {
        freq[r.names[i]] = number(d.pip_frequency[i]);
    }
    j["diagnostics"]["pip_frequency"] = freq;
    return j;
}

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

RunContext::RunContext(RunConfig config, std::filesystem::path run_dir, std::string command, Logger log)
    : config_(std::move(config)), dir_(std::move(run_dir)), command_(std::move(command)), log_(std::move(log)) {
    std::filesystem::create_directories(dir_);
    const auto manifest = dir_ / artifacts::kManifest;
    if (std::filesystem::exists(manifest)) {
        std::ifstream in(manifest, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        previous_manifest_ = s.str();
    }
}

std::filesystem::path RunContext::output(const std::string& name) const {
    const auto path = dir_ / name;
    if (std::filesystem::exists(path)) {
        throw Error(ErrorKind::io, "refusing to overwrite existing artifact '" + path.string() + "'");
    }
    return path;
}

void RunContext::record(const std::filesystem::path& file) {
    if (current_) current_->files.push_back(std::filesystem::relative(file, dir_).generic_string());
}

void RunContext::run_stage(const std::string& name, const std::function<void()>& stage) {
    stages_.push_back({name, 0.0, true, {}, {}, {}});
    current_ = &stages_.back();
    if (log_) log_("[" + name + "] start");
    const auto t0 = std::chrono::steady_clock::now();
    try {
        stage();
    } catch (const std::exception& e) {
        current_->ok = false;
        current_->error = e.what();
        current_->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        current_ = nullptr;
        write_manifest();
        const auto kind = [&] {
            auto* err = dynamic_cast<const Error*>(&e);
            return err ? std::optional<ErrorKind>(err->kind()) : std::nullopt;
        }();
        throw StageError(name, kind, e.what());
    }
    current_->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log_) log_("[" + name + "] done in " + format_double(std::round(current_->seconds * 1000.0) / 1000.0) + " s");
    current_ = nullptr;
    write_manifest();
}

void RunContext::write_manifest() const {
    json m;
    if (!previous_manifest_.empty()) {
        try {
            m = json::parse(previous_manifest_);
        } catch (const json::exception&) {
            throw Error(ErrorKind::schema, "existing manifest in '" + dir_.string() + "' is not valid JSON");
        }
    } else {
        m["tool"] = "powerpanel";
        m["version"] = POWERPANEL_VERSION;
        m["invocations"] = json::array();
        m["files"] = json::object();
    }

    json inv;
    inv["command"] = command_;
    json cfg = json::object();
    for (const auto& [k, v] : config_.echo()) cfg[k] = v;
    inv["config"] = cfg;
    json seeds;
    seeds["master"] = config_.seed;
    if (config_.synth) seeds["synth"] = config_.synth->seed;
    for (auto spec : config_.specs) {
        const auto chain = derive_seed(config_.seed, spec_stream(spec));
        seeds["bma_" + std::string(to_string(spec))] = chain;
        if (config_.rolling_enabled) {
            const auto base = derive_seed(config_.seed, kRollingStream + spec_stream(spec));
            json per = json::object();
            for (int start : rolling_start_years(config_.rolling)) {
                per[std::to_string(start)] = derive_seed(base, static_cast<std::uint64_t>(start));
            }
            seeds["rolling_" + std::string(to_string(spec))] = per;
        }
    }
    inv["seeds"] = seeds;
    bool failed = false;
    inv["stages"] = json::array();
    for (const auto& s : stages_) {
        json js{{"name", s.name}, {"status", s.ok ? "ok" : "FAILED"}, {"seconds", s.seconds}, {"files", s.files}};
        if (!s.ok) {
            js["error"] = s.error;
            failed = true;
        }
        json notes = json::object();
        for (const auto& [k, v] : s.notes) notes[k] = v;
        if (!notes.empty()) js["notes"] = notes;
        inv["stages"].push_back(js);
    }
    inv["status"] = failed ? "FAILED" : "ok";
    m["invocations"].push_back(inv);

    for (const auto& s : stages_) {
        for (const auto& f : s.files) {
            const auto path = dir_ / f;
            if (!std::filesystem::exists(path)) continue;
            m["files"][f] = {{"sha256", sha256_hex(path)}, {"bytes", std::filesystem::file_size(path)}, {"stage", s.name}};
        }
    }
    // Status of the latest invocation; earlier ones keep their own.
    m["status"] = inv["status"];

    auto out = open_out(dir_ / artifacts::kManifest);
    out << m.dump(2) << "\n";
}

PanelDataset RunContext::load_dataset() const {
    PanelFiles files = config_.inputs;
    if (config_.synth) {
        const auto sdir = dir_ / artifacts::kSynthDir;
        files.financials = require(sdir / "financials.csv");
        files.capacities = require(sdir / "capacities.csv");
        files.macro = require(sdir / "macro.csv");
    }
    return derive_variables(ingest_panel(files));
}

void RunContext::synth() {
    if (!config_.synth) throw Error(ErrorKind::config, "no [synth] block in the configuration");
    const auto sdir = dir_ / artifacts::kSynthDir;
    for (const char* f : {"financials.csv", "capacities.csv", "macro.csv", "ground_truth.json"}) output(std::string(artifacts::kSynthDir) + "/" + f);
    const auto panel = generate_panel(*config_.synth);
    write_synth_files(panel, sdir);
    for (const char* f : {"financials.csv", "capacities.csv", "macro.csv", "ground_truth.json"}) record(sdir / f);
    current_->notes.emplace_back("firms", std::to_string(config_.synth->n_firms));
    current_->notes.emplace_back("firm_years", std::to_string(panel.dataset.records.size()));
}

void RunContext::cluster() {
    const auto clusters_path = output(artifacts::kClusters);
    const auto validity_path = output(artifacts::kValidity);
    const auto dataset = load_dataset();
    const auto trajectories = build_trajectories(dataset);
    if (trajectories.size() <= config_.k) {
        throw Error(ErrorKind::input, std::to_string(trajectories.size()) + " firms with share trajectories cannot form " +
                                          std::to_string(config_.k) + " clusters");
    }
    const auto M = distance_matrix(trajectories, config_.dtw);
    std::vector<std::string> ids;
    for (const auto& t : trajectories) ids.push_back(t.firm_id);
    const auto dendrogram = hac_average_linkage(M, ids);
    const auto assignment = assign_clusters(dendrogram, config_.k, M, trajectories);

    json v;
    v["selected_k"] = config_.k;
    v["n_firms"] = trajectories.size();
    v["dtw"] = {{"window", config_.dtw.window ? json(*config_.dtw.window) : json(nullptr)},
                {"normalize", config_.dtw.normalize}};
    v["scores"] = json::array();
    const auto k_max = std::min(config_.validity_k_max, trajectories.size() - 1);
    for (std::size_t k = config_.validity_k_min; k <= k_max; ++k) {
        const auto labels = cut(dendrogram, k);
        json row{{"k", k}};
        try {
            row["silhouette"] = number(silhouette(M, labels));
        } catch (const Error& e) {
            row["silhouette"] = nullptr;
            row["silhouette_error"] = e.what();
        }
        try {
            row["davies_bouldin"] = number(davies_bouldin(M, labels));
        } catch (const Error& e) {
            row["davies_bouldin"] = nullptr;
            row["davies_bouldin_error"] = e.what();
        }
        v["scores"].push_back(row);
    }
    const auto counts = assignment.members_count();
    v["clusters"] = json::array();
    for (std::size_t c = 0; c < assignment.k; ++c) {
        const auto& d = assignment.dominant[c];
        v["clusters"].push_back({{"index", c},
                                 {"label", assignment.cluster_name(c)},
                                 {"size", counts[c]},
                                 {"medoid", assignment.medoids[c]},
                                 {"dominant_mean_share", number(d.mean_share)},
                                 {"tie", d.tie}});
    }
    v["warnings"] = dendrogram.warnings;
    const auto truth_path = dir_ / artifacts::kSynthDir / "ground_truth.json";
    if (config_.synth && std::filesystem::exists(truth_path)) {
        const auto truth = read_ground_truth(truth_path);
        std::vector<std::size_t> planted, found;
        for (const auto& t : trajectories) {
            planted.push_back(truth.firm_cluster.at(t.firm_id));
            found.push_back(*assignment.label_of(t.firm_id));
        }
        v["ground_truth_ari"] = number(adjusted_rand_index(planted, found));
    }

    {
        auto out = open_out(clusters_path);
        csv::write_row(out, {"firm_id", "cluster_index", "cluster_label", "leading_share"});
        for (const auto& t : trajectories) {
            const auto c = *assignment.label_of(t.firm_id);
            const auto tech = index_of(assignment.dominant[c].technology);
            double s = 0.0;
            for (const auto& sh : t.shares) s += sh[tech];
            csv::write_row(out, {t.firm_id, std::to_string(c), assignment.cluster_name(c),
                                 format_double(s / static_cast<double>(t.shares.size()))});
        }
    }
    record(clusters_path);
    {
        auto out = open_out(validity_path);
        out << v.dump(2) << "\n";
    }
    record(validity_path);
    current_->notes.emplace_back("firms_clustered", std::to_string(trajectories.size()));
}

void RunContext::bma() {
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> paths;
    for (auto spec : config_.specs) {
        auto result_path = output(artifacts::bma_result(spec, config_.prior));
        auto density_path = output(artifacts::density(spec, config_.prior));
        paths.emplace_back(std::move(result_path), std::move(density_path));
    }
    const auto assignment = read_clusters(dir_ / artifacts::kClusters);
    std::size_t dropped = 0;
    const auto dataset = labeled_only(load_dataset(), assignment, &dropped);
    current_->notes.emplace_back("rows_without_cluster", std::to_string(dropped));
    current_->notes.emplace_back("prior", std::string(to_string(config_.prior)));
    for (std::size_t s = 0; s < config_.specs.size(); ++s) {
        const auto spec = config_.specs[s];
        const auto opts = design_options(config_, spec);
        const auto filtered = drop_incomplete(dataset, required_variables(dataset, opts));
        const auto design = build_design(filtered.dataset, assignment, opts);
        McmcOptions chain{config_.iterations, config_.burnin, derive_seed(config_.seed, spec_stream(spec))};
        const auto result = mcmc_bma(design, bma_options(config_), chain);
        {
            auto out = open_out(paths[s].first);
            auto j = result_json(result, design, config_, spec);
            j["rows_dropped_incomplete"] = filtered.rows_dropped;
            out << j.dump(2) << "\n";
        }
        record(paths[s].first);
        {
            auto out = open_out(paths[s].second);
            csv::write_row(out, {"variable", "x", "density", "zero_mass"});
            for (const auto& c : result.coefficients) {
                for (std::size_t i = 0; i < c.density.x.size(); ++i) {
                    csv::write_row(out, {c.name, format_double(c.density.x[i]), format_double(c.density.density[i]),
                                         format_double(c.density.zero_mass)});
                }
            }
        }
        record(paths[s].second);
        if (log_) {
            const auto focal = design.find(focal_variable(spec));
            if (focal) {
                const auto& c = result.coefficients[*focal];
                log_("[bma] " + std::string(to_string(spec)) + ": n=" + std::to_string(design.n_obs) +
                     " pip=" + format_double(c.pip) + " mean=" + format_double(c.mean_uncond));
            }
        }
    }
}

void RunContext::rolling() {
    if (!config_.rolling_enabled) throw Error(ErrorKind::config, "rolling windows are disabled in the configuration");
    std::vector<std::filesystem::path> paths;
    for (auto spec : config_.specs) paths.push_back(output(artifacts::rolling(spec, config_.prior)));
    const auto assignment = read_clusters(dir_ / artifacts::kClusters);
    std::size_t dropped = 0;
    const auto dataset = labeled_only(load_dataset(), assignment, &dropped);
    for (std::size_t s = 0; s < config_.specs.size(); ++s) {
        const auto spec = config_.specs[s];
        McmcOptions chain{config_.iterations, config_.burnin, derive_seed(config_.seed, kRollingStream + spec_stream(spec))};
        const auto windows =
            rolling_bma(dataset, assignment, design_options(config_, spec), bma_options(config_), chain, config_.rolling);
        auto out = open_out(paths[s]);
        csv::write_row(out, {"start_year", "end_year", "variable", "post_mean", "ci90_low", "ci90_high", "pip", "n_obs"});
        for (const auto& w : windows) {
            for (const auto& c : w.result.coefficients) {
                csv::write_row(out, {std::to_string(w.start_year), std::to_string(w.end_year), c.name,
                                     format_double(c.mean_uncond), format_double(c.ci90_low),
                                     format_double(c.ci90_high), format_double(c.pip), std::to_string(w.design.n_obs)});
            }
        }
        out.close();
        record(paths[s]);
    }
}

void RunContext::describe() {
    const auto traj_path = output(artifacts::kTrajectories);
    const auto trends_path = output(artifacts::kTrends);
    const auto regional_path = output(artifacts::kRegional);
    const auto countries_path = output(artifacts::kCountries);
    const auto loess_path = output(artifacts::kLoess);
    const auto assignment = read_clusters(dir_ / artifacts::kClusters);
    const auto dataset = load_dataset();
    const auto regions = config_.region_map ? read_region_map(*config_.region_map) : default_region_map();

    std::vector<std::string> warnings;
    const auto trajectories = cluster_roa_trajectories(dataset, assignment, &warnings);
    {
        auto out = open_out(traj_path);
        csv::write_row(out, {"cluster", "label", "year", "mean_roa", "se_mean", "n_firms", "single_observation"});
        for (const auto& t : trajectories) {
            for (const auto& y : t.years) {
                csv::write_row(out, {std::to_string(t.cluster), t.label, std::to_string(y.year), format_double(y.mean_roa),
                                     format_double(y.se_mean), std::to_string(y.n_firms), y.single_observation ? "1" : "0"});
            }
        }
    }
    record(traj_path);
    {
        auto out = open_out(trends_path);
        csv::write_row(out, {"cluster", "label", "from_year", "to_year", "total_delta", "yearly_delta"});
        for (const auto& t : trajectories) {
            if (t.years.size() < 2) {
                warnings.push_back("cluster " + t.label + " has fewer than two years; no trend");
                continue;
            }
            const int from = t.years.front().year;
            const int to = t.years.back().year;
            const auto d = trend_delta(t, from, to);
            csv::write_row(out, {std::to_string(t.cluster), t.label, std::to_string(from), std::to_string(to),
                                 format_double(d.total), format_double(d.yearly)});
        }
    }
    record(trends_path);
    {
        auto out = open_out(regional_path);
        csv::write_row(out, {"region", "group", "mean_roa", "ci95_low", "ci95_high", "n_firms", "n_firm_years"});
        for (const auto& r : regional_means(dataset, assignment, regions)) {
            csv::write_row(out, {r.region, std::string(to_string(r.group)), format_double(r.mean_roa),
                                 std::isfinite(r.ci95_low) ? format_double(r.ci95_low) : "",
                                 std::isfinite(r.ci95_high) ? format_double(r.ci95_high) : "",
                                 std::to_string(r.n_firms), std::to_string(r.n_firm_years)});
        }
    }
    record(regional_path);
    {
        auto out = open_out(countries_path);
        csv::write_row(out, {"country", "region", "renewable_mean", "fossil_mean", "renewable_firm_years",
                             "fossil_firm_years", "latitude", "longitude"});
        for (const auto& c : country_means(dataset, assignment, regions)) {
            csv::write_row(out, {c.country, c.region, opt_double(c.renewable_mean), opt_double(c.fossil_mean),
                                 std::to_string(c.renewable_firm_years), std::to_string(c.fossil_firm_years),
                                 opt_double(c.latitude), opt_double(c.longitude)});
        }
    }
    record(countries_path);
    {
        auto out = open_out(loess_path);
        csv::write_row(out, {"cluster", "label", "x", "fit", "lo", "hi"});
        for (const auto& t : trajectories) {
            std::vector<double> x, y;
            std::set<double> years;
            for (const auto& rec : dataset.records) {
                if (assignment.label_of(rec.firm_id) != t.cluster || !rec.derived) continue;
                if (!std::isfinite(rec.derived->roa)) continue;
                x.push_back(rec.year);
                y.push_back(rec.derived->roa);
                years.insert(rec.year);
            }
            try {
                for (const auto& p : loess(x, y, config_.loess, {years.begin(), years.end()})) {
                    csv::write_row(out, {std::to_string(t.cluster), t.label, format_double(p.x), format_double(p.fit),
                                         std::isfinite(p.lo) ? format_double(p.lo) : "",
                                         std::isfinite(p.hi) ? format_double(p.hi) : ""});
                }
            } catch (const Error& e) {
                warnings.push_back("loess skipped for cluster " + t.label + ": " + e.what());
            }
        }
    }
    record(loess_path);
    for (std::size_t i = 0; i < warnings.size(); ++i) current_->notes.emplace_back("warning_" + std::to_string(i), warnings[i]);
}

std::filesystem::path make_run_dir(const std::filesystem::path& out_root) {
    std::filesystem::create_directories(out_root);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream name;
    name << "run-" << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    auto dir = out_root / name.str();
    for (int i = 1; std::filesystem::exists(dir); ++i) dir = out_root / (name.str() + "-" + std::to_string(i));
    std::filesystem::create_directory(dir);
    return dir;
}

std::filesystem::path run_pipeline(const RunConfig& config, const std::filesystem::path& out_root,
                                   const RunContext::Logger& log) {
    RunContext ctx(config, make_run_dir(out_root), "run", log);
    if (config.synth) ctx.run_stage("synth", [&] { ctx.synth(); });
    ctx.run_stage("cluster", [&] { ctx.cluster(); });
    ctx.run_stage("bma", [&] { ctx.bma(); });
    if (config.rolling_enabled) ctx.run_stage("rolling", [&] { ctx.rolling(); });
    ctx.run_stage("describe", [&] { ctx.describe(); });
    return ctx.dir();
}

}  // namespace powerpanel
