#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "../support/fixtures.hpp"
#include "../support/scratch.hpp"
#include "powerpanel/bma.hpp"
#include "powerpanel/design.hpp"
#include "powerpanel/error.hpp"
#include "powerpanel/rolling.hpp"
#include "powerpanel/seeding.hpp"

using namespace powerpanel;

namespace {

SynthConfig config(std::size_t firms = 64, std::uint64_t seed = 5) {
    SynthConfig c;
    c.n_firms = firms;
    c.first_year = 2014;
    c.last_year = 2023;
    c.beta = SynthConfig::default_beta();
    c.seed = seed;
    return c;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::io;
}

}  // namespace

TEST_CASE("generator is deterministic per seed") {
    scratch::Dir dir("synth");
    const auto a = generate_panel(config());
    const auto b = generate_panel(config());
    write_synth_files(a, dir.path() / "a");
    write_synth_files(b, dir.path() / "b");
    for (const char* f : {"financials.csv", "capacities.csv", "macro.csv", "ground_truth.json"}) {
        CHECK(scratch::slurp(dir.path() / "a" / f) == scratch::slurp(dir.path() / "b" / f));
    }
    const auto c = generate_panel(config(64, 6));
    CHECK(c.dataset.records[0].net_income != a.dataset.records[0].net_income);

    const auto truth = read_ground_truth(dir.path() / "a" / "ground_truth.json");
    CHECK(truth.seed == 5);
    CHECK(truth.beta == a.truth.beta);
    CHECK(truth.firm_cluster == a.truth.firm_cluster);
    CHECK(truth.clusters.size() == 8);

    // the written files ingest back into the same panel
    const auto back = derive_variables(ingest_panel(
        {dir.path() / "a" / "financials.csv", dir.path() / "a" / "capacities.csv", dir.path() / "a" / "macro.csv"}));
    const auto direct = derive_variables(a.dataset);
    REQUIRE(back.records.size() == direct.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) {
        CHECK(back.records[i].derived->roa == direct.records[i].derived->roa);
        CHECK(back.records[i].derived->renewable_share == direct.records[i].derived->renewable_share);
    }
}

TEST_CASE("generated shares lie on the simplex and respect the leading range") {
    auto cfg = config(40);
    cfg.clusters = {{10, Technology::wind, 0.79, 0.97}, {10, Technology::solar, 0.79, 0.97},
                    {10, Technology::gas, 0.6, 0.7}, {10, Technology::coal, 0.85, 0.9}};
    const auto p = fixture::labelled_panel(cfg);
    std::map<std::string, std::pair<double, int>> lead;
    for (const auto& r : p.dataset.records) {
        REQUIRE(r.derived->tech_shares);
        const auto& s = *r.derived->tech_shares;
        double total = 0.0;
        for (double v : s) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
        const auto c = p.truth.firm_cluster.at(r.firm_id);
        auto& [sum, n] = lead[r.firm_id];
        sum += s[index_of(p.truth.clusters[c].dominant)];
        ++n;
    }
    for (const auto& [firm, acc] : lead) {
        const auto& spec = p.truth.clusters[p.truth.firm_cluster.at(firm)];
        const double mean = acc.first / acc.second;
        CHECK(mean >= spec.lead_lo);
        CHECK(mean <= spec.lead_hi);
    }
}

TEST_CASE("least squares recovers the planted coefficients as noise vanishes") {
    auto cfg = config(80);
    cfg.noise_sd = 1e-10;
    const auto p = fixture::labelled_panel(cfg);
    std::vector<std::string> names;
    for (const auto& [name, b] : cfg.beta) names.push_back(name);

    std::vector<const FirmYearRecord*> rows;
    for (const auto& r : p.dataset.records) {
        if (r.year > cfg.first_year) rows.push_back(&r);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto K = static_cast<Eigen::Index>(names.size());
    std::vector<int> years;
    std::vector<double> y;
    std::vector<std::vector<double>> cols(names.size());
    for (const auto* r : rows) {
        years.push_back(r->year);
        y.push_back(*variable_value(*r, "roa"));
        const auto dominant = p.truth.clusters[p.truth.firm_cluster.at(r->firm_id)].dominant;
        for (std::size_t j = 0; j < names.size(); ++j) {
            double v = 0.0;
            if (names[j].starts_with("cluster_")) {
                v = std::string(name_of(dominant)) == names[j].substr(8) ? 1.0 : 0.0;
            } else {
                v = *variable_value(*r, names[j]);
            }
            cols[j].push_back(v);
        }
    }
    Eigen::MatrixXd X(n, K);
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto dm = demean_by_year(cols[j], years);
        for (Eigen::Index i = 0; i < n; ++i) X(i, static_cast<Eigen::Index>(j)) = dm[static_cast<std::size_t>(i)];
    }
    const auto ydm = demean_by_year(y, years);
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(ydm.data(), n);
    const Eigen::VectorXd b = X.colPivHouseholderQr().solve(yv);
    for (std::size_t j = 0; j < names.size(); ++j) {
        CAPTURE(names[j]);
        CHECK(std::abs(b(static_cast<Eigen::Index>(j)) - cfg.beta.at(names[j])) <= 1e-6);
    }
}

TEST_CASE("flipping the planted focal sign flips the posterior mean") {
    for (double sign : {1.0, -1.0}) {
        auto cfg = config(200);
        cfg.beta["renewable_share"] = sign * 0.02;
        cfg.noise_sd = 0.003;
        const auto p = fixture::labelled_panel(cfg);
        DesignOptions opts;
        opts.include_interactions = false;
        const auto filtered = drop_incomplete(p.dataset, required_variables(p.dataset, opts));
        const auto d = build_design(filtered.dataset, p.clusters, opts);
        const auto r = enumerate_bma(d);
        CHECK(r.coefficients[0].mean_uncond * sign > 0.0);
        CHECK(r.pip[0] > 0.9);
        const auto report = planted_recovery_report(d, p.truth, r);
        for (const auto& row : report) {
            CAPTURE(row.name);
            if (row.expectation == RecoveryExpectation::strong) CHECK(row.pass);
        }
    }
}

TEST_CASE("generator config errors") {
    auto bad_range = config(8);
    bad_range.clusters = {{8, Technology::wind, 0.9, 0.8}};
    CHECK(kind_of([&] { generate_panel(bad_range); }) == ErrorKind::config);
    auto bad_count = config(9);
    bad_count.clusters = {{8, Technology::wind, 0.8, 0.9}};
    CHECK(kind_of([&] { generate_panel(bad_count); }) == ErrorKind::config);
    auto bad_noise = config(8);
    bad_noise.noise_sd = 0.0;
    CHECK(kind_of([&] { generate_panel(bad_noise); }) == ErrorKind::config);
    auto bad_beta = config(8);
    bad_beta.beta["ebitda"] = 1.0;
    CHECK(kind_of([&] { generate_panel(bad_beta); }) == ErrorKind::config);
    auto bad_ramp = config(8);
    bad_ramp.focal_ramp = std::map<int, double>{{2014, 0.01}};
    CHECK(kind_of([&] { generate_panel(bad_ramp); }) == ErrorKind::config);
}

TEST_CASE("rolling start years") {
    CHECK(rolling_start_years({6, 2014, 2023}) == std::vector<int>{2014, 2015, 2016, 2017, 2018});
    CHECK(rolling_start_years({10, 2014, 2023}) == std::vector<int>{2014});
    CHECK(kind_of([] { rolling_start_years({11, 2014, 2023}); }) == ErrorKind::config);
}

TEST_CASE("full-span window equals the full-sample run") {
    const auto p = fixture::labelled_panel(config(48));
    DesignOptions opts;
    opts.include_interactions = false;
    const McmcOptions chain{5000, 500, 17};
    const auto windows = rolling_bma(p.dataset, p.clusters, opts, {}, chain, {9, 2015, 2023});
    REQUIRE(windows.size() == 1);
    const auto filtered = drop_incomplete(p.dataset, required_variables(p.dataset, opts));
    const auto d = build_design(filtered.dataset, p.clusters, opts);
    const auto full = mcmc_bma(d, {}, {5000, 500, derive_seed(17, 2015)});
    CHECK(windows[0].design.n_obs == d.n_obs);
    CHECK(windows[0].result.pip == full.pip);

    const auto five = rolling_bma(p.dataset, p.clusters, opts, {}, chain, {6, 2014, 2023});
    REQUIRE(five.size() == 5);
    for (std::size_t w = 0; w < 5; ++w) {
        CHECK(five[w].start_year == 2014 + static_cast<int>(w));
        CHECK(five[w].end_year == five[w].start_year + 5);
        for (int y : five[w].design.year_index) {
            CHECK(y >= five[w].start_year);
            CHECK(y <= five[w].end_year);
        }
    }
    try {
        rolling_bma(p.dataset, p.clusters, opts, {}, chain, {3, 2010, 2023});
        FAIL("expected empty window");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_window);
        CHECK(std::string(e.what()).find("2010") != std::string::npos);
    }
}
