#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/scratch.hpp"
#include "powerpanel/csv.hpp"
#include "powerpanel/error.hpp"
#include "powerpanel/panel.hpp"

using namespace powerpanel;

namespace {

const char* kFinHeader = "firm_id,year,country,net_income,total_assets,total_equity,total_debt,sales\n";
const char* kCapHeader = "firm_id,year,technology,capacity_mw\n";

PanelFiles three_rows(const scratch::Dir& dir) {
    PanelFiles f;
    f.financials = dir.write("fin.csv", std::string(kFinHeader) +
                                            "F1,2020,DE,5,100,40,60,200\n"
                                            "F1,2021,DE,6,110,45,65,220\n"
                                            "F2,2020,FR,-2,50,20,30,80\n");
    f.capacities = dir.write("cap.csv", std::string(kCapHeader) +
                                            "F1,2020,wind,50\nF1,2020,gas,50\n"
                                            "F1,2021,wind,60\nF1,2021,gas,40\n"
                                            "F2,2020,coal,10\n");
    return f;
}

FirmYearRecord record(std::string id, int year, double assets, double sales, TechVector mw) {
    FirmYearRecord r;
    r.firm_id = std::move(id);
    r.year = year;
    r.country = "DE";
    r.net_income = 0.05 * assets;
    r.total_assets = assets;
    r.total_equity = 0.4 * assets;
    r.total_debt = 0.6 * assets;
    r.sales = sales;
    r.capacity_mw = mw;
    return r;
}

}  // namespace

TEST_CASE("csv round trip keeps quoted fields and shortest doubles") {
    scratch::Dir dir("csv");
    std::ostringstream s;
    csv::write_row(s, {"a", "b,c", "say \"hi\""});
    csv::write_row(s, {"1", csv::format_double(0.1), csv::format_double(1e-300)});
    const auto path = dir.write("t.csv", "\xEF\xBB\xBF" + s.str() + "\n");
    const auto t = csv::read(path);
    CHECK(t.header == std::vector<std::string>{"a", "b,c", "say \"hi\""});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].line == 2);
    CHECK(*csv::parse_double(t.rows[0].fields[1]) == 0.1);
    CHECK(*csv::parse_double(t.rows[0].fields[2]) == 1e-300);
    CHECK_FALSE(csv::parse_double("1.5x"));
    CHECK_FALSE(csv::parse_int("2020.5"));
    CHECK_THROWS_AS(t.column("missing", path), Error);
}

TEST_CASE("ingest joins financials and capacities") {
    scratch::Dir dir("ingest");
    const auto ds = ingest_panel(three_rows(dir));
    REQUIRE(ds.records.size() == 3);
    for (const auto& r : ds.records) {
        CHECK(r.capacity_mw.has_value());
        CHECK_FALSE(r.incomplete);
    }
    CHECK((*ds.records[0].capacity_mw)[index_of(Technology::wind)] == 50.0);
}

TEST_CASE("ingest keeps unmatched financials as incomplete rows") {
    scratch::Dir dir("unmatched");
    auto f = three_rows(dir);
    f.capacities = dir.write("cap2.csv", std::string(kCapHeader) + "F1,2020,wind,50\n");
    const auto ds = ingest_panel(f);
    REQUIRE(ds.records.size() == 3);
    CHECK_FALSE(ds.records[0].incomplete);
    CHECK(ds.records[1].incomplete);
    CHECK_FALSE(ds.records[1].capacity_mw.has_value());
}

TEST_CASE("ingest sums long-format capacity rows") {
    scratch::Dir dir("sum");
    auto f = three_rows(dir);
    f.capacities = dir.write("cap3.csv", std::string(kCapHeader) + "F1,2020,wind,20\nF1,2020,wind,30\n");
    const auto ds = ingest_panel(f);
    CHECK((*ds.records[0].capacity_mw)[index_of(Technology::wind)] == 50.0);
}

TEST_CASE("duplicate firm-year cites both lines") {
    scratch::Dir dir("dup");
    PanelFiles f;
    f.financials = dir.write("fin.csv", std::string(kFinHeader) + "F1,2020,DE,5,100,40,60,200\nF1,2020,DE,5,100,40,60,200\n");
    f.capacities = dir.write("cap.csv", kCapHeader);
    try {
        ingest_panel(f);
        FAIL("expected uniqueness error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::uniqueness);
        const std::string msg = e.what();
        CHECK(msg.find("fin.csv:2") != std::string::npos);
        CHECK(msg.find("fin.csv:3") != std::string::npos);
    }
}

TEST_CASE("missing column and unreadable file") {
    scratch::Dir dir("schema");
    PanelFiles f;
    f.financials = dir.write("fin.csv", "firm_id,year,country,net_income,total_assets,total_equity,sales\n");
    f.capacities = dir.write("cap.csv", kCapHeader);
    try {
        ingest_panel(f);
        FAIL("expected schema error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::schema);
        CHECK(std::string(e.what()).find("total_debt") != std::string::npos);
    }
    f.financials = dir.path() / "nope.csv";
    try {
        ingest_panel(f);
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
    }
}

TEST_CASE("unparseable rows are rejected with line diagnostics") {
    scratch::Dir dir("bad");
    PanelFiles f;
    f.financials = dir.write("fin.csv", std::string(kFinHeader) + "F1,2020,DE,5,100,40,60,200\nF2,20x0,DE,5,100,40,60,200\n");
    f.capacities = dir.write("cap.csv", kCapHeader);
    const auto ds = ingest_panel(f);
    CHECK(ds.records.size() == 1);
    REQUIRE_FALSE(ds.diagnostics.empty());
    bool cited = false;
    for (const auto& d : ds.diagnostics) cited = cited || d.find("fin.csv:3") != std::string::npos;
    CHECK(cited);
}

TEST_CASE("macro columns join by country and year") {
    scratch::Dir dir("macro");
    auto f = three_rows(dir);
    f.macro = dir.write("macro.csv", "country,year,gdp_growth\nDE,2020,0.01\nDE,2021,0.02\nFR,2020,-0.01\n");
    const auto ds = derive_variables(ingest_panel(f));
    CHECK(ds.macro_names == std::vector<std::string>{"gdp_growth"});
    CHECK(*variable_value(ds.records[1], "gdp_growth") == 0.02);
    CHECK(*variable_value(ds.records[2], "gdp_growth") == -0.01);
}

TEST_CASE("derived variables follow the ratio definitions") {
    scratch::Dir dir("derive");
    const auto ds = derive_variables(ingest_panel(three_rows(dir)));
    const auto& r0 = *ds.records[0].derived;
    CHECK(r0.roa == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(r0.roe == doctest::Approx(5.0 / 40.0).epsilon(1e-15));
    CHECK(r0.leverage == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r0.size == doctest::Approx(std::log(100.0)).epsilon(1e-15));
    CHECK(std::isnan(r0.sales_growth));
    CHECK(r0.renewable_share == 0.5);
    CHECK(r0.fossil_share == 0.5);
    CHECK((*r0.tech_shares)[index_of(Technology::wind)] == 0.5);
    CHECK((*r0.tech_shares)[index_of(Technology::solar)] == 0.0);
    CHECK(ds.records[1].derived->sales_growth == doctest::Approx(0.10).epsilon(1e-14));
}

TEST_CASE("sales growth needs the exactly preceding year") {
    PanelDataset ds;
    ds.records.push_back(record("F1", 2018, 100, 100, {1, 0, 0, 0, 0, 0, 0, 0}));
    ds.records.push_back(record("F1", 2020, 100, 110, {1, 0, 0, 0, 0, 0, 0, 0}));
    const auto out = derive_variables(ds);
    CHECK(std::isnan(out.records[1].derived->sales_growth));
}

TEST_CASE("degenerate rows are flagged rather than fatal") {
    PanelDataset ds;
    ds.records.push_back(record("F1", 2020, 0.0, 10, {1, 0, 0, 0, 0, 0, 0, 0}));
    ds.records.push_back(record("F2", 2020, 100, 10, {0, 0, 0, 0, 0, 0, 0, 0}));
    auto r = record("F3", 2020, 100, 10, {1, 0, 0, 0, 0, 0, 0, 0});
    r.total_equity = 0.0;
    ds.records.push_back(r);
    const auto out = derive_variables(ds);
    CHECK(out.records[0].incomplete);
    CHECK(out.records[1].incomplete);
    CHECK_FALSE(out.records[1].derived->tech_shares.has_value());
    CHECK_FALSE(out.records[2].incomplete);
    CHECK(std::isnan(out.records[2].derived->roe));
    CHECK(std::isfinite(out.records[2].derived->roa));
}

TEST_CASE("shares are a partition of total capacity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::bernoulli_distribution zero(0.3);
    PanelDataset ds;
    for (int i = 0; i < 500; ++i) {
        TechVector mw{};
        for (auto& v : mw) v = zero(rng) ? 0.0 : u(rng);
        mw[static_cast<std::size_t>(i % 8)] += 1.0;
        ds.records.push_back(record("F" + std::to_string(i), 2020, 100, 10, mw));
    }
    for (const auto& r : derive_variables(ds).records) {
        const auto& d = *r.derived;
        const auto& s = *d.tech_shares;
        double total = 0.0;
        for (double v : s) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
        const auto at = [&](Technology t) { return s[index_of(t)]; };
        CHECK(std::abs(d.renewable_share - (at(Technology::wind) + at(Technology::solar))) <= 1e-12);
        CHECK(std::abs(d.fossil_share - (at(Technology::coal) + at(Technology::gas) + at(Technology::oil))) <= 1e-12);
        const double rest = at(Technology::biomass) + at(Technology::hydro) + at(Technology::nuclear);
        CHECK(std::abs(d.renewable_share + d.fossil_share + rest - 1.0) <= 1e-9);
    }
}

TEST_CASE("ratio hook can remap derived values") {
    PanelDataset ds;
    ds.records.push_back(record("F1", 2020, 100, 10, {1, 0, 0, 0, 0, 0, 0, 0}));
    const auto out = derive_variables(ds, [](FirmYearRecord& r) { r.derived->roa = std::min(r.derived->roa, 0.01); });
    CHECK(out.records[0].derived->roa == 0.01);
}

TEST_CASE("drop_incomplete filters and reports per variable") {
    PanelDataset ds;
    for (int i = 0; i < 10; ++i) ds.records.push_back(record("F" + std::to_string(i), 2020, 100, 10, {1, 0, 0, 0, 0, 0, 0, 0}));
    ds = derive_variables(ds);
    ds.records[3].derived->leverage = kMissing;
    ds.records[7].derived->leverage = kMissing;
    ds.records[5].derived->roa = std::numeric_limits<double>::infinity();

    const auto lev = drop_incomplete(ds, {"leverage"});
    CHECK(lev.dataset.records.size() == 8);
    CHECK(lev.dropped_per_variable.at("leverage") == 2);

    const auto none = drop_incomplete(ds, {});
    CHECK(none.dataset.records.size() == ds.records.size());
    CHECK(none.rows_dropped == 0);

    const auto roa = drop_incomplete(ds, {"roa"});
    CHECK(roa.dataset.records.size() == 9);

    const auto both = drop_incomplete(ds, {"leverage", "roa"});
    const auto again = drop_incomplete(both.dataset, {"leverage", "roa"});
    CHECK(again.dataset.records.size() == both.dataset.records.size());
    CHECK(again.rows_dropped == 0);

    CHECK_THROWS_AS(drop_incomplete(ds, {"not_a_variable"}), Error);
    try {
        drop_incomplete(ds, {"not_a_variable"});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("window slices inclusive year ranges") {
    PanelDataset ds;
    for (int y = 2014; y <= 2023; ++y) ds.records.push_back(record("F1", y, 100, 10, {1, 0, 0, 0, 0, 0, 0, 0}));
    CHECK(window(ds, 2014, 6).years() == std::vector<int>{2014, 2015, 2016, 2017, 2018, 2019});
    CHECK(window(ds, 2018, 6).years() == std::vector<int>{2018, 2019, 2020, 2021, 2022, 2023});
    CHECK(window(ds, 2016, 1).years() == std::vector<int>{2016});
    try {
        window(ds, 2030, 2);
        FAIL("expected empty window");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_window);
        CHECK(std::string(e.what()).find("2030") != std::string::npos);
        CHECK(std::string(e.what()).find("2031") != std::string::npos);
    }
}

TEST_CASE("demean_by_year") {
    const std::vector<double> v{1, 3, 2, 4};
    const std::vector<int> y{2020, 2020, 2021, 2021};
    CHECK(demean_by_year(v, y) == std::vector<double>{-1, 1, -1, 1});

    const std::vector<double> single{1, 2, 6};
    const std::vector<int> one{2020, 2020, 2020};
    const auto d = demean_by_year(single, one);
    CHECK(d[0] == doctest::Approx(-2.0));
    CHECK(d[2] == doctest::Approx(3.0));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(10.0, 3.0);
    std::uniform_int_distribution<int> yr(2014, 2023);
    std::vector<double> vals(400);
    std::vector<int> years(400);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        vals[i] = z(rng);
        years[i] = yr(rng);
    }
    const auto once = demean_by_year(vals, years);
    const auto twice = demean_by_year(once, years);
    std::map<int, double> sums;
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(std::abs(twice[i] - once[i]) <= 1e-12);
        sums[years[i]] += once[i];
    }
    for (const auto& [yy, s] : sums) CHECK(std::abs(s) <= 1e-10);

    // constant within each year is annihilated
    std::vector<double> step(years.size());
    for (std::size_t i = 0; i < step.size(); ++i) step[i] = 0.1 * years[i];
    for (double x : demean_by_year(step, years)) CHECK(std::abs(x) <= 1e-12);
}
