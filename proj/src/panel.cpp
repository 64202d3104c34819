#include "powerpanel/panel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

#include "powerpanel/csv.hpp"
#include "powerpanel/error.hpp"

namespace powerpanel {

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.filename().string() + ":" + std::to_string(line);
}

bool is_missing_token(std::string_view s) {
    return s.empty() || s == "NA" || s == "na" || s == "nan" || s == "NaN" || s == "null";
}

// Parses a numeric cell; empty/NA cells are missing, anything else that
// fails to parse is a type error.
std::optional<double> numeric_cell(const std::string& text, bool& ok) {
    if (is_missing_token(text)) return kMissing;
    auto v = csv::parse_double(text);
    if (!v) ok = false;
    return v;
}

using FirmYearKey = std::pair<std::string, int>;

struct FirmYearHash {
    std::size_t operator()(const FirmYearKey& k) const noexcept {
        return std::hash<std::string>{}(k.first) ^ (std::hash<int>{}(k.second) * 0x9e3779b97f4a7c15ULL);
    }
};

}  // namespace

std::vector<int> PanelDataset::years() const {
    std::set<int> ys;
    for (const auto& r : records) ys.insert(r.year);
    return {ys.begin(), ys.end()};
}

PanelDataset ingest_panel(const PanelFiles& files) {
    PanelDataset out;

    const auto fin = csv::read(files.financials);
    const std::size_t c_firm = fin.column("firm_id", files.financials);
    const std::size_t c_year = fin.column("year", files.financials);
    const std::size_t c_country = fin.column("country", files.financials);
    const std::size_t c_ni = fin.column("net_income", files.financials);
    const std::size_t c_ta = fin.column("total_assets", files.financials);
    const std::size_t c_te = fin.column("total_equity", files.financials);
    const std::size_t c_td = fin.column("total_debt", files.financials);
    const std::size_t c_sales = fin.column("sales", files.financials);

    std::unordered_map<FirmYearKey, std::size_t, FirmYearHash> index;
    for (const auto& row : fin.rows) {
        if (row.fields.size() != fin.header.size()) {
            out.diagnostics.push_back(where(files.financials, row.line) + ": expected " +
                                      std::to_string(fin.header.size()) + " fields, got " +
                                      std::to_string(row.fields.size()) + "; row rejected");
            continue;
        }
        FirmYearRecord rec;
        rec.source_line = row.line;
        rec.firm_id = row.fields[c_firm];
        rec.country = row.fields[c_country];
        auto year = csv::parse_int(row.fields[c_year]);
        bool ok = !rec.firm_id.empty() && year.has_value();
        if (year) rec.year = static_cast<int>(*year);
        auto ni = numeric_cell(row.fields[c_ni], ok);
        auto ta = numeric_cell(row.fields[c_ta], ok);
        auto te = numeric_cell(row.fields[c_te], ok);
        auto td = numeric_cell(row.fields[c_td], ok);
        auto sales = numeric_cell(row.fields[c_sales], ok);
        if (!ok) {
            out.diagnostics.push_back(where(files.financials, row.line) +
                                      ": unparseable key or numeric field; row rejected");
            continue;
        }
        rec.net_income = *ni;
        rec.total_assets = *ta;
        rec.total_equity = *te;
        rec.total_debt = *td;
        rec.sales = *sales;

        FirmYearKey key{rec.firm_id, rec.year};
        if (auto it = index.find(key); it != index.end()) {
            throw Error(ErrorKind::uniqueness,
                        "duplicate (firm_id, year) = (" + rec.firm_id + ", " + std::to_string(rec.year) +
                            ") at " + where(files.financials, out.records[it->second].source_line) +
                            " and " + where(files.financials, row.line));
        }
        index.emplace(std::move(key), out.records.size());
        out.records.push_back(std::move(rec));
    }

    const auto cap = csv::read(files.capacities);
    const std::size_t k_firm = cap.column("firm_id", files.capacities);
    const std::size_t k_year = cap.column("year", files.capacities);
    const std::size_t k_tech = cap.column("technology", files.capacities);
    const std::size_t k_mw = cap.column("capacity_mw", files.capacities);
    std::size_t unmatched_capacity_rows = 0;
    for (const auto& row : cap.rows) {
        if (row.fields.size() != cap.header.size()) {
            out.diagnostics.push_back(where(files.capacities, row.line) + ": wrong field count; row rejected");
            continue;
        }
        auto year = csv::parse_int(row.fields[k_year]);
        auto tech = parse_technology(row.fields[k_tech]);
        auto mw = csv::parse_double(row.fields[k_mw]);
        if (!year || !tech || !mw || !std::isfinite(*mw) || *mw < 0.0) {
            out.diagnostics.push_back(where(files.capacities, row.line) +
                                      ": invalid year, technology or capacity; row rejected");
            continue;
        }
        auto it = index.find({row.fields[k_firm], static_cast<int>(*year)});
        if (it == index.end()) {
            ++unmatched_capacity_rows;
            continue;
        }
        auto& rec = out.records[it->second];
        if (!rec.capacity_mw) rec.capacity_mw = TechVector{};
        (*rec.capacity_mw)[index_of(*tech)] += *mw;
    }
    if (unmatched_capacity_rows > 0) {
        out.diagnostics.push_back(files.capacities.filename().string() + ": " +
                                  std::to_string(unmatched_capacity_rows) +
                                  " rows without a matching financials record ignored");
    }

    if (!files.macro.empty()) {
        const auto mac = csv::read(files.macro);
        const std::size_t m_country = mac.column("country", files.macro);
        const std::size_t m_year = mac.column("year", files.macro);
        std::vector<std::size_t> value_cols;
        for (std::size_t i = 0; i < mac.header.size(); ++i) {
            if (i == m_country || i == m_year) continue;
            value_cols.push_back(i);
            out.macro_names.push_back(mac.header[i]);
        }
        std::map<std::pair<std::string, int>, std::pair<std::size_t, std::vector<double>>> macro_rows;
        for (const auto& row : mac.rows) {
            if (row.fields.size() != mac.header.size()) {
                out.diagnostics.push_back(where(files.macro, row.line) + ": wrong field count; row rejected");
                continue;
            }
            auto year = csv::parse_int(row.fields[m_year]);
            bool ok = year.has_value();
            std::vector<double> values;
            for (auto c : value_cols) {
                auto v = numeric_cell(row.fields[c], ok);
                values.push_back(v ? *v : kMissing);
            }
            if (!ok) {
                out.diagnostics.push_back(where(files.macro, row.line) + ": unparseable field; row rejected");
                continue;
            }
            std::pair<std::string, int> key{row.fields[m_country], static_cast<int>(*year)};
            if (auto it = macro_rows.find(key); it != macro_rows.end()) {
                throw Error(ErrorKind::uniqueness, "duplicate (country, year) = (" + key.first + ", " +
                                                       std::to_string(key.second) + ") at " +
                                                       where(files.macro, it->second.first) + " and " +
                                                       where(files.macro, row.line));
            }
            macro_rows.emplace(std::move(key), std::make_pair(row.line, std::move(values)));
        }
        for (auto& rec : out.records) {
            auto it = macro_rows.find({rec.country, rec.year});
            for (std::size_t i = 0; i < out.macro_names.size(); ++i) {
                rec.macro[out.macro_names[i]] = it == macro_rows.end() ? kMissing : it->second.second[i];
            }
        }
    }

    for (auto& rec : out.records) {
        if (!rec.capacity_mw) rec.incomplete = true;
    }
    std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.firm_id, a.year) < std::tie(b.firm_id, b.year);
    });
    return out;
}

PanelDataset derive_variables(PanelDataset dataset, const RatioHook& hook) {
    auto& recs = dataset.records;
    std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.firm_id, a.year) < std::tie(b.firm_id, b.year);
    });
    for (std::size_t i = 0; i < recs.size(); ++i) {
        auto& rec = recs[i];
        DerivedRow d;
        const bool assets_ok = std::isfinite(rec.total_assets) && rec.total_assets > 0.0;
        if (assets_ok) {
            d.roa = rec.net_income / rec.total_assets;
            d.leverage = rec.total_debt / rec.total_assets;
            d.size = std::log(rec.total_assets);
        }
        if (std::isfinite(rec.total_equity) && rec.total_equity != 0.0) d.roe = rec.net_income / rec.total_equity;

        if (i > 0 && recs[i - 1].firm_id == rec.firm_id && recs[i - 1].year == rec.year - 1) {
            const double prev = recs[i - 1].sales;
            if (std::isfinite(prev) && prev != 0.0) d.sales_growth = (rec.sales - prev) / prev;
        }

        double total = 0.0;
        if (rec.capacity_mw) {
            for (double mw : *rec.capacity_mw) total += mw;
        }
        if (total > 0.0) {
            TechVector shares{};
            for (std::size_t t = 0; t < kTechCount; ++t) shares[t] = (*rec.capacity_mw)[t] / total;
            d.renewable_share = shares[index_of(Technology::wind)] + shares[index_of(Technology::solar)];
            d.fossil_share = shares[index_of(Technology::coal)] + shares[index_of(Technology::gas)] +
                             shares[index_of(Technology::oil)];
            d.tech_shares = shares;
        }
        rec.incomplete = !assets_ok || !(total > 0.0);
        d.macro_controls = rec.macro;
        rec.derived = std::move(d);
        if (hook) hook(rec);
    }
    return dataset;
}

std::vector<std::string> variable_catalogue(const PanelDataset& dataset) {
    std::vector<std::string> names = {"roa", "roe", "leverage", "size", "sales_growth", "renewable_share",
                                      "fossil_share"};
    for (auto t : kTechnologies) names.push_back("share_" + std::string(name_of(t)));
    names.insert(names.end(), dataset.macro_names.begin(), dataset.macro_names.end());
    return names;
}

std::optional<double> variable_value(const FirmYearRecord& record, std::string_view name) {
    if (name.starts_with("share_")) {
        auto tech = parse_technology(name.substr(6));
        if (!tech) return std::nullopt;
        if (!record.derived || !record.derived->tech_shares) return kMissing;
        return (*record.derived->tech_shares)[index_of(*tech)];
    }
    static const std::map<std::string_view, double DerivedRow::*, std::less<>> fields = {
        {"roa", &DerivedRow::roa},
        {"roe", &DerivedRow::roe},
        {"leverage", &DerivedRow::leverage},
        {"size", &DerivedRow::size},
        {"sales_growth", &DerivedRow::sales_growth},
        {"renewable_share", &DerivedRow::renewable_share},
        {"fossil_share", &DerivedRow::fossil_share},
    };
    if (auto it = fields.find(name); it != fields.end()) {
        return record.derived ? (*record.derived).*(it->second) : kMissing;
    }
    if (auto it = record.macro.find(std::string(name)); it != record.macro.end()) {
        if (record.derived) {
            auto d = record.derived->macro_controls.find(std::string(name));
            if (d != record.derived->macro_controls.end()) return d->second;
        }
        return it->second;
    }
    return std::nullopt;
}

FilterReport drop_incomplete(const PanelDataset& dataset, const std::vector<std::string>& required) {
    const auto catalogue = variable_catalogue(dataset);
    for (const auto& name : required) {
        if (std::find(catalogue.begin(), catalogue.end(), name) == catalogue.end()) {
            throw Error(ErrorKind::config, "unknown variable '" + name + "' in required list");
        }
    }
    FilterReport report;
    report.dataset.macro_names = dataset.macro_names;
    report.dataset.diagnostics = dataset.diagnostics;
    for (const auto& name : required) report.dropped_per_variable[name] = 0;
    for (const auto& rec : dataset.records) {
        bool keep = true;
        for (const auto& name : required) {
            auto v = variable_value(rec, name);
            if (!v || !std::isfinite(*v)) {
                ++report.dropped_per_variable[name];
                keep = false;
            }
        }
        if (keep) {
            report.dataset.records.push_back(rec);
        } else {
            ++report.rows_dropped;
        }
    }
    return report;
}

PanelDataset window(const PanelDataset& dataset, int start_year, int length_years) {
    if (length_years < 1) {
        throw Error(ErrorKind::config, "window length must be >= 1, got " + std::to_string(length_years));
    }
    const int end_year = start_year + length_years - 1;
    PanelDataset out;
    out.macro_names = dataset.macro_names;
    for (const auto& rec : dataset.records) {
        if (rec.year >= start_year && rec.year <= end_year) out.records.push_back(rec);
    }
    if (out.records.empty()) {
        throw Error(ErrorKind::empty_window,
                    "no rows in window [" + std::to_string(start_year) + ", " + std::to_string(end_year) + "]");
    }
    return out;
}

std::vector<double> demean_by_year(std::span<const double> values, std::span<const int> years) {
    if (values.size() != years.size()) {
        throw Error(ErrorKind::input, "values and years differ in length");
    }
    std::map<int, std::pair<double, std::size_t>> groups;
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto& g = groups[years[i]];
        g.first += values[i];
        ++g.second;
    }
    std::map<int, double> means;
    for (auto& [year, g] : groups) means[year] = g.first / static_cast<double>(g.second);
    // Second pass removes the rounding left by the first mean.
    std::map<int, double> residual;
    for (std::size_t i = 0; i < values.size(); ++i) residual[years[i]] += values[i] - means[years[i]];
    for (auto& [year, m] : means) m += residual[year] / static_cast<double>(groups[year].second);

    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - means[years[i]];
    return out;
}

}  // namespace powerpanel
